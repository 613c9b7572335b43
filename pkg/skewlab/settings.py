from pydantic_settings import SettingsConfigDict, BaseSettings


class Config(BaseSettings):
    MAX_PERIOD: int = 12
    MAX_PERIODIC_POINTS: int = 2_000_000
    PCF_TERM_BUDGET: int = 1_000_000
    ROUNDOFF_SLACK: float = 1e-9
    OBSTRUCTION_MARGIN: float = 1e-9
    BRACKET_RADIUS: float = 2.0

    LEAF_RADIUS: float = 0.5
    LEAF_SAMPLES: int = 2048

    GRID_CONDITION_LIMIT: float = 1e12
    INTERPOLATION_RATIO_BOUND: float = 12.0
    CALIBRATION_SAFETY_FACTOR: float = 2.0
    CALIBRATION_TRIALS: int = 2000
    CALIBRATION_VERSION: str = "1"
    PERTURBATION_THETA: float = 0.1

    JOURNE_R: float = 0.5
    CONE_APERTURE: float = 2.0
    EXPANSION_CEILING: float = 10.0

    VERBOSE_ERRORS: bool = False
    LOG_LEVEL: str = "WARNING"
    model_config = SettingsConfigDict(env_prefix="SKEWLAB_")
