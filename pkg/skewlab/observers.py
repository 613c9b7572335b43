import abc
import logging
import time
from typing import Dict, List, Tuple

from skewlab.types import ObserverT, StepT

logger = logging.getLogger(__name__)


class Observer(ObserverT, abc.ABC):
    def should_record_step(self, step: StepT) -> bool:
        """
        Controls whether the observer will log given step
        """
        return True

    def record_start(self, step: StepT) -> None:
        """
        This method is executed before the ``step`` is executed
        """
        pass

    def record_end(self, step: StepT) -> None:
        """
        This method is executed after the ``step`` is executed
        """
        pass


class ExecutionTimeObserver(Observer):
    """
    Observer which measures execution times of the steps in the pipeline
    """

    measurements: List[Tuple[str, float]]

    def __init__(self) -> None:
        self.measurements = []
        self._measuring: Dict[int, float] = {}

    def __repr__(self) -> str:
        return "ExecutionTimeObserver({})".format(self.measurements)

    def should_record_step(self, step: StepT) -> bool:
        return not getattr(step, "IS_SYSTEM_STEP", False)

    def record_start(self, step: StepT) -> None:
        self._measuring[id(step)] = time.perf_counter()

    def record_end(self, step: StepT) -> None:
        started = self._measuring.pop(id(step))
        self.measurements.append(("step.{}".format(step.step_name), time.perf_counter() - started))


class StepsLog(Observer):
    """
    Observer which logs which steps were executed
    """

    steps_log: List[str]

    def __init__(self) -> None:
        self.steps_log = []

    def __repr__(self) -> str:
        return "StepsLog({})".format(self.steps_log)

    def record_start(self, step: StepT) -> None:
        self.steps_log.append(step.step_name + "_start")

    def record_end(self, step: StepT) -> None:
        self.steps_log.append(step.step_name + "_end")


class LoggingObserver(Observer):
    """
    Observer which emits one log record per finished step, with its wall time
    """

    def __init__(self, level: int = logging.INFO) -> None:
        self.level = level
        self._started: Dict[int, float] = {}

    def should_record_step(self, step: StepT) -> bool:
        return not getattr(step, "IS_SYSTEM_STEP", False)

    def record_start(self, step: StepT) -> None:
        self._started[id(step)] = time.perf_counter()
        logger.debug("step %s started", step.step_name)

    def record_end(self, step: StepT) -> None:
        elapsed = time.perf_counter() - self._started.pop(id(step), time.perf_counter())
        logger.log(self.level, "step %s finished in %.3fs", step.step_name, elapsed)
