from abc import ABC, abstractmethod
from typing import Any, ClassVar, Dict, List, Tuple, TypeVar, Union

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict

T = TypeVar("T")
BaseModelT = TypeVar("BaseModelT", bound=BaseModel)
StepVar = TypeVar("StepVar", bound="StepT")

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
RealPair = Union[Tuple[float, float], FloatArray]
AnnotationNameT = str


class ImmutableEvolvableModelT(BaseModel, ABC):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @abstractmethod
    def evolve_self(self: T, **kwargs: Any) -> T:
        pass


class ObserverT(ABC):
    @abstractmethod
    def should_record_step(self, step: "StepT") -> bool:
        pass

    @abstractmethod
    def record_start(self, step: "StepT") -> None:
        pass

    @abstractmethod
    def record_end(self, step: "StepT") -> None:
        pass


class LedgerT(ImmutableEvolvableModelT, ABC):
    NOT_FOUND: ClassVar = object()

    data: Dict[str, Any]
    observers: List[ObserverT]

    @abstractmethod
    def get(self, key: str, default: Any = NOT_FOUND) -> Any:
        pass

    @abstractmethod
    def register(self, key: str, value: Any, check_if_exists: bool = True) -> "LedgerT":
        pass

    @abstractmethod
    def evolve(self, **data: Any) -> "LedgerT":
        pass

    @abstractmethod
    def record_start(self, step: "StepT") -> "LedgerT":
        pass

    @abstractmethod
    def record_end(self, step: "StepT") -> "LedgerT":
        pass


class StepT(ABC):
    description: str
    name: str

    @abstractmethod
    def run(self, ledger: LedgerT) -> LedgerT:
        pass

    @abstractmethod
    def then(self, another_step: "StepT") -> "StepT":
        pass

    @abstractmethod
    def __rshift__(self, other: "StepT") -> "StepT":
        pass

    @property
    @abstractmethod
    def step_name(self) -> str:
        pass
