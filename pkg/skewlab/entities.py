import abc
from functools import partial
from typing import Any, ClassVar, Dict, List, Type

from pydantic import Field

from skewlab.exceptions import NothingFound, StepNotProperlyConfigured
from skewlab.helpers import initialize
from skewlab.observers import ExecutionTimeObserver, LoggingObserver, StepsLog
from skewlab.types import BaseModelT, ImmutableEvolvableModelT, LedgerT, ObserverT, StepT, T


class ImmutableEvolvableModel(ImmutableEvolvableModelT, abc.ABC):
    def evolve_self(self: BaseModelT, **kwargs: Any) -> BaseModelT:
        return self.model_copy(update=kwargs)


class Ledger(ImmutableEvolvableModel, LedgerT):
    """
    Immutable data container which is both the input and the output of pipeline steps.

    Every step returns a new copy with its result registered under a key; the observers are shared between
    the copies so one run produces one timing table and one steps log.
    """

    NOT_FOUND: ClassVar = object()
    DEFAULT_OBSERVERS_CLASSES: ClassVar = (ExecutionTimeObserver, StepsLog, LoggingObserver)

    data: Dict[str, Any] = Field(default_factory=dict)
    observers: List[ObserverT] = Field(default_factory=partial(initialize, DEFAULT_OBSERVERS_CLASSES))

    def __getitem__(self, key: str) -> Any:
        return self.get(key)

    def __contains__(self, key: str) -> bool:
        return key in self.data

    def get(self, key: str, default: Any = NOT_FOUND) -> Any:
        """
        Get item by ``key``

        :raises NothingFound: If the key is missing and no default is provided
        """
        if key in self.data:
            return self.data[key]
        if default is self.NOT_FOUND:
            raise NothingFound("Key {} is not in the ledger. Present keys: {}".format(key, sorted(self.data)))
        return default

    def register(self, key: str, value: Any, check_if_exists: bool = True) -> "Ledger":
        """
        Register a new value

        :param key: Key of the value
        :param value: Value to store
        :param check_if_exists: Controls whether the method raises an exception if the key is already present
        :return: Copy of itself
        """
        if check_if_exists and key in self.data:
            raise StepNotProperlyConfigured("Key {} is already registered in the ledger".format(key))
        return self.evolve_self(data={**self.data, key: value})

    def evolve(self, **data: Any) -> "Ledger":
        """
        Overwrite or add values
        """
        return self.evolve_self(data={**self.data, **data})

    def get_observer(self, observer_cls: Type[T]) -> T:
        for observer in self.observers:
            if isinstance(observer, observer_cls):
                return observer
        raise NothingFound("Observer {} is not registered".format(observer_cls.__name__))

    def record_start(self, step: StepT) -> "Ledger":
        for observer in self.observers:
            if observer.should_record_step(step):
                observer.record_start(step)
        return self

    def record_end(self, step: StepT) -> "Ledger":
        for observer in self.observers:
            if observer.should_record_step(step):
                observer.record_end(step)
        return self

    @classmethod
    def create(cls, **data: Any) -> "Ledger":
        """
        Create a ledger from keyword arguments
        """
        return cls(data=data)
