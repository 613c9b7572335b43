from __future__ import annotations

import inspect
import json
import logging
import sys
from abc import ABC, abstractmethod
from functools import wraps
from typing import Any, Callable, Dict, Generic, Iterable, NoReturn, Optional, Tuple, get_type_hints

from returns.result import Result, safe

from skewlab import config
from skewlab.entities import Ledger
from skewlab.exceptions import LabError, NothingFound, StepNotProperlyConfigured
from skewlab.helpers import extract_type
from skewlab.observers import StepsLog
from skewlab.types import LedgerT, StepT, T

logger = logging.getLogger(__name__)


class Step(StepT, ABC):
    """
    Fundamental unit of a pipeline: it receives the :class:`~skewlab.entities.Ledger`, does one piece of work and
    passes an updated copy to the next step.
    """

    DESCRIPTION: str = ""
    NAME: str = ""
    IS_SYSTEM_STEP: bool = False

    def __init__(self, description: Optional[str] = None, name: Optional[str] = None):
        """
        :param description: Description of the step, used in error messages only
        :param name: Name shown in logs, defaults to the class name
        """
        self.description = description or self.DESCRIPTION
        self.name = name or self.NAME or self.__class__.__name__

    @abstractmethod
    def run(self, ledger: LedgerT) -> LedgerT:
        pass

    def then(self, another_step: StepT) -> StepT:
        """
        Chain another step after this one. ``Step1() >> Step2()`` is the same thing.
        """
        return StepSet([self, another_step])

    def __rshift__(self, other: StepT) -> StepT:
        return self.then(other)

    @property
    def step_name(self) -> str:
        return self.name or self.__class__.__name__


def record_step(fu: Callable[[Any, LedgerT], LedgerT]) -> Callable[[Any, LedgerT], LedgerT]:
    """
    Decorator for :func:`~Step.run` which notifies the ledger observers about start and end of the step
    """

    @wraps(fu)
    def wrapper(step: Step, ledger: LedgerT) -> LedgerT:
        if not isinstance(ledger, Ledger):
            raise StepNotProperlyConfigured(
                "Input argument of {} must be of type Ledger, but got {}".format(step.step_name, type(ledger))
            )
        result = fu(step, ledger.record_start(step))
        if not isinstance(result, Ledger):
            raise StepNotProperlyConfigured(
                "Output of {} must be of type Ledger, but got {}".format(step.step_name, type(result))
            )
        return result.record_end(step)

    return wrapper


def verbose_step_exception(fu: Callable[[Any, LedgerT], LedgerT]) -> Callable[[Any, LedgerT], LedgerT]:
    """
    Decorator which adds the steps history and the ledger keys to errors raised during step execution
    (only when ``VERBOSE_ERRORS`` is enabled).
    """

    @wraps(fu)
    def wrapper(step: Step, ledger: LedgerT) -> LedgerT:
        try:
            return fu(step, ledger)
        except Exception as err:
            _raise_new_error(step=step, err=err, ledger=ledger)

    return wrapper


def _raise_new_error(step: Step, err: Exception, ledger: LedgerT) -> NoReturn:
    if config.VERBOSE_ERRORS and (len(err.args) == 0 or "Step context" not in str(err.args[0])):
        try:
            history = ledger.get_observer(StepsLog).steps_log  # type: ignore[attr-defined]
        except NothingFound:
            history = []
        fields = [
            ("Steps history", json.dumps(history, indent=4)),
            ("Ledger keys", json.dumps(sorted(ledger.data), indent=4)),
        ]
        context_message = "\n".join("{}: {}".format(name, value) for name, value in fields)
        msg = "{0}\n{1} Step context {1} {2}\n{3}".format(str(err).strip(), "-" * 20, step.step_name, context_message)
        try:
            raise err.__class__(msg).with_traceback(sys.exc_info()[2]) from err
        except TypeError:
            raise LabError(msg, step=step) from err
    raise err


class StepSet(Step):
    """
    Set of steps which are executed consequently
    """

    IS_SYSTEM_STEP = True

    def __init__(self, steps: Optional[Iterable[StepT]] = None, description: Optional[str] = None, name: Optional[str] = None):
        self.steps = list(steps or [])
        super().__init__(description=description, name=name or " >> ".join(s.step_name for s in self.steps))

    def then(self, another_step: StepT) -> StepT:
        return StepSet([*self.steps, another_step])

    @record_step
    @verbose_step_exception
    def run(self, ledger: LedgerT) -> LedgerT:
        for step in self.steps:
            ledger = step.run(ledger)
        return ledger


class TypedStep(Generic[T], Step, ABC):
    """
    Step whose work lives in ``__call__`` with ordinary parameters.

    Parameters are looked up in the ledger by name (parameter defaults are used for missing keys) and the result
    is registered under the name given by the ``Annotated[<type>, <key>]`` return annotation. Steps whose return
    annotation has no key do not register anything.
    """

    __call__: Callable[..., T]

    def __init__(self, description: Optional[str] = None, name: Optional[str] = None, output: Optional[str] = None):
        super().__init__(description=description, name=name)
        self.inputs, default_output = self._get_implicit_config()
        self.output = output or default_output

    def get_input_params(self, ledger: LedgerT) -> Dict[str, Any]:
        params = {}
        for key, default in self.inputs.items():
            if default is inspect.Parameter.empty:
                params[key] = ledger.get(key)
            else:
                params[key] = ledger.get(key, default)
        return params

    @record_step
    @verbose_step_exception
    def run(self, ledger: LedgerT) -> LedgerT:
        result = self(**self.get_input_params(ledger))
        if self.output:
            return ledger.evolve(**{self.output: result})
        return ledger

    @classmethod
    def _get_implicit_config(cls) -> Tuple[Dict[str, Any], Optional[str]]:
        hints = get_type_hints(cls.__call__, include_extras=True)
        _, return_name = extract_type(hints.get("return"))
        parameters = inspect.signature(cls.__call__).parameters
        inputs = {key: parameters[key].default for key in parameters if key != "self"}
        return inputs, return_name


def run_pipeline(pipeline: StepT, **data: Any) -> Result[LedgerT, Exception]:
    """
    Run ``pipeline`` on a fresh ledger and capture any raised exception in a ``Failure``.
    """
    return safe(pipeline.run)(Ledger.create(**data))
