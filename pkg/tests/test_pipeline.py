from typing import Optional

import pytest
from typing_extensions import Annotated

from skewlab.entities import Ledger
from skewlab.exceptions import InvalidInput, NothingFound, StepNotProperlyConfigured
from skewlab.observers import ExecutionTimeObserver, StepsLog
from skewlab.pipeline import Step, StepSet, TypedStep, record_step, run_pipeline
from skewlab.types import LedgerT


class Increment(TypedStep[int]):
    def __call__(self, x: int, by: int = 1) -> Annotated[int, "x"]:
        return x + by


class Fail(TypedStep[None]):
    def __call__(self, x: int) -> None:
        raise InvalidInput("x = {} is not accepted".format(x))


def test_ledger_register_and_get() -> None:
    ledger = Ledger.create(a=1).register("b", 2)

    assert 1 == ledger["a"]
    assert 2 == ledger.get("b")
    assert "b" in ledger
    assert None is ledger.get("c", None)
    with pytest.raises(NothingFound):
        ledger.get("c")
    with pytest.raises(StepNotProperlyConfigured):
        ledger.register("a", 3)
    assert 3 == ledger.register("a", 3, check_if_exists=False)["a"]


def test_ledger_is_immutable_between_steps() -> None:
    ledger = Ledger.create(x=1)

    result = Increment().run(ledger)

    assert 1 == ledger["x"]
    assert 2 == result["x"]


def test_typed_step_reads_params_and_registers_output(double_typed_step) -> None:
    ledger = double_typed_step.run(Ledger.create(x=21, y=0))

    assert 42 == ledger.get("double")
    assert 21 == ledger.get("x")


def test_typed_step_uses_defaults() -> None:
    assert 11 == Increment().run(Ledger.create(x=10))["x"]
    assert 15 == Increment().run(Ledger.create(x=10, by=5))["x"]


def test_typed_step_missing_input() -> None:
    with pytest.raises(NothingFound):
        Increment().run(Ledger.create(by=5))


def test_step_without_output_key() -> None:
    class Noop(TypedStep[Optional[int]]):
        def __call__(self, x: int) -> Optional[int]:
            return None

    assert {"x": 1} == Noop().run(Ledger.create(x=1)).data


def test_step_set_chains(double_typed_step) -> None:
    pipeline = Increment() >> Increment() >> double_typed_step

    ledger = pipeline.run(Ledger.create(x=1))

    assert isinstance(pipeline, StepSet)
    assert 3 == ledger["x"]
    assert 6 == ledger["double"]
    assert "Increment >> Increment >> Double" == pipeline.step_name


def test_observers_record_steps() -> None:
    ledger = (Increment() >> Increment(name="second")).run(Ledger.create(x=1))

    steps_log = ledger.get_observer(StepsLog).steps_log
    assert "Increment_start" == steps_log[1]
    assert "second_end" == steps_log[-2]
    assert ["step.Increment", "step.second"] == [name for name, _ in ledger.get_observer(ExecutionTimeObserver).measurements]


def test_run_pipeline() -> None:
    assert 5 == run_pipeline(Increment(), x=4).unwrap()["x"]

    failure = run_pipeline(Increment() >> Fail(), x=4).failure()

    assert isinstance(failure, InvalidInput)
    assert "x = 5 is not accepted" in str(failure)


def test_verbose_errors(with_verbose_errors) -> None:
    with pytest.raises(InvalidInput) as err:
        (Increment() >> Fail()).run(Ledger.create(x=1))

    message = str(err.value)
    assert 1 == message.count("Step context")
    assert "Fail" in message
    assert "Increment_end" in message


def test_plain_errors_without_verbose_mode() -> None:
    with pytest.raises(InvalidInput) as err:
        Fail().run(Ledger.create(x=1))

    assert "Step context" not in str(err.value)


def test_step_must_return_ledger() -> None:
    class Broken(Step):
        @record_step
        def run(self, ledger: LedgerT) -> LedgerT:
            return "not a ledger"  # type: ignore[return-value]

    with pytest.raises(StepNotProperlyConfigured):
        Broken().run(Ledger.create(x=1))
