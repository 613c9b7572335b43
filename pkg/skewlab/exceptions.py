from typing import Optional


class LabError(Exception):
    def __init__(self, message: str = "", reason: Optional[str] = None, step: Optional[object] = None):
        super().__init__(message)
        self.reason = reason
        self.step = step
        self.message = message

    def __str__(self) -> str:
        if self.reason is not None and self.step is not None:
            return "{}: {}: {}: {}".format(self.__class__.__name__, self.step.__class__.__name__, self.reason, self.message)
        if self.reason is not None:
            return "{}: {}: {}".format(self.__class__.__name__, self.reason, self.message)
        return "{}: {}".format(self.__class__.__name__, self.message)


class InvalidInput(LabError):
    pass


class NotAnosov(InvalidInput):
    pass


class InvalidBase(InvalidInput):
    pass


class InvalidRates(InvalidInput):
    pass


class DegenerateSamples(InvalidInput):
    pass


class ScenarioError(InvalidInput):
    pass


##
class SearchRadiusExhausted(LabError):
    pass


class BoundExceeded(LabError):
    pass


class BudgetExceeded(LabError):
    pass


class NonConvergence(LabError):
    pass


##
class JetError(LabError):
    pass


class DimensionMismatch(JetError):
    pass


class SingularJet(JetError):
    pass


class GraphTransformUndefined(JetError):
    pass


##
class InterpolationError(LabError):
    pass


class SingularSystem(InterpolationError):
    pass


class GridDegenerate(InterpolationError):
    pass


class DomainExhausted(LabError):
    pass


class ResolutionExhausted(DomainExhausted):
    pass


##
class NothingFound(LabError):
    pass


class StepNotProperlyConfigured(RuntimeError):
    pass
