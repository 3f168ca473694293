"""Exception hierarchy shared by every module."""


class FoldCycleError(Exception):
    """Base class for all library errors."""


class NoConvergence(FoldCycleError):
    pass


class AssumptionViolated(FoldCycleError):
    pass


class DomainError(FoldCycleError, ValueError):
    pass


class BracketError(FoldCycleError, ValueError):
    pass


class NoBracket(BracketError):
    pass


class StepUnderflow(FoldCycleError):
    pass


class MaxSteps(FoldCycleError):
    pass


class NoEvent(FoldCycleError):
    pass


class DegenerateInput(FoldCycleError, ValueError):
    pass


class ConfigError(FoldCycleError, ValueError):
    """Malformed configuration file or flag."""
