"""Exception hierarchy shared by every module of the package."""


class FinslerError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FinslerError, ValueError):
    """A primitive or a Lagrangian was evaluated outside its domain."""

    def __init__(self, primitive, value=None, detail=""):
        self.primitive = primitive
        self.value = value
        msg = f"domain violation in {primitive}"
        if value is not None:
            msg += f" at argument {value!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NonPositiveLambda(DomainError):
    def __init__(self, x, value):
        self.x = tuple(float(c) for c in x)
        super().__init__("lambda", value, f"Lambda(x) must be > 0, x={self.x}")


class OutsideCone(FinslerError, ValueError):
    def __init__(self, w, cone=None):
        self.w = tuple(float(c) for c in w)
        kind = getattr(cone, "kind", None)
        super().__init__(f"vector {self.w} is not in the cone {kind}")


class UnknownZooEntry(FinslerError, KeyError):
    def __str__(self):
        return f"unknown zoo entry {self.args[0]!r}"


class ParamOutOfRange(FinslerError, ValueError):
    pass


class ExpressionError(FinslerError, ValueError):
    def __init__(self, message, text="", column=None):
        self.column = column
        self.text = text
        if column is not None:
            message = f"{message} (column {column}): {text!r}"
        super().__init__(message)


class ConfigError(FinslerError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)


class HypothesisViolated(FinslerError):
    def __init__(self, hypothesis, detail=""):
        self.hypothesis = hypothesis
        super().__init__(f"hypothesis violated: {hypothesis}" + (f" ({detail})" if detail else ""))


class InconsistentClassification(FinslerError):
    pass


class NotDifferentiableAtK(FinslerError):
    pass


class IntegrationError(FinslerError):
    """Base for failures of an ODE run; carries the parameter where it stopped."""

    def __init__(self, s, message=""):
        self.s = s
        super().__init__(f"{type(self).__name__} at s={s:.6g}" + (f": {message}" if message else ""))


class ConeExit(IntegrationError):
    pass


class IllConditionedHessian(IntegrationError):
    pass


class StepFailure(IntegrationError):
    pass


class ChartExit(StepFailure):
    pass


class FlowEscape(IntegrationError):
    pass


class NewtonDivergence(FinslerError):
    pass


class NoConvergence(FinslerError):
    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class OutOfBox(FinslerError, ValueError):
    pass


class ZeroVector(FinslerError, ValueError):
    pass


class ZeroVelocity(FinslerError, ValueError):
    pass


class NoData(FinslerError, ValueError):
    pass
