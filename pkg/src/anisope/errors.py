"""Exception hierarchy shared by all modules."""


class AnisopeError(Exception):
    """Base class for every error raised by the package."""


# domain
class ParityError(AnisopeError):
    pass


class GridMismatch(AnisopeError):
    pass


class OddExtensionMismatch(AnisopeError):
    """Half-domain data for an odd extension does not vanish at z = 0 and z = -h."""


# spectral
class NonZeroMeanError(AnisopeError):
    """Horizontal mean is not zero, so -Delta_H u = f has no periodic solution."""


class NonZeroVerticalMeanError(AnisopeError):
    """Vertical integral is not zero, so the z-antiderivative is not periodic."""


# timestepper
class NumericalFailure(AnisopeError):
    """Carries the time and the last good state of an aborted run."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class StepTooSmall(NumericalFailure):
    pass


class NonFinite(NumericalFailure):
    pass


# inequalities
class DegenerateRHS(AnisopeError):
    pass


# io
class ParseError(AnisopeError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(AnisopeError):
    def __init__(self, field, message=""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field


class HeaderMismatch(AnisopeError):
    pass
