"""Exception hierarchy shared by all modules."""


class InterfaceLabError(Exception):
    """Base class for every error raised by the package."""


# lattice
class IncommensurateFlux(InterfaceLabError):
    pass


class RangeTooLarge(InterfaceLabError):
    pass


class GapClosed(InterfaceLabError):
    pass


class StripTooWide(InterfaceLabError):
    pass


class SupportOverlap(InterfaceLabError):
    pass


# spectral
class EmptyInterval(InterfaceLabError):
    pass


class EigensolveFailure(InterfaceLabError):
    pass


class EigenvalueAtFermiLevel(InterfaceLabError):
    pass


class GapViolated(InterfaceLabError):
    def __init__(self, message, eigenvalue=None, which=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.which = which


# topology
class NonUnitaryInput(InterfaceLabError):
    pass


class LeakageAtBoundary(InterfaceLabError):
    def __init__(self, message, leakage=None):
        super().__init__(message)
        self.leakage = leakage


class WindowTooSmall(InterfaceLabError):
    pass


class GapClosedOnGrid(InterfaceLabError):
    pass


class SpectralObstruction(InterfaceLabError):
    pass


# interface / harness
class VerdictChange(InterfaceLabError, UserWarning):
    """Integer verdict differs along a homotopy; issued as a warning."""


class SchemaError(InterfaceLabError):
    def __init__(self, message, path=()):
        where = "/".join(str(p) for p in path) or "<root>"
        super().__init__(f"{where}: {message}")
        self.path = tuple(path)


class UnknownModel(InterfaceLabError):
    pass


class SampleFailure(InterfaceLabError):
    """A per-sample computation failed; carries the sample seed."""

    def __init__(self, seed, cause):
        super().__init__(f"sample with seed {seed} failed: {cause!r}")
        self.seed = seed
        self.cause = cause
