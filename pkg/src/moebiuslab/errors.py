"""Exception hierarchy shared by all modules."""


class MoebiusLabError(Exception):
    """Base class for every error raised by the package."""


class PointOutsideDomain(MoebiusLabError):
    pass


class RankDeficient(MoebiusLabError):
    """The differential of the immersion does not have full rank at the point."""


class StepTooLarge(MoebiusLabError):
    """A finite-difference stencil leaves the chart domain."""


class UmbilicPoint(MoebiusLabError):
    """rho^2 fell below the umbilic threshold; Moebius invariants are undefined."""


class DegenerateSpectrum(MoebiusLabError):
    """All Moebius principal curvatures collapsed into a single cluster."""


class IndeterminateSpectrum(MoebiusLabError):
    """Eigenvalue clusters are not separated well enough to be trusted."""


class NonRealMu(MoebiusLabError):
    """The radicand defining mu is not positive."""


class ParamOutOfRange(MoebiusLabError):
    pass


class SurfaceModelMismatch(MoebiusLabError):
    """A surface lives in the wrong space form for the requested construction."""


class IntegratorStepTooLarge(MoebiusLabError):
    pass


class UnknownCatalogEntry(MoebiusLabError):
    pass


class InsufficientSamples(MoebiusLabError):
    pass


class SpecFileError(MoebiusLabError):
    pass
