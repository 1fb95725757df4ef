"""Exception types shared across the package."""


class SpecmomError(Exception):
    pass


class NotPsd(SpecmomError):
    """Matrix has a significantly negative eigenvalue."""


class SingularSigma(SpecmomError):
    """Second-moment matrix is too ill-conditioned to whiten."""


class ZeroMatrix(SpecmomError):
    """All rows supplied to the power method are zero."""


class InvalidK(SpecmomError):
    """Block count outside [1, n]."""


class TooFewBlocks(SpecmomError):
    """Pruning needs at least 10 blocks."""


class DimensionMismatch(SpecmomError):
    pass


class Infeasible(SpecmomError):
    """Capped simplex is empty (cap * K' < 1)."""


class SingularGram(SpecmomError):
    """Normal equations are singular."""


class NoConsensus(SpecmomError):
    """No RANSAC trial produced a large enough inlier set."""


class DirectionSearchFailed(SpecmomError):
    """Direction search failed twice at a certified margin."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
