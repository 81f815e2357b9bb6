"""Exception hierarchy shared by all bzl modules."""


class BzlError(Exception):
    """Base class for every error raised by the package."""


class NonFinite(BzlError):
    pass


class NotRadial(BzlError):
    pass


class NoBracketing(BzlError):
    pass


class EmptyGrid(BzlError):
    pass


class InvalidSize(BzlError):
    pass


class GrowthUnverified(BzlError):
    pass


class DivergentTail(BzlError):
    pass


class NotPositiveDefinite(BzlError):
    pass


class IllConditioned(BzlError):
    def __init__(self, cond_estimate, message=None):
        self.cond_estimate = float(cond_estimate)
        super().__init__(message or f"condition estimate {self.cond_estimate:.3e} exceeds ceiling")


class DegenerateDiagonal(BzlError):
    pass


class OutsideBulk(BzlError):
    pass


class FrameInvalid(BzlError):
    pass


class InsufficientPoints(BzlError):
    pass


class ZeroPolynomial(BzlError):
    pass


class NonConvergent(BzlError):
    pass


class NodeOnZero(BzlError):
    pass


class SupportOutsideBulk(BzlError):
    pass


class DegenerateVariance(BzlError):
    pass


class DegenerateSample(BzlError):
    pass


class ZeroPsi(BzlError):
    pass


class ConfigParse(BzlError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
