"""Exception types shared across the package."""


class TorilabError(Exception):
    """Base class for every error raised by torilab."""


class NonSymmetric(TorilabError):
    pass


class NotPositiveDefinite(TorilabError):
    pass


class NotComplexLinear(TorilabError):
    """Integer matrix does not commute with the complex structure."""


class TolOutOfRange(TorilabError):
    pass


class SingularPoint(TorilabError):
    pass


class SamplingExhausted(TorilabError):
    pass


class ModulusOverflow(TorilabError):
    pass


class GridOverflow(TorilabError):
    pass


class ParseError(TorilabError):
    pass


class ValidationError(TorilabError):
    pass


class GridTooCoarse(UserWarning):
    """Fewer roots were found than the cohomological count predicts."""
