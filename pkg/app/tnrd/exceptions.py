""" Error kinds raised by the diffusion engine."""


class InvalidArgumentError(ValueError):
    """ Argument outside of the operation's domain (bad sizes, ranges, dimensions)."""


class DegenerateFilterError(InvalidArgumentError):
    """ Filter coefficient vector with (almost) zero norm."""


class ProblemMismatchError(InvalidArgumentError):
    """ Model, observation and problem kind don't fit together."""


class NumericalRankError(ArithmeticError):
    """ Least-squares system without full column rank."""


class ImageFormatError(ValueError):
    """ Malformed or unsupported image file."""


class ModelFormatError(ValueError):
    """ Malformed or unsupported model file."""


class OptimizationError(RuntimeError):
    """ Optimizer met a non-finite objective or gradient."""
