"""Exception types raised across the package."""


class CWSError(Exception):
    """Base class for every error raised by cwsketch."""


class OutOfRangeError(CWSError, IndexError):
    """A sample index fell outside ``0..D``."""


class EmptyInputError(CWSError, ValueError):
    """A sampler was handed a set with no positive weights."""


class DegenerateInputError(CWSError, ValueError):
    """Input collapses to nothing after quantization or configuration."""


class InvalidParameterError(CWSError, ValueError):
    pass


class UndefinedSimilarityError(CWSError, ValueError):
    pass


class IncomparableFingerprintsError(CWSError, ValueError):
    """Fingerprints differ in algorithm, length, seed or sketch parameter."""


class DomainError(CWSError, ValueError):
    pass


class ParseError(CWSError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IncompatibleFormatError(CWSError):
    pass


class IntegrityError(CWSError):
    pass
