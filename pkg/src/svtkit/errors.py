"""Exception types shared across the toolkit."""


class ShapeError(ValueError):
    """Dimension mismatch between matrices/vectors in a product chain."""


class ParseError(ValueError):
    """Malformed text input; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SizeError(ValueError):
    """Problem exceeds a documented dense/materialization cap."""


class ConfigError(ValueError):
    """Estimator or decision configuration violates a precondition."""


class ConstructionError(RuntimeError):
    """A certified construction (polynomial, sampler) failed its certificate."""


class InvalidSamplerError(RuntimeError):
    """A sampler emitted an index whose entry is zero."""


class InconsistencyError(RuntimeError):
    """Randomized sub-decisions produced an impossible outcome pattern."""
