"""Exception hierarchy shared by every brainsym module."""


class BrainsymError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(BrainsymError, ValueError):
    """A parameter violates an operation's precondition."""


class NetpbmError(BrainsymError, ValueError):
    """A PGM/PPM file could not be parsed.

    ``field`` names the offending header/payload element
    ('magic', 'width', 'height', 'maxval', 'payload').
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class GeometryError(BrainsymError, RuntimeError):
    """The image geometry does not support the requested analysis
    (flat image, too few midpoint samples, ...)."""


class SingularSystemError(GeometryError):
    """A linear system is singular within tolerance."""


class PipelineError(BrainsymError, RuntimeError):
    """A detection pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
