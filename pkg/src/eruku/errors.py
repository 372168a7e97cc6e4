"""Exception types shared across the package."""


class ErukuError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(ErukuError):
    """An argument violates a documented precondition."""


class DecodeError(ErukuError):
    """A byte sequence cannot be decoded back to text."""


class ShapeError(ErukuError):
    """An array has a shape incompatible with the operation."""


class UnsupportedGlyph(ErukuError):
    """A character has no stroke program in the font."""


class EmptyGeneration(ErukuError):
    """Generation produced zero image columns."""


class CtcInfeasible(ErukuError):
    """The label sequence cannot be aligned to the available frames."""


class CheckpointError(ErukuError):
    """A checkpoint file is malformed or has unexpected contents."""
