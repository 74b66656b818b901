"""Exception types shared across the package."""


class DcfeError(Exception):
    """Base class for every error raised by jpegdrm."""


class FormatError(DcfeError, ValueError):
    """Malformed input bytes (PPM, JPEG, key file, registry)."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(FormatError):
    """Well-formed JPEG that uses a coding mode outside the baseline subset."""


class JpegDecodeError(FormatError):
    """Corrupt entropy-coded data."""


class CodingRangeError(DcfeError, ValueError):
    """A coefficient cannot be represented by baseline Huffman categories."""

    def __init__(self, message, block_index=None):
        super().__init__(message)
        self.block_index = block_index


class PreconditionError(DcfeError, ValueError):
    """Input violates the arithmetic preconditions of scrambling/decoding."""


class KeyAlignmentError(DcfeError):
    """Key material does not line up with the image's blocks."""


class WrongContentError(DcfeError):
    """A key or registry is bound to a different image."""


class ConflictError(DcfeError):
    """Duplicate user registration."""


class IntegrityError(DcfeError):
    """Registry invariant broken (e.g. two users with the same reference hash)."""
