"""Exception types shared across the package."""


class TopowaveError(Exception):
    """Base class for all package-specific errors."""


class MalformedImageError(TopowaveError):
    """Image file has bad magic bytes, a broken header or a truncated payload."""


class UnsupportedBitDepthError(TopowaveError):
    """Image uses a sample format outside the supported 8/16-bit contract."""


class OutOfBoundsError(TopowaveError):
    """A pixel index or patch window falls outside the image."""


class DimensionMismatchError(TopowaveError):
    """Two arrays that must share a shape do not."""


class ImageTooSmallError(TopowaveError):
    """The operation needs a larger image than was given."""
