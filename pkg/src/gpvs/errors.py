"""Exception types shared across the package."""


class GpvsError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVectorError(GpvsError):
    """A vector with (near-)zero norm cannot be normalized or stored."""


class DimensionMismatchError(GpvsError):
    """Two vectors, or a vector and a store, disagree on dimensionality."""


class EmptyVideoError(GpvsError):
    """A video with zero frames was offered to the store builder."""


class BadMagicError(GpvsError):
    """The file does not start with the store magic bytes."""


class VersionUnsupportedError(GpvsError):
    """The store declares a format version this code does not read."""


class CorruptManifestError(GpvsError):
    """Store file and manifest disagree, or either is damaged."""


class UnknownGameError(GpvsError):
    """A game filter names a game absent from the store manifest."""


class EmbedderUnavailableError(GpvsError):
    """The configured embedder cannot be reached or failed to encode."""
