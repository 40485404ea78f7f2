"""Exception types shared across the package."""


class AnnoDbError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(AnnoDbError):
    """A database file does not conform to the five-table schema."""


class ReadOnlySessionError(AnnoDbError):
    """A commit or mutation was attempted on a read-only session."""


class PredicateError(AnnoDbError):
    """A user-supplied SQL predicate failed to execute.

    The message carries the underlying query diagnostic.
    """


class MediaError(AnnoDbError):
    """An image or mask file could not be read, decoded, or written."""


class ExportError(AnnoDbError):
    """A record cannot be represented in the requested output format."""
