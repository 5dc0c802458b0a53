"""Exception hierarchy shared by every paxlab module."""


class PaxError(Exception):
    """Base class for all library errors."""


class EmptyColumn(PaxError):
    pass


class NotEnoughValues(PaxError):
    pass


class InvalidConfig(PaxError):
    pass


class EncodingOverflow(PaxError):
    pass


class BadMagic(PaxError):
    pass


class TruncatedFile(PaxError):
    pass


class UnsupportedVersion(PaxError):
    pass


class IndexOutOfRange(PaxError, IndexError):
    pass


class InvalidProjection(PaxError):
    pass


class TypeMismatch(PaxError, TypeError):
    pass


class SchemaMismatch(PaxError):
    pass


class InvalidLevels(PaxError):
    pass


class DecodeError(PaxError):
    """Raised when a page cannot be decoded; carries its location."""

    def __init__(self, message, row_group=None, column=None, page=None):
        self.row_group = row_group
        self.column = column
        self.page = page
        where = f" (row group {row_group}, column {column}, page {page})"
        super().__init__(message + where)
