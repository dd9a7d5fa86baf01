"""Exception hierarchy shared by every tailcert module."""


class TailcertError(Exception):
    """Base class for all errors raised by tailcert."""


class UnsupportedInputError(TailcertError, ValueError):
    """Input that cannot be handled exactly (e.g. a float weight)."""


class ResourceLimitError(TailcertError):
    """A configured enumeration, memory or box budget would be exceeded."""


class ChecksumError(TailcertError):
    """A persisted table does not match its recorded checksum."""


class TableVersionError(TailcertError):
    """A persisted table has the wrong format version or grid parameters."""


class CertificateError(TailcertError):
    """A certificate's hypotheses do not hold."""
