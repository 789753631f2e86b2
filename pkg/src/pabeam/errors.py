"""Error taxonomy shared by the library, the service, and the CLI."""


class PabeamError(Exception):
    """Base class for all pabeam errors."""

    kind = "data"
    exit_code = 2


class UsageError(PabeamError):
    """Invalid parameters, flags, or configuration (CLI exit code 1)."""

    kind = "usage"
    exit_code = 1


class DataError(PabeamError):
    """Inconsistent or degenerate input data (CLI exit code 2)."""

    kind = "data"
    exit_code = 2
