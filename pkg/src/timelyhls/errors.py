"""Exception hierarchy shared by all timelyhls modules."""


class TimelyHlsError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(TimelyHlsError):
    """Missing or unusable configuration input (paths, config files)."""


class ValidationError(TimelyHlsError):
    """Input data violates a structural invariant (duplicate ids, bad fields)."""


class ParseError(TimelyHlsError):
    """Text could not be parsed: malformed pragma, report, or source."""


class NotFound(TimelyHlsError):
    """A referenced entity (doc id, benchmark, part) does not exist."""


class ConflictError(TimelyHlsError):
    """An edit would collide with an existing directive at the same anchor."""


class MappingError(TimelyHlsError):
    """A pragma references a loop or array the kernel model does not have."""


class ContractError(TimelyHlsError):
    """A caller violated an operation precondition."""


class BackendError(TimelyHlsError):
    """Generation backend failed after exhausting its retries."""


class ScriptExhausted(BackendError):
    """Scripted backend has no queued response left for the requested stage."""


class ExtractionError(TimelyHlsError):
    """No code could be extracted from a generation response."""


class ToolMissing(TimelyHlsError):
    """An external toolchain command is not installed or not on PATH."""


class ToolTimeout(TimelyHlsError):
    """An external toolchain command exceeded its configured timeout."""


class VersionError(TimelyHlsError):
    """A persisted file has an unsupported or missing schema version."""
