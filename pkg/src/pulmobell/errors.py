"""Exception types shared across the package."""


class PulmobellError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(PulmobellError, ValueError):
    """An argument or configuration value is out of its allowed range."""


class WindowError(PulmobellError, ValueError):
    """A PPG window is too short for the requested estimator."""


class InputOrderError(PulmobellError, ValueError):
    """Samples arrived with non-monotonic timestamps."""


class EncodeError(PulmobellError, ValueError):
    """A message cannot be serialized (oversize payload or bad field value)."""


class ParseError(PulmobellError, ValueError):
    """A payload does not match its declared layout."""


class UnknownTypeError(ParseError):
    """The msg_type byte does not name a known message."""


class ScenarioError(PulmobellError, ValueError):
    """A scenario document is malformed or fails validation."""


class SteeringError(PulmobellError, ValueError):
    """A live steering change was rejected; simulator state unchanged."""


class ValidationError(PulmobellError, ValueError):
    """A domain object (regimen, profile) fails its invariants."""


class StorageError(PulmobellError, RuntimeError):
    """The session store could not read or write its backing files."""


class NotFoundError(PulmobellError, LookupError):
    """No session with the given id exists."""


class RejectedError(PulmobellError):
    """A device connection or append targeted a closed/unbound session."""


class DeviceUnavailableError(PulmobellError):
    """A command was submitted but no device connection is bound."""


class LogError(PulmobellError, ValueError):
    """An event log is malformed (e.g. does not begin with SessionStart)."""


class TransportError(PulmobellError, RuntimeError):
    """The byte-stream transport failed mid-run."""
