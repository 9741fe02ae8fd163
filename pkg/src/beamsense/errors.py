"""Exception hierarchy shared by all beamsense modules."""


class BeamSenseError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BeamSenseError, ValueError):
    """An argument lies outside the domain of the operation."""

    def __init__(self, message, step_index=None):
        if step_index is not None:
            message = f"step {step_index}: {message}"
        super().__init__(message)
        self.step_index = step_index


class BoundsError(BeamSenseError, IndexError):
    """A sector index lies outside the sector grid."""


class FormatError(BeamSenseError, ValueError):
    """Malformed input data (trace, route or config file)."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.path = path


class ConfigError(BeamSenseError, ValueError):
    """Invalid scenario or run configuration."""


class StateError(BeamSenseError, RuntimeError):
    """An object is not in a state that permits the requested operation."""
