"""Exception hierarchy shared across the package."""


class ActageError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ActageError):
    """Config file cannot be parsed (bad syntax, bad value, unknown key)."""

    def __init__(self, message, path=None, line=None, key=None):
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append(f"line {line}")
        if key is not None:
            parts.append(f"key '{key}'")
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.key = key


class UnknownKeyError(ConfigError):
    """Config file references a key that does not exist."""


class ValidationError(ActageError):
    """A config violates a hard invariant (see config.validate)."""

    def __init__(self, violations):
        super().__init__("invalid config: " + "; ".join(violations))
        self.violations = list(violations)


class NumericalError(ActageError):
    """A solver failed to produce a trustworthy result."""


class ResourceLimitError(ActageError):
    """A computation would exceed a configured resource cap."""


class EmptyResultError(ActageError):
    """A search produced no usable result (e.g. empty feasible set)."""
