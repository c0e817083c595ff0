"""Exception types shared across the toolkit.

The CLI maps these onto exit codes (config 2, data 3, state 4, numerical 5).
"""


class TopicModelError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TopicModelError):
    """Invalid or inconsistent configuration."""


class DataError(TopicModelError):
    """Unreadable, malformed, or empty input data."""


class StateMismatchError(TopicModelError):
    """Artifacts that must refer to the same corpus do not."""


class NumericalError(TopicModelError):
    """A numerical routine failed beyond what regularization can absorb."""
