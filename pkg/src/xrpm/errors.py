"""Exception types raised by the model operations."""


class XrpmError(ValueError):
    """Base class for model and scenario errors."""


class ScenarioError(XrpmError):
    """A scenario document could not be parsed into domain types."""


class UnstableQueue(XrpmError):
    """An M/M/1 buffer has service rate not exceeding its arrival rate."""


class NoEdgeConfigured(XrpmError):
    """Remote inference was requested but no edge server is defined."""


class EmptyUpdates(XrpmError):
    """An average was requested over zero AoI samples."""


class DegenerateAoi(XrpmError):
    """Average AoI is non-positive, so RoI is undefined."""


class RankDeficient(XrpmError):
    """The regression design matrix does not have full column rank."""


class InsufficientData(XrpmError):
    """Fewer observations than unknowns in a regression fit."""
