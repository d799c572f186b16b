"""Exception hierarchy shared across the engine."""
from __future__ import annotations


class AgentSearchError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(AgentSearchError):
    pass


# -- core ---------------------------------------------------------------------


class DuplicateActionError(AgentSearchError, ValueError):
    pass


class DepthLimitError(AgentSearchError):
    pass


# -- backends -----------------------------------------------------------------


class BackendError(AgentSearchError):
    pass


class TransportError(BackendError):
    """Network or 5xx failure. Retryable; raised to callers once retries run out."""


class UnsupportedCapability(BackendError):
    pass


class InvalidParams(BackendError, ValueError):
    pass


class MissingFixture(BackendError):
    def __init__(self, role: str, digest: str) -> None:
        super().__init__(f"no fixture for role={role!r} digest={digest}")
        self.role = role
        self.digest = digest


class FixtureError(AgentSearchError):
    """Fixture file could not be parsed or contains duplicate keys."""


# -- agent output parsing -----------------------------------------------------


class AgentOutputError(AgentSearchError):
    pass


class SelectorParseError(AgentOutputError):
    pass


class NoJsonFound(SelectorParseError):
    pass


class EmptySelection(SelectorParseError):
    pass


class UnknownExpert(SelectorParseError):
    def __init__(self, name: str) -> None:
        super().__init__(f"selected expert {name!r} is not among the offered candidates")
        self.name = name


class NoNumberFound(AgentOutputError):
    pass


class PlanParseError(AgentOutputError):
    pass


# -- registries ---------------------------------------------------------------


class RegistryError(AgentSearchError):
    pass


class UnsupportedKind(AgentSearchError):
    pass


# -- scoring ------------------------------------------------------------------


class ScoringError(AgentSearchError):
    pass


class EmptySequence(ScoringError, ValueError):
    pass


class OutOfRange(ScoringError, ValueError):
    def __init__(self, index: int, value: float) -> None:
        super().__init__(f"token probability #{index} = {value!r} is outside (0, 1]")
        self.index = index
        self.value = value


# -- search -------------------------------------------------------------------


class ExpansionError(AgentSearchError):
    pass


class SearchError(AgentSearchError):
    """Every attempted expansion at one depth failed."""


class DatasetError(AgentSearchError):
    pass
