"""Domain types shared across the engine.

Nothing in here performs I/O or talks to a model. Every type is a frozen
dataclass so nodes and plans can be handed to concurrent expansion workers
without copying.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence, Union

from .errors import ConfigError, DuplicateActionError

ACTION_KEY_SEPARATOR = "+"


class Modality(str, enum.Enum):
    TEXT = "text"
    IMAGE = "image"
    AUDIO = "audio"
    VIDEO = "video"

    @classmethod
    def parse(cls, value: str | Modality) -> Modality:
        if isinstance(value, Modality):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown modality {value!r}") from None


MEDIA_MODALITIES = (Modality.IMAGE, Modality.VIDEO, Modality.AUDIO)


class TaskMode(str, enum.Enum):
    REASONING = "reasoning"
    GENERATION = "generation"


@dataclass(frozen=True, order=True)
class TaskKind:
    mode: TaskMode
    modality: Modality

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", TaskMode(self.mode))
        object.__setattr__(self, "modality", Modality.parse(self.modality))

    @classmethod
    def reasoning(cls, modality: Modality | str) -> TaskKind:
        return cls(TaskMode.REASONING, Modality.parse(modality))

    @classmethod
    def generation(cls, modality: Modality | str) -> TaskKind:
        return cls(TaskMode.GENERATION, Modality.parse(modality))

    @classmethod
    def parse(cls, text: str) -> TaskKind:
        """Parse ``"reasoning:image"`` style labels."""
        mode, _, modality = text.partition(":")
        try:
            return cls(TaskMode(mode.strip().lower()), Modality.parse(modality))
        except ValueError:
            raise ValueError(f"unknown task kind {text!r}") from None

    @property
    def is_reasoning(self) -> bool:
        return self.mode is TaskMode.REASONING

    @property
    def is_generation(self) -> bool:
        return self.mode is TaskMode.GENERATION

    def __str__(self) -> str:
        return f"{self.mode.value}:{self.modality.value}"


@dataclass(frozen=True)
class MediaRef:
    """Opaque handle to an artifact in the run's store."""

    id: str
    modality: Modality
    uri: str  # relative, content-addressed path inside the artifact store
    meta: dict[str, str] = field(default_factory=dict, compare=True, hash=False)

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "modality": self.modality.value, "uri": self.uri, "meta": dict(self.meta)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MediaRef:
        return cls(
            id=str(data["id"]),
            modality=Modality.parse(data["modality"]),
            uri=str(data["uri"]),
            meta={str(k): str(v) for k, v in (data.get("meta") or {}).items()},
        )


@dataclass(frozen=True)
class ScoreValue:
    """A confidence in [0, 1].

    Out-of-range inputs are clamped rather than rejected; ``clamped`` records
    that it happened so the trace can show it.
    """

    value: float
    clamped: bool = False

    def __post_init__(self) -> None:
        v = float(self.value)
        if math.isnan(v):
            raise ValueError("score cannot be NaN")
        if v < 0.0 or v > 1.0:
            object.__setattr__(self, "value", min(1.0, max(0.0, v)))
            object.__setattr__(self, "clamped", True)
        else:
            object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


AuxPayload = Union[str, MediaRef]


@dataclass(frozen=True)
class AuxiliaryItem:
    source_action: str
    payload: AuxPayload


@dataclass(frozen=True)
class ReasoningNodeContent:
    media: tuple[MediaRef, ...]
    question: str
    auxiliary_items: tuple[AuxiliaryItem, ...] = ()
    node_answer: str = ""

    def with_item(self, item: AuxiliaryItem, answer: str) -> ReasoningNodeContent:
        return ReasoningNodeContent(self.media, self.question, self.auxiliary_items + (item,), answer)


@dataclass(frozen=True)
class GenerationNodeContent:
    original_prompt: str
    node_prompt: str
    node_answer: MediaRef
    judgement: str
    scorer_error: bool = False  # Scorer output was unreadable twice; score forced to 0


NodeContent = Union[ReasoningNodeContent, GenerationNodeContent]


def node_depth(node: SearchNode) -> int:
    return len(node.actions)


def action_set_key(actions: Iterable[str]) -> str:
    """Order-insensitive key for an action history.

    Two histories with the same set of actions map to the same key; the empty
    history maps to ``""``, which no non-empty history can produce.
    """
    names = list(actions)
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise DuplicateActionError(f"duplicate actions in history: {dupes}")
    for name in names:
        if not name or ACTION_KEY_SEPARATOR in name:
            raise ValueError(f"invalid action name {name!r}")
    return ACTION_KEY_SEPARATOR.join(sorted(names))


@dataclass(frozen=True)
class SearchNode:
    id: str
    content: NodeContent
    score: ScoreValue
    actions: tuple[str, ...] = ()
    parent: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(self.actions))
        action_set_key(self.actions)  # rejects duplicates

    @property
    def depth(self) -> int:
        return node_depth(self)

    @property
    def key(self) -> str:
        return action_set_key(self.actions)

    @property
    def last_action(self) -> str | None:
        return self.actions[-1] if self.actions else None


def child_id(parent_id: str, actions: Sequence[str]) -> str:
    """Node ids are ``<search scope>/<action-set key>``; unique because keys are deduplicated."""
    scope = parent_id.split("/", 1)[0]
    return f"{scope}/{action_set_key(actions)}"


def derive_child(parent: SearchNode, action: str, content: NodeContent, score: ScoreValue) -> SearchNode:
    if action in parent.actions:
        raise DuplicateActionError(f"action {action!r} already applied on node {parent.id}")
    actions = parent.actions + (action,)
    return SearchNode(id=child_id(parent.id, actions), content=content, score=score, actions=actions, parent=parent.id)


class ExpansionStrategy(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    SELECTOR_GUIDED = "selector_guided"


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for one growth-aware search.

    ``threshold`` is normally in [0, 1]; a value above 1 can never be met and
    turns early acceptance off, which the oracle tests rely on.
    """

    threshold: float = 0.7
    max_depth: int = 3
    beam_width: int = 3
    expansion_strategy: ExpansionStrategy = ExpansionStrategy.SELECTOR_GUIDED
    max_backend_retries: int = 2
    pool_mode: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "expansion_strategy", ExpansionStrategy(self.expansion_strategy))
        if not (isinstance(self.threshold, (int, float)) and self.threshold >= 0 and not math.isnan(self.threshold)):
            raise ConfigError(f"threshold must be >= 0, got {self.threshold!r}")
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if self.beam_width < 1:
            raise ConfigError("beam_width must be >= 1")
        if self.max_backend_retries < 0:
            raise ConfigError("max_backend_retries must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


DEFAULT_REASONING_CONFIG = SearchConfig(threshold=0.7)
DEFAULT_GENERATION_CONFIG = SearchConfig(threshold=0.6)


@dataclass(frozen=True)
class PlanStep:
    kind: TaskKind
    prompt: str
    inputs: tuple[MediaRef, ...] = ()


@dataclass(frozen=True)
class TaskPlan:
    intent: str
    steps: tuple[PlanStep, ...]
    revision_count: int = 0
    approved: bool = True
    speaker: bool = True  # a final natural-language response is requested

    def to_dict(self) -> dict[str, Any]:
        return {
            "intent": self.intent,
            "steps": [
                {
                    "kind": "understand" if s.kind.is_reasoning else "generate",
                    "modality": s.kind.modality.value,
                    "prompt": s.prompt,
                    "inputs": [m.id for m in s.inputs],
                }
                for s in self.steps
            ],
            "speaker": self.speaker,
            "revision_count": self.revision_count,
            "approved": self.approved,
        }
