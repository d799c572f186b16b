"""Growth-aware multi-agent search for multimodal reasoning and generation."""
from __future__ import annotations

from .actions import ActionRegistry, ActionSpec, catalog_for
from .core import (
    ExpansionStrategy,
    GenerationNodeContent,
    MediaRef,
    Modality,
    PlanStep,
    ReasoningNodeContent,
    ScoreValue,
    SearchConfig,
    SearchNode,
    TaskKind,
    TaskPlan,
)
from .scoring import mean_token_probability
from .search import SearchOutcome, TerminatedBy, run_search

__version__ = "0.1.0"

__all__ = [
    "ActionRegistry", "ActionSpec", "ExpansionStrategy", "GenerationNodeContent", "MediaRef", "Modality",
    "PlanStep", "ReasoningNodeContent", "ScoreValue", "SearchConfig", "SearchNode", "SearchOutcome", "TaskKind",
    "TaskPlan", "TerminatedBy", "catalog_for", "mean_token_probability", "run_search",
]
