"""Shared helpers for the test suite: synthetic score landscapes, scripted contexts, oracles."""
from __future__ import annotations

import itertools
import json
import random
from pathlib import Path
from typing import Callable, Iterable

from agentsearch.actions import ActionBehavior, ActionCatalog, ActionRegistry, ActionSpec
from agentsearch.agents import AgentContext
from agentsearch.backends.base import ChatRequest, ChatResponse
from agentsearch.backends.gateway import Gateway
from agentsearch.backends.scripted import CallableChatBackend
from agentsearch.backends.stub import StubMediaBackend
from agentsearch.core import Modality, ReasoningNodeContent, ScoreValue, SearchNode, TaskKind, derive_child
from agentsearch.roles import registry_load
from agentsearch.scoring import ProbsFallback
from agentsearch.store import ArtifactStore
from agentsearch.trace import Tracer

TEXT_KIND = TaskKind.reasoning(Modality.TEXT)


def toy_catalog(n: int) -> ActionCatalog:
    specs = [ActionSpec(f"a{i}", f"toy action {i}", TEXT_KIND, ActionBehavior.EXPERT_ADVICE, f"a{i}")
             for i in range(n)]
    return ActionCatalog(TEXT_KIND, specs)


def random_landscape(rng: random.Random, names: Iterable[str], max_size: int) -> dict[frozenset, float]:
    """A score for every action subset up to ``max_size`` (the empty set is the root)."""
    names = list(names)
    return {frozenset(c): rng.random() for k in range(max_size + 1) for c in itertools.combinations(names, k)}


def brute_force_best(landscape: dict[frozenset, float], max_size: int) -> tuple[frozenset, float]:
    """Independent maximiser: scan every subset directly, no search involved."""
    best_set, best_score = None, -1.0
    for subset, score in landscape.items():
        if len(subset) <= max_size and score > best_score:
            best_set, best_score = subset, score
    return best_set, best_score


def landscape_root(landscape: dict[frozenset, float], root_id: str = "root") -> SearchNode:
    return SearchNode(root_id, ReasoningNodeContent((), "q", (), "root"), ScoreValue(landscape[frozenset()]))


class LandscapeExpander:
    """Scores come straight from a table keyed by action set; no backends."""

    def __init__(self, landscape: dict[frozenset, float], catalog: ActionCatalog,
                 pick: Callable[[SearchNode, list], int] | None = None, fail: set[frozenset] | None = None) -> None:
        self.landscape = landscape
        self.catalog = catalog
        self.pick = pick or (lambda node, candidates: 0)
        self.fail = fail or set()
        self.applied: list[tuple[str, str]] = []
        self.combos: list[frozenset] = []  # action set of every attempted child, in order

    def apply(self, node: SearchNode, action: ActionSpec) -> SearchNode:
        from agentsearch.errors import ExpansionError

        self.applied.append((node.id, action.name))
        key = frozenset(node.actions + (action.name,))
        self.combos.append(key)
        if key in self.fail:
            raise ExpansionError(f"scripted failure on {sorted(key)}")
        content = ReasoningNodeContent((), "q", (), "+".join(sorted(key)))
        return derive_child(node, action.name, content, ScoreValue(self.landscape[key]))

    def select(self, node: SearchNode, candidates):
        return candidates[self.pick(node, list(candidates)) % len(candidates)], "scripted"


ChatFn = Callable[[ChatRequest], "ChatResponse | str | tuple"]


def make_ctx(tmp_path: Path, fn: ChatFn, *, supports_token_probs: bool = True,
             fallback: ProbsFallback | None = None, actions: ActionRegistry | None = None,
             max_retries: int = 2) -> AgentContext:
    tracer = Tracer(deterministic=True)
    store = ArtifactStore(tmp_path)
    backend = CallableChatBackend(fn, supports_token_probs=supports_token_probs)
    fallback = fallback or ProbsFallback()
    gateway = Gateway(backend, StubMediaBackend(), store, tracer=tracer, max_retries=max_retries,
                      probs_fallback_configured=fallback.configured)
    actions = actions or ActionRegistry()
    return AgentContext(gateway, registry_load(actions=actions), actions, probs_fallback=fallback)


def role_script(table: dict[str, object], default: object = "ok") -> ChatFn:
    """Answer by role name; values may be callables taking the request."""

    def fn(request: ChatRequest):
        for prefix, value in table.items():
            if request.role == prefix or (prefix.endswith("*") and request.role.startswith(prefix[:-1])):
                return value(request) if callable(value) else value
        return default(request) if callable(default) else default

    return fn


def backend_calls(ctx_or_events, role_prefix: str = "") -> list[dict]:
    events = ctx_or_events.tracer.events if hasattr(ctx_or_events, "tracer") else ctx_or_events
    return [e.payload for e in events
            if e.kind.value == "BackendCall" and e.payload["role"].startswith(role_prefix)]


def write_jsonl(path: Path, rows: Iterable[dict]) -> Path:
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path
