"""Growth-aware beam search over sets of agent actions.

The engine knows nothing about models. An :class:`Expander` supplies the
catalog, applies an action to a node (returning a scored child), and, for
selector-guided expansion, picks one action among candidates. Scoring,
dedup registration, best-node tracking and trace appends all happen here,
in one place, so event order is total even with concurrent expansions.
"""
from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence

from .actions import ActionCatalog, ActionSpec
from .core import (
    ExpansionStrategy,
    GenerationNodeContent,
    ReasoningNodeContent,
    SearchConfig,
    SearchNode,
    TaskKind,
    action_set_key,
)
from .errors import AgentSearchError, DepthLimitError, ExpansionError, SearchError
from .trace import EventKind, TraceEvent, Tracer

logger = logging.getLogger(__name__)


class TerminatedBy(str, enum.Enum):
    THRESHOLD_MET = "ThresholdMet"
    DEPTH_EXHAUSTED = "DepthExhausted"
    NO_VALID_ACTIONS = "NoValidActions"


class Expander(Protocol):
    catalog: ActionCatalog

    def apply(self, node: SearchNode, action: ActionSpec) -> SearchNode: ...

    def select(self, node: SearchNode, candidates: Sequence[ActionSpec]) -> tuple[ActionSpec, str]: ...


@dataclass(frozen=True)
class SearchOutcome:
    best_node: SearchNode
    terminated_by: TerminatedBy
    explored_count: int
    trace: tuple[TraceEvent, ...] = ()
    nodes: tuple[SearchNode, ...] = ()

    def summary(self) -> dict:
        return {
            "best_node": self.best_node,
            "terminated_by": self.terminated_by,
            "explored_count": self.explored_count,
        }


def _node_payload(node: SearchNode) -> dict:
    out = {"node": node.id, "parent": node.parent, "actions": list(node.actions), "depth": node.depth,
           "key": node.key}
    return out


def _score_payload(node: SearchNode) -> dict:
    out: dict = {"node": node.id, "score": node.score.value, "clamped": node.score.clamped}
    c = node.content
    if isinstance(c, ReasoningNodeContent):
        out["answer"] = c.node_answer
    elif isinstance(c, GenerationNodeContent):
        out["prompt"] = c.node_prompt
        out["artifact"] = c.node_answer.id
        out["judgement"] = c.judgement
        out["scorer_error"] = c.scorer_error
    return out


def check_expandable(node: SearchNode, config: SearchConfig) -> None:
    if node.depth >= config.max_depth:
        raise DepthLimitError(f"node {node.id} is at max depth {config.max_depth}")


class _Search:
    def __init__(self, root: SearchNode, config: SearchConfig, kind: TaskKind, expander: Expander,
                 tracer: Tracer) -> None:
        self.config = config
        self.kind = kind
        self.expander = expander
        self.catalog = expander.catalog
        self.tracer = tracer
        self.root = root
        self.best = root
        self.nodes: list[SearchNode] = []
        self.created: dict[str, int] = {}
        self.visited: set[str] = set()
        self.mark = tracer.mark()

    # -- bookkeeping -----------------------------------------------------------

    def register(self, node: SearchNode) -> None:
        self.created[node.id] = len(self.nodes)
        self.nodes.append(node)
        self.visited.add(node.key)
        self.tracer.emit(EventKind.NODE_CREATED, **_node_payload(node))
        self.tracer.emit(EventKind.NODE_SCORED, **_score_payload(node))
        if node.score.value > self.best.score.value:
            self.best = node

    def met(self, node: SearchNode) -> bool:
        return node.score.value >= self.config.threshold

    def finish(self, how: TerminatedBy) -> SearchOutcome:
        self.tracer.emit(EventKind.TERMINATED, terminated_by=how, best_node=self.best.id,
                         best_score=self.best.score.value, explored_count=len(self.nodes))
        return SearchOutcome(self.best, how, len(self.nodes), tuple(self.tracer.since(self.mark)),
                             tuple(self.nodes))

    def fail(self, message: str) -> SearchError:
        self.tracer.emit(EventKind.TERMINATED, terminated_by="Failed", error=message, best_node=self.best.id,
                         best_score=self.best.score.value, explored_count=len(self.nodes))
        return SearchError(message)

    def rank(self, node: SearchNode) -> tuple:
        return (-node.score.value, self.catalog.order(node.last_action), self.created[node.id])

    def candidates(self, node: SearchNode) -> list[ActionSpec]:
        if node.depth >= self.config.max_depth:
            return []
        return [a for a in self.catalog.unused(node.actions)
                if action_set_key(node.actions + (a.name,)) not in self.visited]

    def choose(self, node: SearchNode, failures: list) -> list[tuple[ActionSpec, str]]:
        options = self.candidates(node)
        if not options:
            return []
        if self.config.expansion_strategy is ExpansionStrategy.EXHAUSTIVE:
            return [(a, "exhaustive") for a in options]
        try:
            action, via = self.expander.select(node, options)
        except AgentSearchError as exc:
            failures.append({"node": node.id, "action": None, "error": str(exc)})
            logger.warning("action selection failed on %s: %s", node.id, exc)
            return []
        if action.name not in {a.name for a in options}:
            raise ExpansionError(f"selector returned {action.name!r}, which was not offered")
        return [(action, via)]

    def claim(self, node: SearchNode, action: ActionSpec, via: str) -> bool:
        key = action_set_key(node.actions + (action.name,))
        if key in self.visited:
            return False
        check_expandable(node, self.config)
        self.visited.add(key)
        self.tracer.emit(EventKind.ACTION_SELECTED, node=node.id, action=action.name, via=via)
        return True

    def accept(self, parent: SearchNode, action: ActionSpec, child: SearchNode) -> None:
        if child.actions != parent.actions + (action.name,):
            raise ExpansionError(f"expander returned actions {child.actions} for {parent.id} + {action.name}")

    # -- main loop -------------------------------------------------------------

    def run(self) -> SearchOutcome:
        if len(self.catalog) == 0:
            raise SearchError(f"empty action catalog for {self.kind}")
        self.register(self.root)
        if self.met(self.root):
            return self.finish(TerminatedBy.THRESHOLD_MET)
        frontier = [self.root]
        for depth in range(1, self.config.max_depth + 1):
            if self.config.workers > 1:
                new, attempts, failures, done = self.expand_concurrent(frontier)
            else:
                new, attempts, failures, done = self.expand_sequential(frontier)
            if done is not None:
                return done
            if not new:
                if attempts and len([f for f in failures if f["action"]]) == attempts:
                    raise self.fail(f"all {attempts} expansions at depth {depth} failed")
                if failures and not attempts:
                    raise self.fail(f"action selection failed for every frontier node at depth {depth}")
                return self.finish(TerminatedBy.NO_VALID_ACTIONS)
            pool = new + frontier if self.config.pool_mode else new
            frontier = sorted(pool, key=self.rank)[: self.config.beam_width]
            self.tracer.emit(EventKind.BEAM_UPDATED, depth=depth, beam=[n.id for n in frontier],
                             scores=[n.score.value for n in frontier], failed_expansions=failures)
        return self.finish(TerminatedBy.DEPTH_EXHAUSTED)

    def expand_sequential(self, frontier: list[SearchNode]):
        new: list[SearchNode] = []
        failures: list[dict] = []
        attempts = 0
        for node in frontier:
            for action, via in self.choose(node, failures):
                if not self.claim(node, action, via):
                    continue
                attempts += 1
                try:
                    child = self.expander.apply(node, action)
                    self.accept(node, action, child)
                except AgentSearchError as exc:
                    failures.append({"node": node.id, "action": action.name, "error": str(exc)})
                    logger.warning("expansion %s + %s failed: %s", node.id, action.name, exc)
                    continue
                self.register(child)
                new.append(child)
                if self.met(child):
                    return new, attempts, failures, self.finish(TerminatedBy.THRESHOLD_MET)
        return new, attempts, failures, None

    def expand_concurrent(self, frontier: list[SearchNode]):
        failures: list[dict] = []
        plan: list[tuple[SearchNode, ActionSpec]] = []
        for node in frontier:
            for action, via in self.choose(node, failures):
                if self.claim(node, action, via):
                    plan.append((node, action))
        new: list[SearchNode] = []
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            futures = [pool.submit(self.expander.apply, node, action) for node, action in plan]
            for (node, action), future in zip(plan, futures):
                try:
                    child = future.result()
                    self.accept(node, action, child)
                except AgentSearchError as exc:
                    failures.append({"node": node.id, "action": action.name, "error": str(exc)})
                    continue
                self.register(child)
                new.append(child)
                if self.met(child):
                    for f in futures:
                        f.cancel()
                    return new, len(plan), failures, self.finish(TerminatedBy.THRESHOLD_MET)
        return new, len(plan), failures, None


def run_search(root: SearchNode, config: SearchConfig, kind: TaskKind, expander: Expander,
               tracer: Tracer | None = None) -> SearchOutcome:
    """Search from an already-scored ``root``.

    Returns as soon as any node reaches ``config.threshold``; otherwise
    expands level by level, keeping the top ``beam_width`` new nodes, until
    ``max_depth`` or until no unvisited action combination is left.
    """
    if root.actions:
        raise ValueError("search must start from a root node with no actions")
    return _Search(root, config, kind, expander, tracer or Tracer(deterministic=True)).run()
