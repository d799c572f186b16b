"""Re-run a fixed suite of reasoning tasks across a grid of thresholds.

Each task carries a question, a modality and optional inline media. For
every threshold the whole suite is searched again against the same
fixtures, so the only thing that changes between rows is the acceptance
gate.
"""
from __future__ import annotations

import base64
import dataclasses
import logging
import math
import random
import tempfile
from dataclasses import dataclass
from typing import Any, Sequence

from .actions import ActionRegistry
from .agents import AgentContext
from .backends.base import ChatBackend, MediaBackend
from .backends.gateway import Gateway
from .core import MediaRef, Modality, SearchConfig, TaskKind
from .errors import AgentSearchError, DatasetError
from .expansion import ReasoningExpander
from .orchestrator import init_reasoning_root
from .roles import RoleRegistry, registry_load
from .scoring import ProbsFallback
from .search import TerminatedBy, run_search
from .store import ArtifactStore
from .trace import Tracer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepTask:
    question: str
    modality: Modality
    media: tuple[tuple[bytes, str], ...] = ()  # (bytes, extension)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SweepTask:
        try:
            media = tuple((base64.b64decode(m["artifact_bytes_b64"]), str(m.get("ext") or "bin"))
                          for m in data.get("media") or [])
            return cls(str(data["question"]), Modality.parse(data.get("modality", "text")), media)
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"bad sweep task {data!r}: {exc}") from None

    def to_dict(self) -> dict[str, Any]:
        return {
            "question": self.question,
            "modality": self.modality.value,
            "media": [{"artifact_bytes_b64": base64.b64encode(d).decode("ascii"), "ext": e} for d, e in self.media],
        }


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    tasks: int
    root_accepts: int
    expansions: int
    mean_best_score: float
    failures: int = 0


def parse_grid(text: str) -> list[float]:
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"bad threshold grid {text!r}") from None
    if not grid or any(math.isnan(t) or t < 0 for t in grid):
        raise ValueError(f"bad threshold grid {text!r}")
    return grid


def _run_task(task: SweepTask, config: SearchConfig, chat: ChatBackend, media_backend: MediaBackend | None,
              roles: RoleRegistry, actions: ActionRegistry, fallback: ProbsFallback, seed: int):
    with tempfile.TemporaryDirectory(prefix="sweep-") as tmp:
        store = ArtifactStore(tmp)
        tracer = Tracer(deterministic=True)
        gateway = Gateway(chat, media_backend, store, tracer=tracer, max_retries=config.max_backend_retries,
                          probs_fallback_configured=fallback.configured, rng=random.Random(seed))
        ctx = AgentContext(gateway, roles, actions, probs_fallback=fallback)
        media: list[MediaRef] = [store.put(data, task.modality, ext=ext) for data, ext in task.media]
        kind = TaskKind.reasoning(task.modality)
        root = init_reasoning_root(ctx, task.question, media)
        return run_search(root, config, kind, ReasoningExpander(ctx, kind), tracer)


def sweep(tasks: Sequence[SweepTask], grid: Sequence[float], *, chat_backend: ChatBackend,
          media_backend: MediaBackend | None = None, base_config: SearchConfig | None = None,
          roles: RoleRegistry | None = None, actions: ActionRegistry | None = None,
          probs_fallback: ProbsFallback | None = None, seed: int = 0) -> list[SweepRow]:
    if not tasks:
        raise DatasetError("the fixture file has no sweep tasks")
    base = base_config or SearchConfig()
    actions = actions or ActionRegistry()
    roles = roles or registry_load(actions=actions)
    fallback = probs_fallback or ProbsFallback()
    rows = []
    for tau in grid:
        config = dataclasses.replace(base, threshold=tau)
        accepts = expansions = failures = 0
        best: list[float] = []
        for task in tasks:
            try:
                outcome = _run_task(task, config, chat_backend, media_backend, roles, actions, fallback, seed)
            except AgentSearchError as exc:
                logger.warning("sweep task %r failed at threshold %s: %s", task.question, tau, exc)
                failures += 1
                continue
            expansions += outcome.explored_count - 1
            accepts += outcome.terminated_by is TerminatedBy.THRESHOLD_MET and outcome.explored_count == 1
            best.append(outcome.best_node.score.value)
        mean = math.fsum(best) / len(best) if best else float("nan")
        rows.append(SweepRow(tau, len(tasks), accepts, expansions, mean, failures))
    return rows


def render_sweep(rows: Sequence[SweepRow]) -> str:
    header = ("threshold", "tasks", "root_accepts", "expansions", "mean_best_score", "failures")
    body = [(f"{r.threshold:.3f}", str(r.tasks), str(r.root_accepts), str(r.expansions),
             f"{r.mean_best_score:.4f}", str(r.failures)) for r in rows]
    widths = [max(len(x[c]) for x in [header, *body]) for c in range(len(header))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in [header, *body])
