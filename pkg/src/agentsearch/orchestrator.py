"""End-to-end runs: plan, search each step, speak, and persist.

A run directory holds ``run.json`` (the RunRecord), ``plan.json``,
``trace.jsonl`` and ``artifacts/``. Every path recorded inside is relative
to the run directory.
"""
from __future__ import annotations

import hashlib
import json
import logging
import random
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .actions import ActionRegistry
from .agents import AgentContext
from .backends.base import ChatBackend, MediaBackend, MediaGenRequest
from .backends.gateway import Gateway
from .backends.scripted import ReplayBackend
from .cognition import DEFAULT_MAX_ROUNDS, cognize
from .core import (
    DEFAULT_GENERATION_CONFIG,
    DEFAULT_REASONING_CONFIG,
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
from .errors import AgentSearchError, ConfigError
from .expansion import GenerationExpander, ReasoningExpander
from .roles import GENERAL_ANSWER, SPEAKER, RoleRegistry, extender_role
from .scoring import ProbsFallback, score_generation, score_reasoning_answer
from .search import SearchOutcome, run_search
from .store import ArtifactStore
from .trace import EventKind, Tracer, read_trace, to_jsonable

logger = logging.getLogger(__name__)

RUN_FILE = "run.json"
PLAN_FILE = "plan.json"
TRACE_FILE = "trace.jsonl"

MEDIA_EXTENSIONS = {
    "png": Modality.IMAGE, "jpg": Modality.IMAGE, "jpeg": Modality.IMAGE, "webp": Modality.IMAGE,
    "gif": Modality.IMAGE, "bmp": Modality.IMAGE,
    "mp4": Modality.VIDEO, "mov": Modality.VIDEO, "webm": Modality.VIDEO, "avi": Modality.VIDEO,
    "mkv": Modality.VIDEO,
    "wav": Modality.AUDIO, "mp3": Modality.AUDIO, "flac": Modality.AUDIO, "ogg": Modality.AUDIO,
    "m4a": Modality.AUDIO,
    "txt": Modality.TEXT,
}


def guess_modality(path: str | Path) -> Modality:
    ext = Path(path).suffix.lstrip(".").lower()
    try:
        return MEDIA_EXTENSIONS[ext]
    except KeyError:
        raise ConfigError(f"cannot tell the modality of {path}; use MODALITY=PATH") from None


@dataclass(frozen=True)
class RunSettings:
    """Per-run knobs. ``search`` overrides the defaults per task kind, keyed like ``reasoning:image``."""

    reasoning: SearchConfig = DEFAULT_REASONING_CONFIG
    generation: SearchConfig = DEFAULT_GENERATION_CONFIG
    search: dict[str, SearchConfig] = field(default_factory=dict)
    max_rounds: int = DEFAULT_MAX_ROUNDS
    extend_prompts: bool = True
    media_params: dict[str, dict[str, Any]] = field(default_factory=dict)
    parallel_steps: bool = False
    probs_fallback: ProbsFallback = field(default_factory=ProbsFallback)

    def search_config(self, kind: TaskKind) -> SearchConfig:
        if str(kind) in self.search:
            return self.search[str(kind)]
        return self.reasoning if kind.is_reasoning else self.generation

    def params_for(self, modality: Modality) -> dict[str, Any]:
        return dict(self.media_params.get(modality.value, {}))

    def to_dict(self) -> dict[str, Any]:
        return to_jsonable({
            "reasoning": self.reasoning,
            "generation": self.generation,
            "search": dict(sorted(self.search.items())),
            "max_rounds": self.max_rounds,
            "extend_prompts": self.extend_prompts,
            "media_params": self.media_params,
            "parallel_steps": self.parallel_steps,
            "probs_fallback": self.probs_fallback,
        })


@dataclass(frozen=True)
class StepResult:
    """What one plan step produced.

    ``outcome`` is None when the step failed (``error`` says why) or when it
    was a text-generation step, which the Speaker answers directly.
    """

    index: int
    step: PlanStep
    outcome: SearchOutcome | None
    error: str | None = None
    delegated: bool = False

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "index": self.index,
            "kind": str(self.step.kind),
            "prompt": self.step.prompt,
            "error": self.error,
            "delegated": self.delegated,
        }
        if self.outcome is not None:
            best = self.outcome.best_node
            node: dict[str, Any] = {"id": best.id, "actions": list(best.actions), "score": best.score.value}
            if isinstance(best.content, ReasoningNodeContent):
                node["answer"] = best.content.node_answer
            else:
                node["prompt"] = best.content.node_prompt
                node["artifact"] = best.content.node_answer.to_dict()
            out.update(terminated_by=self.outcome.terminated_by.value,
                       explored_count=self.outcome.explored_count, best_node=node)
        return out


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    instruction: str
    plan: TaskPlan
    step_outcomes: tuple[StepResult, ...]
    final_response: str
    artifacts: tuple[MediaRef, ...]
    mode: str = "run"
    run_dir: Path | None = field(default=None, compare=False)  # where it was persisted; not serialised

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "mode": self.mode,
            "instruction": self.instruction,
            "plan": self.plan.to_dict(),
            "steps": [s.to_dict() for s in self.step_outcomes],
            "final_response": self.final_response,
            "artifacts": [a.to_dict() for a in self.artifacts],
        }


def _canonical(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def make_run_id(inputs: dict[str, Any], deterministic: bool) -> str:
    """Deterministic runs are named after their inputs; others get a random suffix."""
    digest = hashlib.sha256(_canonical(inputs).encode()).hexdigest()[:12]
    return f"run-{digest}" if deterministic else f"run-{digest}-{uuid.uuid4().hex[:8]}"


def _fresh_dir(runs_dir: Path, run_id: str) -> Path:
    candidate = runs_dir / run_id
    n = 0
    while candidate.exists():
        n += 1
        candidate = runs_dir / f"{run_id}-{n}"
    candidate.mkdir(parents=True)
    return candidate


@dataclass
class MediaInput:
    """An input file before it has been copied into a run's store."""

    data: bytes
    modality: Modality
    ext: str
    name: str = ""

    @classmethod
    def from_path(cls, path: str | Path, modality: Modality | None = None) -> MediaInput:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"media file not found: {path}")
        return cls(path.read_bytes(), modality or guess_modality(path), path.suffix.lstrip(".") or "bin", path.name)

    def fingerprint(self) -> dict[str, str]:
        return {"sha256": hashlib.sha256(self.data).hexdigest(), "modality": self.modality.value, "ext": self.ext}


class Session:
    """One run directory with its tracer, store, gateway and agent context."""

    def __init__(self, runs_dir: str | Path, *, mode: str, inputs: dict[str, Any],
                 chat_backend: ChatBackend, media_backend: MediaBackend | None,
                 settings: RunSettings | None = None, roles: RoleRegistry | None = None,
                 actions: ActionRegistry | None = None, seed: int = 0, deterministic: bool = True,
                 max_retries: int | None = None) -> None:
        self.settings = settings or RunSettings()
        self.seed = seed
        self.mode = mode
        actions = actions or ActionRegistry()
        identity = {"mode": mode, "inputs": inputs, "settings": self.settings.to_dict(), "seed": seed,
                    "actions": actions.dump()}
        self.run_id = make_run_id(identity, deterministic)
        self.run_dir = _fresh_dir(Path(runs_dir), self.run_id)
        self.tracer = Tracer(deterministic=deterministic, sink=self.run_dir / TRACE_FILE,
                             header={"run_id": self.run_id, "seed": seed})
        self.store = ArtifactStore(self.run_dir)
        if getattr(chat_backend, "store", False) is None:
            chat_backend.store = self.store  # remote chat encodes media parts from the run's store
        retries = self.settings.reasoning.max_backend_retries if max_retries is None else max_retries
        self.gateway = Gateway(chat_backend, media_backend, self.store, tracer=self.tracer, max_retries=retries,
                               probs_fallback_configured=self.settings.probs_fallback.configured,
                               rng=random.Random(seed))
        if roles is None:
            from .roles import registry_load
            roles = registry_load(actions=actions)
        roles.check_actions(actions)
        self.ctx = AgentContext(self.gateway, roles, actions, probs_fallback=self.settings.probs_fallback)

    def import_media(self, media: Sequence[MediaInput]) -> list[MediaRef]:
        return [self.store.put(m.data, m.modality, ext=m.ext, meta={"source_name": m.name} if m.name else None)
                for m in media]

    def started(self, **payload: Any) -> None:
        self.tracer.emit(EventKind.RUN_STARTED, mode=self.mode, run_id=self.run_id, seed=self.seed,
                         config=self.settings.to_dict(), **payload)

    def persist(self, record: RunRecord) -> Path:
        (self.run_dir / PLAN_FILE).write_text(
            json.dumps(record.plan.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
        (self.run_dir / RUN_FILE).write_text(
            json.dumps(to_jsonable(record.to_dict()), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8")
        return self.run_dir


# -- roots -------------------------------------------------------------------


def init_generation_root(ctx: AgentContext, prompt: str, modality: Modality, *, extend: bool = True,
                         params: dict[str, Any] | None = None, root_id: str = "root") -> SearchNode:
    if not prompt.strip():
        raise ValueError("generation prompt is empty")
    extended = prompt
    if extend:
        extended = ctx.ask(extender_role(modality), [f"Prompt: {prompt}"]).text.strip() or prompt
    artifact = ctx.gateway.generate_media(MediaGenRequest(extended, modality, params=dict(params or {}))).artifact
    verdict = score_generation(ctx, artifact, prompt)
    content = GenerationNodeContent(prompt, extended, artifact, verdict.judgement.raw,
                                    scorer_error=verdict.scorer_error)
    return SearchNode(root_id, content, verdict.score)


def init_reasoning_root(ctx: AgentContext, question: str, media: Sequence[MediaRef], *,
                        root_id: str = "root") -> SearchNode:
    if not question.strip():
        raise ValueError("question is empty")
    response = ctx.ask(GENERAL_ANSWER, [*media, f"Question: {question}"], want_token_probs=True)
    score = score_reasoning_answer(ctx, response, question)
    content = ReasoningNodeContent(tuple(media), question, (), response.text.strip())
    return SearchNode(root_id, content, score)


def reasoning_kind(media: Sequence[MediaRef], modality: Modality | None = None) -> TaskKind:
    if modality is None:
        modality = media[0].modality if media else Modality.TEXT
    return TaskKind.reasoning(modality)


def solve_step(ctx: AgentContext, index: int, step: PlanStep, settings: RunSettings) -> StepResult:
    kind = step.kind
    root_id = f"step{index}"
    if kind.is_generation and kind.modality is Modality.TEXT:
        return StepResult(index, step, None, delegated=True)
    try:
        config = settings.search_config(kind)
        if kind.is_reasoning:
            root = init_reasoning_root(ctx, step.prompt, step.inputs, root_id=root_id)
            expander: Any = ReasoningExpander(ctx, kind)
        else:
            params = settings.params_for(kind.modality)
            root = init_generation_root(ctx, step.prompt, kind.modality, extend=settings.extend_prompts,
                                        params=params, root_id=root_id)
            expander = GenerationExpander(ctx, kind, params)
        outcome = run_search(root, config, kind, expander, ctx.tracer)
    except AgentSearchError as exc:
        logger.error("step %d (%s) failed: %s", index, kind, exc)
        return StepResult(index, step, None, error=f"{type(exc).__name__}: {exc}")
    return StepResult(index, step, outcome)


def _step_line(result: StepResult) -> str:
    s = result.step
    head = f"Step {result.index + 1} ({'understand' if s.kind.is_reasoning else 'generate'} {s.kind.modality.value})"
    if result.delegated:
        return f"{head}: write this part yourself: {s.prompt}"
    if result.error:
        return f"{head}: failed ({result.error})"
    best = result.outcome.best_node
    if isinstance(best.content, ReasoningNodeContent):
        return f"{head}: answer: {best.content.node_answer} (confidence {best.score.value:.2f})"
    return (f"{head}: produced {s.kind.modality.value} artifact {best.content.node_answer.id} "
            f"from prompt \"{best.content.node_prompt}\" (quality {best.score.value:.2f})")


def speak(ctx: AgentContext, instruction: str, plan: TaskPlan, results: Sequence[StepResult]) -> str:
    parts = [f"Instruction: {instruction}", f"Intent: {plan.intent}"]
    parts += [_step_line(r) for r in results]
    return ctx.ask(SPEAKER, parts).text.strip()


def _artifacts(results: Sequence[StepResult]) -> tuple[MediaRef, ...]:
    out = []
    for r in results:
        if r.outcome is not None and isinstance(r.outcome.best_node.content, GenerationNodeContent):
            out.append(r.outcome.best_node.content.node_answer)
    return tuple(out)


def execute_plan(session: Session, plan: TaskPlan) -> list[StepResult]:
    ctx, settings = session.ctx, session.settings
    if settings.parallel_steps and len(plan.steps) > 1:
        with ThreadPoolExecutor(max_workers=len(plan.steps)) as pool:
            futures = [pool.submit(solve_step, ctx, i, s, settings) for i, s in enumerate(plan.steps)]
            return [f.result() for f in futures]
    return [solve_step(ctx, i, s, settings) for i, s in enumerate(plan.steps)]


def run(session: Session, instruction: str, media: Sequence[MediaRef] = (), *,
        plan: TaskPlan | None = None, plan_source: dict[str, Any] | None = None) -> RunRecord:
    """Full pipeline. A given ``plan`` skips cognition.

    ``plan_source`` is the plan JSON as the user supplied it; it is what the
    trace records, so a replay parses exactly the same input.
    """
    if plan is not None and plan_source is None:
        plan_source = plan.to_dict()
    session.started(instruction=instruction, media=list(media), plan=plan_source)
    if plan is None:
        plan = cognize(session.ctx, instruction, media, session.settings.max_rounds)
    results = execute_plan(session, plan)
    final = speak(session.ctx, instruction, plan, results)
    record = RunRecord(session.run_id, instruction, plan, tuple(results), final, _artifacts(results),
                       run_dir=session.run_dir)
    session.persist(record)
    return record


def _single_step(session: Session, instruction: str, step: PlanStep, answer) -> RunRecord:
    plan = TaskPlan(intent=instruction, steps=(step,), speaker=False)
    result = solve_step(session.ctx, 0, step, session.settings)
    record = RunRecord(session.run_id, instruction, plan, (result,), answer(result), _artifacts([result]),
                       mode=session.mode, run_dir=session.run_dir)
    session.persist(record)
    return record


def run_reasoning(session: Session, question: str, media: Sequence[MediaRef] = (),
                  modality: Modality | None = None) -> RunRecord:
    """Search on one question; the final response is the best answer."""
    kind = reasoning_kind(media, modality)
    session.started(question=question, media=list(media), task_kind=str(kind))
    step = PlanStep(kind, question, tuple(media))
    return _single_step(session, question, step,
                        lambda r: r.outcome.best_node.content.node_answer if r.outcome else "")


def run_generation(session: Session, prompt: str, modality: Modality) -> RunRecord:
    """Search on one generation prompt; the final response names the best artifact."""
    kind = TaskKind.generation(modality)
    session.started(prompt=prompt, task_kind=str(kind))
    step = PlanStep(kind, prompt)
    return _single_step(session, prompt, step,
                        lambda r: r.outcome.best_node.content.node_answer.uri if r.outcome else "")


# -- replay ------------------------------------------------------------------


def recorded_start(run_dir: str | Path) -> tuple[dict[str, Any], dict[str, Any]]:
    """The trace header and RunStarted payload of a stored run."""
    header, events = read_trace(Path(run_dir) / TRACE_FILE)
    for event in events:
        if event.kind is EventKind.RUN_STARTED:
            return header, event.payload
    raise ConfigError(f"{run_dir} has no RunStarted event")


def replay(source_dir: str | Path, runs_dir: str | Path, *, settings: RunSettings, roles: RoleRegistry | None = None,
           actions: ActionRegistry | None = None, deterministic: bool = True) -> RunRecord:
    """Re-run a stored run with every backend call answered from its trace."""
    source_dir = Path(source_dir)
    header, start = recorded_start(source_dir)
    backend = ReplayBackend(source_dir)
    source_store = ArtifactStore(source_dir)
    media = [MediaRef.from_dict(m) for m in start.get("media") or []]
    inputs = [MediaInput(source_store.read(m), m.modality, m.uri.rsplit(".", 1)[-1], m.meta.get("source_name", ""))
              for m in media]
    mode = start.get("mode", "run")
    session_inputs = recorded_inputs(mode, start, inputs)
    session = Session(runs_dir, mode=mode, inputs=session_inputs, chat_backend=backend, media_backend=backend,
                      settings=settings, roles=roles, actions=actions, seed=int(header.get("seed", start.get("seed", 0))),
                      deterministic=deterministic)
    refs = session.import_media(inputs)
    if mode == "reason":
        kind = TaskKind.parse(start["task_kind"])
        return run_reasoning(session, start["question"], refs, kind.modality)
    if mode == "generate":
        return run_generation(session, start["prompt"], TaskKind.parse(start["task_kind"]).modality)
    plan = None
    if start.get("plan"):
        from .cognition import parse_plan
        plan = parse_plan(json.dumps(start["plan"]), refs)
    return run(session, start["instruction"], refs, plan=plan, plan_source=start.get("plan"))


def recorded_inputs(mode: str, start: dict[str, Any], media: Sequence[MediaInput]) -> dict[str, Any]:
    """The identity dict a fresh invocation with the same inputs would use."""
    fingerprints = [m.fingerprint() for m in media]
    if mode == "reason":
        return {"question": start["question"], "media": fingerprints, "task_kind": start["task_kind"]}
    if mode == "generate":
        return {"prompt": start["prompt"], "task_kind": start["task_kind"]}
    return {"instruction": start["instruction"], "media": fingerprints, "plan": start.get("plan")}
