"""Turning an instruction into a checked task plan.

A Perceiver summarises the request, a Planner writes a JSON plan, and a
Reflector approves it or sends notes back for another round.
"""
from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .agents import AgentContext
from .core import MediaRef, Modality, PlanStep, TaskKind, TaskPlan
from .errors import PlanParseError
from .roles import PERCEIVER, PLANNER, REFLECTOR
from .roles.prompts import PLANNER_FORMAT_REMINDER

logger = logging.getLogger(__name__)

DEFAULT_MAX_ROUNDS = 3
_STEP_KINDS = {"understand": TaskKind.reasoning, "generate": TaskKind.generation}


@dataclass(frozen=True)
class ReflectionVerdict:
    approved: bool
    notes: str = ""

    def __post_init__(self) -> None:
        if not self.approved and not self.notes.strip():
            raise ValueError("a rejection needs notes")


def _json_objects(text: str):
    decoder = json.JSONDecoder()
    i = text.find("{")
    while i != -1:
        try:
            obj, _ = decoder.raw_decode(text, i)
        except json.JSONDecodeError:
            pass
        else:
            if isinstance(obj, dict):
                yield obj
        i = text.find("{", i + 1)


def _parse_step(raw: Any, index: int, media: Sequence[MediaRef]) -> PlanStep:
    if not isinstance(raw, dict):
        raise PlanParseError(f"step {index} is not an object")
    label = str(raw.get("kind", "")).strip().lower()
    kind = _STEP_KINDS.get(label)
    if kind is None:
        raise PlanParseError(f"step {index}: kind must be 'generate' or 'understand', got {raw.get('kind')!r}")
    try:
        modality = Modality.parse(raw.get("modality", ""))
    except ValueError as exc:
        raise PlanParseError(f"step {index}: {exc}") from None
    prompt = raw.get("prompt")
    if not isinstance(prompt, str) or not prompt.strip():
        raise PlanParseError(f"step {index}: prompt must be a non-empty string")
    by_id = {m.id: m for m in media}
    ids = raw.get("inputs")
    if ids is None:
        inputs = tuple(media) if label == "understand" else ()
    else:
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise PlanParseError(f"step {index}: inputs must be a list of media ids")
        unknown = [i for i in ids if i not in by_id]
        if unknown:
            raise PlanParseError(f"step {index}: unknown input media {unknown}")
        inputs = tuple(by_id[i] for i in ids)
    return PlanStep(kind(modality), prompt.strip(), inputs)


def parse_plan(text: str, media: Sequence[MediaRef] = ()) -> TaskPlan:
    """Read the first JSON object with a ``steps`` list out of ``text``.

    ``inputs`` on a step lists attached media ids. When absent, understanding
    steps see all attached media and generation steps see none.
    """
    for obj in _json_objects(text):
        if "steps" not in obj:
            continue
        steps = obj["steps"]
        if not isinstance(steps, list):
            raise PlanParseError("'steps' must be a list")
        intent = obj.get("intent", "")
        if not isinstance(intent, str):
            raise PlanParseError("'intent' must be a string")
        return TaskPlan(
            intent=intent.strip(),
            steps=tuple(_parse_step(s, i, media) for i, s in enumerate(steps)),
            revision_count=int(obj.get("revision_count", 0)),
            approved=bool(obj.get("approved", True)),
            speaker=bool(obj.get("speaker", True)),
        )
    raise PlanParseError("no JSON object with a 'steps' list found")


def load_plan(path: str | Path, media: Sequence[MediaRef] = ()) -> TaskPlan:
    return parse_plan(Path(path).read_text(encoding="utf-8"), media)


def parse_verdict(text: str) -> ReflectionVerdict:
    """Unreadable verdicts count as rejections, with the raw reply as notes."""
    for obj in _json_objects(text):
        if "approved" not in obj:
            continue
        approved = obj["approved"]
        if isinstance(approved, str):
            approved = approved.strip().lower() in ("true", "yes")
        notes = str(obj.get("notes") or "").strip()
        if not approved and not notes:
            notes = "The plan was rejected without notes; check it against the instruction."
        return ReflectionVerdict(bool(approved), notes)
    return ReflectionVerdict(False, text.strip() or "The reviewer reply was empty.")


def plan_modalities(plan: TaskPlan) -> set[Modality]:
    """Output modalities a plan will produce.

    Generation steps add their modality; understanding steps answer in text,
    as does the Speaker.
    """
    out = {s.kind.modality if s.kind.is_generation else Modality.TEXT for s in plan.steps}
    if plan.speaker:
        out.add(Modality.TEXT)
    return out


def _media_lines(media: Sequence[MediaRef]) -> str:
    if not media:
        return "Attached media: none"
    return "Attached media:\n" + "\n".join(f"- {m.id} ({m.modality.value})" for m in media)


def _plan_once(ctx: AgentContext, parts: list, media: Sequence[MediaRef]) -> TaskPlan:
    reply = ctx.ask(PLANNER, parts)
    try:
        return parse_plan(reply.text, media)
    except PlanParseError as exc:
        logger.info("plan rejected (%s); asking again", exc)
    retry = ctx.ask(PLANNER, parts, retry_of=(reply.text, PLANNER_FORMAT_REMINDER))
    return parse_plan(retry.text, media)


def cognize(ctx: AgentContext, instruction: str, media: Sequence[MediaRef] = (),
            max_rounds: int = DEFAULT_MAX_ROUNDS) -> TaskPlan:
    if not instruction.strip():
        raise ValueError("instruction is empty")
    if max_rounds < 0:
        raise ValueError("max_rounds must be >= 0")
    summary = ctx.ask(PERCEIVER, [*media, f"Instruction: {instruction}"]).text.strip()
    base = [f"Instruction: {instruction}", f"Perceiver summary: {summary}", _media_lines(media)]
    notes: list[str] = []
    plan: TaskPlan | None = None
    for round_ in range(max_rounds + 1):
        parts = list(base)
        if notes:
            parts.append("Reviewer notes:\n" + "\n".join(f"- {n}" for n in notes))
        plan = _plan_once(ctx, parts, media)
        verdict = parse_verdict(ctx.ask(REFLECTOR, [
            f"Instruction: {instruction}",
            f"Perceiver summary: {summary}",
            "Proposed plan:\n" + json.dumps(plan.to_dict(), ensure_ascii=False),
        ]).text)
        if verdict.approved:
            return dataclasses.replace(plan, revision_count=round_, approved=True)
        notes.append(verdict.notes)
    logger.warning("plan still unapproved after %d revisions; continuing with the last one", max_rounds)
    return dataclasses.replace(plan, revision_count=max_rounds, approved=False)
