"""Confidence scores for search nodes.

Reasoning nodes are scored by the mean per-token probability of the
answering agent's output. Generation nodes go through a two-stage cascade:
a modality Judger writes a report about the artifact, and a Scorer turns
that report (text only, never the artifact) into a number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .backends.base import ChatResponse
from .core import MediaRef, Modality, ScoreValue
from .errors import EmptySequence, NoNumberFound, OutOfRange, ScoringError
from .roles import JudgementReport, judger_role, parse_judgement, parse_score, scorer_role
from .roles.prompts import SCORER_FORMAT_REMINDER

if TYPE_CHECKING:
    from .agents import AgentContext


def mean_token_probability(probs: Sequence[float]) -> ScoreValue:
    if len(probs) == 0:
        raise EmptySequence("token probability list is empty")
    for i, p in enumerate(probs):
        if not (0.0 < p <= 1.0):
            raise OutOfRange(i, p)
    # fsum is correctly rounded, so the mean does not depend on token order;
    # the division can still slip one ulp outside the inputs, hence the clamp
    mean = math.fsum(probs) / len(probs)
    return ScoreValue(min(max(mean, min(probs)), max(probs)))


@dataclass(frozen=True)
class ProbsFallback:
    """What to do when a backend returns no token probabilities.

    ``judge_score`` runs the Judger/Scorer cascade over the answer text;
    ``constant`` uses a fixed score; ``none`` treats it as an error.
    """

    mode: str = "judge_score"
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("judge_score", "constant", "none"):
            raise ValueError(f"unknown fallback mode {self.mode!r}")

    @classmethod
    def parse(cls, text: str) -> ProbsFallback:
        """``judge_score``, ``none``, or ``constant:<x>``."""
        mode, _, value = text.partition(":")
        if mode == "constant":
            return cls("constant", float(value or 0.0))
        return cls(mode)

    @property
    def configured(self) -> bool:
        return self.mode != "none"


@dataclass(frozen=True)
class GenerationVerdict:
    judgement: JudgementReport
    score: ScoreValue
    judged_artifact: MediaRef | None
    scorer_error: bool = False


def _scorer_pass(ctx: AgentContext, modality: Modality, report: str) -> tuple[ScoreValue, bool]:
    role = scorer_role(modality)
    reply = ctx.ask(role, [report])
    try:
        return parse_score(reply.text), False
    except NoNumberFound:
        pass
    retry = ctx.ask(role, [report], retry_of=(reply.text, SCORER_FORMAT_REMINDER))
    try:
        return parse_score(retry.text), False
    except NoNumberFound:
        return ScoreValue(0.0), True


def score_generation(ctx: AgentContext, artifact: MediaRef, prompt: str) -> GenerationVerdict:
    modality = artifact.modality
    report = ctx.ask(judger_role(modality), [f"Text prompt: {prompt}", artifact]).text
    score, failed = _scorer_pass(ctx, modality, report)
    return GenerationVerdict(parse_judgement(report, modality), score, artifact, scorer_error=failed)


def judge_answer_text(ctx: AgentContext, question: str, answer: str) -> GenerationVerdict:
    report = ctx.ask(judger_role(Modality.TEXT), [f"Question: {question}", f"Answer: {answer}"]).text
    score, failed = _scorer_pass(ctx, Modality.TEXT, report)
    return GenerationVerdict(parse_judgement(report, Modality.TEXT), score, None, scorer_error=failed)


def score_reasoning_answer(ctx: AgentContext, response: ChatResponse, question: str) -> ScoreValue:
    if response.token_probs is not None:
        return mean_token_probability(response.token_probs)
    fallback = ctx.probs_fallback
    if fallback.mode == "constant":
        return ScoreValue(fallback.value)
    if fallback.mode == "judge_score":
        return judge_answer_text(ctx, question, response.text).score
    raise ScoringError("answer has no token probabilities and no fallback is configured")
