"""Applying actions to nodes, and asking the Selector which action to apply."""
from __future__ import annotations

import logging
from typing import Any, Sequence

from .actions import ActionBehavior, ActionSpec, render_candidates
from .agents import AgentContext
from .backends.base import MediaGenRequest, Part
from .core import (
    AuxiliaryItem,
    GenerationNodeContent,
    MediaRef,
    Modality,
    ReasoningNodeContent,
    SearchNode,
    TaskKind,
    derive_child,
)
from .errors import ExpansionError, SelectorParseError
from .roles import SUMMARIZER, parse_selector, selector_role
from .roles.prompts import SELECTOR_FORMAT_REMINDER
from .scoring import score_generation, score_reasoning_answer

logger = logging.getLogger(__name__)

IMAGE_AUGMENT_PROMPT = (
    "A sharper, higher-resolution rendition of the input image with the same content and layout, "
    "with fine details made clearly visible."
)


def _question_parts(content: ReasoningNodeContent) -> list[Part]:
    return [*content.media, f"Question: {content.question}", f"Current answer: {content.node_answer}"]


def _expert_lines(items: Sequence[AuxiliaryItem]) -> str:
    lines = []
    for item in items:
        if isinstance(item.payload, MediaRef):
            lines.append(f"[{item.source_action}] generated {item.payload.modality.value} {item.payload.id} (attached)")
        else:
            lines.append(f"[{item.source_action}] {item.payload}")
    return "\n".join(lines)


def summarizer_parts(content: ReasoningNodeContent, items: Sequence[AuxiliaryItem]) -> list[Part]:
    generated = [i.payload for i in items if isinstance(i.payload, MediaRef)]
    return [
        *content.media,
        *generated,
        f"Question (Q): {content.question}",
        "Expert outputs (H):\n" + _expert_lines(items),
    ]


def apply_reasoning_action(ctx: AgentContext, node: SearchNode, action: ActionSpec) -> SearchNode:
    content = node.content
    if not isinstance(content, ReasoningNodeContent) or not action.task_kind.is_reasoning:
        raise ExpansionError(f"{action.name} is not a reasoning action for node {node.id}")
    if action.behavior is ActionBehavior.EXPERT_ADVICE:
        advice = ctx.ask(action.agent_role, _question_parts(content)).text.strip()
        item = AuxiliaryItem(action.name, advice)
    else:
        modality = action.task_kind.modality
        if modality is Modality.IMAGE:
            # image-to-image directly on the original input; no prompt-writing agent
            originals = [m for m in content.media if m.modality is Modality.IMAGE]
            request = MediaGenRequest(IMAGE_AUGMENT_PROMPT, modality, conditioning=originals[0] if originals else None)
        else:
            prompt = ctx.ask(action.agent_role, _question_parts(content)).text.strip()
            if not prompt:
                raise ExpansionError(f"{action.name} returned an empty generation prompt")
            request = MediaGenRequest(prompt, modality)
        item = AuxiliaryItem(action.name, ctx.gateway.generate_media(request).artifact)
    items = content.auxiliary_items + (item,)
    answer = ctx.ask(SUMMARIZER, summarizer_parts(content, items), want_token_probs=True)
    score = score_reasoning_answer(ctx, answer, content.question)
    return derive_child(node, action.name, content.with_item(item, answer.text.strip()), score)


def apply_generation_action(ctx: AgentContext, node: SearchNode, action: ActionSpec,
                            params: dict[str, Any] | None = None) -> SearchNode:
    content = node.content
    if not isinstance(content, GenerationNodeContent) or not action.task_kind.is_generation:
        raise ExpansionError(f"{action.name} is not a generation action for node {node.id}")
    refined = ctx.ask(action.agent_role, [
        f"Original prompt: {content.original_prompt}",
        f"Current prompt: {content.node_prompt}",
        f"Evaluation report:\n{content.judgement}",
    ]).text.strip()
    if not refined:
        raise ExpansionError(f"{action.name} returned an empty prompt")
    request = MediaGenRequest(refined, action.task_kind.modality, params=dict(params or {}))
    artifact = ctx.gateway.generate_media(request).artifact
    # judged against what the user asked for, not against the rewritten prompt
    verdict = score_generation(ctx, artifact, content.original_prompt)
    child = GenerationNodeContent(content.original_prompt, refined, artifact, verdict.judgement.raw,
                                  scorer_error=verdict.scorer_error)
    return derive_child(node, action.name, child, verdict.score)


def selector_parts(node: SearchNode, candidates: Sequence[ActionSpec]) -> list[Part]:
    listing = "Available experts:\n" + render_candidates(candidates)
    c = node.content
    if isinstance(c, ReasoningNodeContent):
        parts: list[Part] = [*c.media, f"Question: {c.question}", f"Current answer: {c.node_answer}"]
        if c.auxiliary_items:
            parts.append("Expert outputs so far:\n" + _expert_lines(c.auxiliary_items))
        return parts + [listing]
    return [
        f"Prompt: {c.original_prompt}",
        f"Current generation prompt: {c.node_prompt}",
        c.node_answer,
        f"Diagnostic report:\n{c.judgement}",
        listing,
    ]


def select_action(ctx: AgentContext, node: SearchNode, candidates: Sequence[ActionSpec],
                  kind: TaskKind) -> tuple[ActionSpec, str]:
    """Ask the Selector for one of ``candidates``.

    One retry with a format reminder on unusable output, then the first
    candidate in catalog order. Returns the action and how it was chosen.
    """
    if not candidates:
        raise ValueError("select_action needs at least one candidate")
    role = selector_role(kind.is_generation)
    names = [a.name for a in candidates]
    by_name = {a.name: a for a in candidates}
    parts = selector_parts(node, candidates)
    reply = ctx.ask(role, parts)
    try:
        return by_name[parse_selector(reply.text, names).expert], "selector"
    except SelectorParseError as exc:
        logger.info("selector output rejected (%s); retrying", exc)
    retry = ctx.ask(role, parts, retry_of=(reply.text, SELECTOR_FORMAT_REMINDER))
    try:
        return by_name[parse_selector(retry.text, names).expert], "selector_retry"
    except SelectorParseError as exc:
        logger.info("selector output rejected twice (%s); using %s", exc, names[0])
    return candidates[0], "fallback"


class ReasoningExpander:
    def __init__(self, ctx: AgentContext, kind: TaskKind) -> None:
        if not kind.is_reasoning:
            raise ValueError(f"{kind} is not a reasoning kind")
        self.ctx = ctx
        self.kind = kind
        self.catalog = ctx.actions.catalog_for(kind)

    def apply(self, node: SearchNode, action: ActionSpec) -> SearchNode:
        return apply_reasoning_action(self.ctx, node, action)

    def select(self, node: SearchNode, candidates: Sequence[ActionSpec]) -> tuple[ActionSpec, str]:
        return select_action(self.ctx, node, candidates, self.kind)


class GenerationExpander:
    def __init__(self, ctx: AgentContext, kind: TaskKind, params: dict[str, Any] | None = None) -> None:
        if not kind.is_generation or kind.modality is Modality.TEXT:
            raise ValueError(f"{kind} is not a media generation kind")
        self.ctx = ctx
        self.kind = kind
        self.params = params
        self.catalog = ctx.actions.catalog_for(kind)

    def apply(self, node: SearchNode, action: ActionSpec) -> SearchNode:
        return apply_generation_action(self.ctx, node, action, self.params)

    def select(self, node: SearchNode, candidates: Sequence[ActionSpec]) -> tuple[ActionSpec, str]:
        return select_action(self.ctx, node, candidates, self.kind)
