"""Parsers for the structured outputs agents are asked to produce.

All of them are pure functions. ``parse_selector`` and ``parse_score`` raise
typed errors so callers can apply their retry/fallback policies;
``parse_judgement`` never raises.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

from ..core import Modality, ScoreValue
from ..errors import EmptySelection, NoJsonFound, NoNumberFound, UnknownExpert

SELECTOR_KEY = "selected_experts"


@dataclass(frozen=True)
class SelectorChoice:
    expert: str


def _first_selector_object(text: str) -> dict | None:
    decoder = json.JSONDecoder()
    for match in re.finditer(r"\{", text):
        try:
            obj, _ = decoder.raw_decode(text, match.start())
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict) and SELECTOR_KEY in obj:
            return obj
    # the published prompt shows the pair without braces; accept that shape too
    bare = re.search(r'"%s"\s*:\s*(\[[^\]]*\])' % SELECTOR_KEY, text)
    if bare:
        try:
            return {SELECTOR_KEY: json.loads(bare.group(1))}
        except json.JSONDecodeError:
            return None
    return None


def parse_selector(text: str, candidates: Sequence[str]) -> SelectorChoice:
    if not candidates:
        raise ValueError("parse_selector needs at least one candidate")
    obj = _first_selector_object(text)
    if obj is None:
        raise NoJsonFound(f"no JSON object with {SELECTOR_KEY!r} in selector output: {text[:120]!r}")
    chosen = obj[SELECTOR_KEY]
    if isinstance(chosen, str):
        chosen = [chosen]
    if not isinstance(chosen, list) or not chosen or not isinstance(chosen[0], str) or not chosen[0].strip():
        raise EmptySelection(f"{SELECTOR_KEY} holds no expert name: {chosen!r}")
    name = chosen[0].strip()
    if name not in candidates:
        raise UnknownExpert(name)
    return SelectorChoice(expert=name)


_NUMBER = re.compile(r"(?<![\w.])-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")


def parse_score(text: str) -> ScoreValue:
    """First decimal literal in ``text``, clamped into [0, 1]."""
    match = _NUMBER.search(text)
    if match is None:
        raise NoNumberFound(f"no number in scorer output: {text[:120]!r}")
    return ScoreValue(float(match.group(0)))


def render_score(value: float) -> str:
    return f"{value:.2f}"


# (heading, optional abbreviation) per modality, in published order
JUDGEMENT_DIMENSIONS: dict[Modality, tuple[tuple[str, str | None], ...]] = {
    Modality.IMAGE: (
        ("Object Presence", None),
        ("Counting", None),
        ("Color Matching", None),
        ("Position Relation", None),
        ("Attribute Binding", None),
        ("Complex Compliance", None),
    ),
    Modality.VIDEO: tuple((name, None) for name in (
        "Subject Consistency", "Background Consistency", "Temporal Flickering", "Motion Smoothness",
        "Dynamic Degree", "Aesthetic Quality", "Imaging Quality", "Object Class Accuracy", "Multiple Objects",
        "Human Action Accuracy", "Color Matching", "Spatial Relationship", "Scene Accuracy",
        "Temporal Style Consistency", "Appearance Style Consistency", "Overall Consistency",
    )),
    Modality.AUDIO: (
        ("Content Enjoyment", "CE"),
        ("Content Usefulness", "CU"),
        ("Production Complexity", "PC"),
        ("Production Quality", "PQ"),
        ("Semantic Alignment", None),
    ),
    Modality.TEXT: (
        ("Correctness", None),
        ("Completeness", None),
        ("Grounding", None),
    ),
}


def dimension_names(modality: Modality) -> list[str]:
    return [f"{name} ({abbr})" if abbr else name for name, abbr in JUDGEMENT_DIMENSIONS[modality]]


@dataclass(frozen=True)
class JudgementReport:
    dimensions: tuple[tuple[str, str], ...]
    raw: str

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.dimensions]


def _heading_pattern(name: str, abbr: str | None) -> re.Pattern[str]:
    words = r"\s+".join(re.escape(w) for w in name.split())
    abbr_part = rf"(?:\s*\(\s*{re.escape(abbr)}\s*\))?" if abbr else ""
    return re.compile(
        rf"^[ \t]*(?:[-*•#>]+[ \t]*)?(?:\(?\d{{1,2}}[.)][ \t]*)?(?:\*\*|__)?"
        rf"{words}{abbr_part}(?:\*\*|__)?[ \t]*(?::|：|–|—|-)(?:\*\*|__)?",
        re.IGNORECASE | re.MULTILINE,
    )


_PATTERNS = {
    modality: [(display, _heading_pattern(name, abbr))
               for display, (name, abbr) in zip(dimension_names(modality), dims)]
    for modality, dims in JUDGEMENT_DIMENSIONS.items()
}


def parse_judgement(text: str, modality: Modality) -> JudgementReport:
    """Split a judger report on the modality's dimension headings.

    Sections come back in the order they appear. Text before the first
    heading stays only in ``raw``; a report with no headings yields no
    dimensions.
    """
    found: list[tuple[int, int, str]] = []
    for display, pattern in _PATTERNS.get(modality, []):
        m = pattern.search(text)
        if m:
            found.append((m.start(), m.end(), display))
    found.sort()
    sections = []
    for i, (_, end, display) in enumerate(found):
        stop = found[i + 1][0] if i + 1 < len(found) else len(text)
        sections.append((display, text[end:stop].strip()))
    return JudgementReport(dimensions=tuple(sections), raw=text)
