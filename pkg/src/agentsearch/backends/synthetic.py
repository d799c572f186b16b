"""A model-free chat backend for demos and for authoring fixture files.

Every reply is a pure function of (seed, role, request digest), so two runs
with the same inputs see the same landscape. Replies have the right shape
for each role (selector JSON, plan JSON, judger headings, a bare score) but
carry no meaning.
"""
from __future__ import annotations

import hashlib
import json
import re

from ..core import Modality
from ..roles.parsing import dimension_names
from .base import ChatRequest, ChatResponse

_KEYWORDS = {
    Modality.IMAGE: ("image", "picture", "photo", "draw", "painting", "illustration", "poster"),
    Modality.VIDEO: ("video", "clip", "animation", "footage", "movie"),
    Modality.AUDIO: ("audio", "sound", "music", "song", "melody", "narration", "soundtrack"),
}
_VERDICTS = ("fully satisfied.", "mostly satisfied with minor issues.", "partially satisfied.",
             "noticeably flawed.", "not satisfied.")
_ROLE_MODALITY = re.compile(r"\((image|video|audio|text)\)$")


def keyword_modalities(instruction: str) -> list[Modality]:
    """Media modalities an instruction mentions, in a fixed order."""
    words = set(re.findall(r"[a-z]+", instruction.lower()))
    found = []
    for modality, keys in _KEYWORDS.items():
        if any(k in words or k + "s" in words for k in keys):
            found.append(modality)
    return found


class SyntheticChatBackend:
    backend_id = "synthetic"

    def __init__(self, seed: int = 0, *, supports_token_probs: bool = True,
                 score_range: tuple[float, float] = (0.2, 0.95)) -> None:
        self.seed = seed
        self.supports_token_probs = supports_token_probs
        self.low, self.high = score_range

    def _unit(self, request: ChatRequest, salt: str = "") -> float:
        h = hashlib.sha256(f"{self.seed}|{request.role}|{request.digest}|{salt}".encode()).digest()
        return int.from_bytes(h[:8], "big") / 2**64

    def _score(self, request: ChatRequest, salt: str = "") -> float:
        return self.low + (self.high - self.low) * self._unit(request, salt)

    def chat(self, request: ChatRequest) -> ChatResponse:
        role = request.role
        text = "\n".join(m.text for m in request.messages if m.role == "user")
        probs = None
        if role.startswith("Selector"):
            out = self._select(request, text)
        elif role.startswith("Scorer"):
            out = f"{self._score(request):.2f}"
        elif role.startswith("Judger"):
            out = self._judge(request)
        elif role == "Planner":
            out = self._plan(text)
        elif role == "Reflector":
            out = json.dumps({"approved": True, "notes": ""})
        elif role == "Perceiver":
            out = f"The user asks: {_first_line(text)}"
        elif role == "Speaker":
            out = "Here is what was produced for your request.\n" + _first_line(text)
        elif role.startswith("PromptExtender"):
            out = f"{_after(text, 'Prompt:')}, richly detailed, coherent composition, natural lighting"
        elif role in ("GeneralAnswer", "Summarizer"):
            letter = "ABCD"[int(self._unit(request, "letter") * 4)]
            out = f"The answer is {letter}."
            probs = self._probs(request)
        elif role.endswith("augmenter"):
            out = f"Supporting content for: {_after(text, 'Question:')}"
        elif "Current prompt:" in text:
            out = f"{_after(text, 'Current prompt:')}, refined for {role.replace('_', ' ')}"
        else:
            out = f"Observations from {role.replace('_', ' ')} on: {_after(text, 'Question:')}"
        if probs is not None and not (request.want_token_probs and self.supports_token_probs):
            probs = None
        return ChatResponse(text=out, token_probs=probs, backend_id=self.backend_id)

    def _probs(self, request: ChatRequest) -> tuple[float, ...]:
        n = 3 + int(self._unit(request, "n") * 6)
        return tuple(round(self._score(request, f"p{i}"), 6) for i in range(n))

    def _select(self, request: ChatRequest, text: str) -> str:
        _, _, listing = text.partition("Available experts:")
        names = [line.split(":", 1)[0].strip() for line in listing.strip().splitlines() if ":" in line]
        if not names:
            return "No experts were offered."
        pick = names[int(self._unit(request, "pick") * len(names))]
        return json.dumps({"selected_experts": [pick]})

    def _judge(self, request: ChatRequest) -> str:
        m = _ROLE_MODALITY.search(request.role)
        modality = Modality(m.group(1)) if m else Modality.TEXT
        return "\n".join(f"{name}: {_VERDICTS[int(self._unit(request, name) * len(_VERDICTS))]}"
                         for name in dimension_names(modality))

    def _plan(self, text: str) -> str:
        instruction = _after(text, "Instruction:")
        steps = [{"kind": "generate", "modality": m.value, "prompt": instruction}
                 for m in keyword_modalities(instruction)]
        if not steps or instruction.rstrip().endswith("?"):
            attached = re.findall(r"^- \S+ \((image|video|audio|text)\)$", text, re.MULTILINE)
            steps.insert(0, {"kind": "understand", "modality": attached[0] if attached else "text",
                             "prompt": instruction})
        return json.dumps({"intent": instruction, "steps": steps})


def _first_line(text: str) -> str:
    return text.strip().splitlines()[0] if text.strip() else ""


def _after(text: str, label: str) -> str:
    for line in text.splitlines():
        if line.startswith(label):
            return line[len(label):].strip()
    return _first_line(text)
