"""Request/response contracts between the engine and model services."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Literal, Protocol, Sequence, Union, runtime_checkable

from ..core import MEDIA_MODALITIES, MediaRef, Modality
from ..errors import InvalidParams

Part = Union[str, MediaRef]


@dataclass(frozen=True)
class ChatMessage:
    role: Literal["user", "assistant"]
    parts: tuple[Part, ...]

    def __post_init__(self) -> None:
        if self.role not in ("user", "assistant"):
            raise ValueError(f"bad message role {self.role!r}")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def text(self) -> str:
        return "\n".join(p for p in self.parts if isinstance(p, str))

    @property
    def media(self) -> list[MediaRef]:
        return [p for p in self.parts if isinstance(p, MediaRef)]


def user(*parts: Part) -> ChatMessage:
    return ChatMessage("user", tuple(p for p in parts if p is not None and p != ""))


@dataclass(frozen=True)
class ChatRequest:
    role: str  # agent role name, e.g. "Summarizer"
    system_role: str  # the role's system prompt
    messages: tuple[ChatMessage, ...]
    want_token_probs: bool = False
    temperature: float = 0.0
    seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple(self.messages))
        if not any(m.role == "user" for m in self.messages):
            raise ValueError("a chat request needs at least one user message")
        for m in self.messages:
            if m.role != "user" and m.media:
                raise ValueError("media parts are only allowed on user messages")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @property
    def digest(self) -> str:
        return chat_digest(self.role, self.messages)

    def describe(self) -> dict[str, Any]:
        """Trace-friendly view; the system prompt is reduced to its hash."""
        return {
            "system_prompt_sha": hashlib.sha256(self.system_role.encode()).hexdigest()[:16],
            "messages": [
                {"role": m.role, "parts": [{"text": p} if isinstance(p, str) else {"media": p.to_dict()} for p in m.parts]}
                for m in self.messages
            ],
            "want_token_probs": self.want_token_probs,
            "temperature": self.temperature,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ChatResponse:
    text: str
    token_probs: tuple[float, ...] | None = None
    backend_id: str = ""

    def __post_init__(self) -> None:
        if self.token_probs is not None:
            object.__setattr__(self, "token_probs", tuple(float(p) for p in self.token_probs))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"text": self.text, "backend_id": self.backend_id}
        if self.token_probs is not None:
            out["token_probs"] = list(self.token_probs)
        return out


# Modality parameter schemas: name -> (type, default). Image is the
# single-frame case of the video model, so it shares the video schema.
_VIDEO_SCHEMA: dict[str, tuple[type, Any]] = {
    "frames": (int, 41),
    "width": (int, 832),
    "height": (int, 480),
    "steps": (int, 50),
    "guidance": (float, 5.0),
    "solver": (str, "unipc"),
    "fps": (int, 8),
}
_AUDIO_SCHEMA: dict[str, tuple[type, Any]] = {
    "steps": (int, 50),
    "duration_s": (float, 10.0),
    "sample_rate_hz": (int, 16000),
    "channels": (str, "mono"),
}
PARAM_SCHEMAS: dict[Modality, dict[str, tuple[type, Any]]] = {
    Modality.VIDEO: _VIDEO_SCHEMA,
    Modality.IMAGE: {**_VIDEO_SCHEMA, "frames": (int, 1)},
    Modality.AUDIO: _AUDIO_SCHEMA,
}


def default_params(modality: Modality) -> dict[str, Any]:
    return {k: default for k, (_, default) in PARAM_SCHEMAS[modality].items()}


def validate_params(modality: Modality, params: dict[str, Any] | None) -> dict[str, Any]:
    """Merge ``params`` over the modality defaults and check every value."""
    if modality not in PARAM_SCHEMAS:
        raise InvalidParams(f"no media generation for modality {modality.value!r}")
    schema = PARAM_SCHEMAS[modality]
    merged = default_params(modality)
    for key, value in (params or {}).items():
        if key not in schema:
            raise InvalidParams(f"unknown {modality.value} parameter {key!r}")
        typ = schema[key][0]
        if typ is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, typ) or isinstance(value, bool):
            raise InvalidParams(f"{modality.value} parameter {key!r} must be {typ.__name__}, got {value!r}")
        merged[key] = value
    for key, value in merged.items():
        if isinstance(value, (int, float)) and value <= 0:
            raise InvalidParams(f"{modality.value} parameter {key!r} must be positive")
    if modality is Modality.IMAGE and merged["frames"] != 1:
        raise InvalidParams("image generation is single-frame; frames must be 1")
    if modality is Modality.AUDIO and merged["channels"] not in ("mono", "stereo"):
        raise InvalidParams("channels must be 'mono' or 'stereo'")
    return merged


@dataclass(frozen=True)
class MediaGenRequest:
    prompt: str
    modality: Modality
    params: dict[str, Any] = field(default_factory=dict, hash=False)
    conditioning: MediaRef | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.modality not in MEDIA_MODALITIES:
            raise InvalidParams(f"cannot generate {self.modality.value}")
        object.__setattr__(self, "params", validate_params(self.modality, self.params))

    @property
    def role(self) -> str:
        return generator_role(self.modality)

    @property
    def digest(self) -> str:
        return media_digest(self)

    def describe(self) -> dict[str, Any]:
        return {
            "prompt": self.prompt,
            "modality": self.modality.value,
            "params": self.params,
            "conditioning": self.conditioning.to_dict() if self.conditioning else None,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class MediaGenResponse:
    artifact: MediaRef
    backend_id: str = ""


def generator_role(modality: Modality) -> str:
    return f"Generator({modality.value})"


def _sha(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def chat_digest(role: str, messages: Sequence[ChatMessage]) -> str:
    """Stable fixture key: role name, concatenated message text, media ids."""
    text = "\n".join(m.text for m in messages)
    media = [ref.id for m in messages for ref in m.media]
    return _sha([role, text, media])


def media_digest(request: MediaGenRequest) -> str:
    return _sha([
        request.role,
        request.prompt,
        request.params,
        request.seed,
        request.conditioning.id if request.conditioning else None,
    ])


def fixture_key(role: str, digest: str) -> str:
    return f"{role}|{digest}"


@runtime_checkable
class ChatBackend(Protocol):
    backend_id: str
    supports_token_probs: bool

    def chat(self, request: ChatRequest) -> ChatResponse: ...


@runtime_checkable
class MediaBackend(Protocol):
    backend_id: str

    def generate_media(self, request: MediaGenRequest, store: Any) -> MediaGenResponse: ...
