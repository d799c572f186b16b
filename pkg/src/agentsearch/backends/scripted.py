"""Deterministic backends: fixture lookup, recording, replay, callables.

Fixture files are JSON objects mapping ``"<role>|<digest>"`` to either a
chat response ``{"text": ..., "token_probs": [...]}`` or a media artifact
``{"artifact_bytes_b64": ..., "meta": {...}, "ext": ...}``. The reserved
top-level key ``"tasks"`` may carry a list of reasoning tasks for the
threshold sweep; it is ignored by the backend itself.
"""
from __future__ import annotations

import base64
import json
import threading
from collections import defaultdict, deque
from pathlib import Path
from typing import Any, Callable, Union

from ..core import MediaRef
from ..errors import FixtureError, MissingFixture
from ..store import ArtifactStore
from ..trace import EventKind, read_trace
from .base import (
    ChatRequest,
    ChatResponse,
    MediaBackend,
    MediaGenRequest,
    MediaGenResponse,
    fixture_key,
)

RESERVED_KEYS = ("tasks",)


def _reject_duplicates(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in pairs:
        if key in out:
            raise FixtureError(f"duplicate fixture key {key!r}")
        out[key] = value
    return out


def read_fixture_file(path: str | Path) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"), object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise FixtureError(f"{path}: fixture file must hold a JSON object")
    return data


class ScriptedBackend:
    """Chat and media responses looked up by (role, input digest).

    Misses raise :class:`MissingFixture`, except media misses when a
    ``media_fallback`` is given (offline runs use the stub generator there).
    """

    backend_id = "scripted"
    supports_token_probs = True

    def __init__(self, entries: dict[str, Any], *, media_fallback: MediaBackend | None = None) -> None:
        self.entries: dict[str, dict[str, Any]] = {}
        for key, value in entries.items():
            if key in RESERVED_KEYS:
                continue
            role, sep, digest = key.rpartition("|")
            if not sep or not role or not digest:
                raise FixtureError(f"fixture key {key!r} is not of the form 'role|digest'")
            if not isinstance(value, dict) or not ({"text", "artifact_bytes_b64"} & value.keys()):
                raise FixtureError(f"fixture {key!r} needs 'text' or 'artifact_bytes_b64'")
            self.entries[key] = value
        self.media_fallback = media_fallback

    def _lookup(self, role: str, digest: str) -> dict[str, Any]:
        try:
            return self.entries[fixture_key(role, digest)]
        except KeyError:
            raise MissingFixture(role, digest) from None

    def chat(self, request: ChatRequest) -> ChatResponse:
        entry = self._lookup(request.role, request.digest)
        if "text" not in entry:
            raise FixtureError(f"fixture for {request.role} is not a chat response")
        probs = entry.get("token_probs")
        return ChatResponse(text=entry["text"], token_probs=None if probs is None else tuple(probs),
                            backend_id=self.backend_id)

    def generate_media(self, request: MediaGenRequest, store: ArtifactStore) -> MediaGenResponse:
        try:
            entry = self._lookup(request.role, request.digest)
        except MissingFixture:
            if self.media_fallback is None:
                raise
            return self.media_fallback.generate_media(request, store)
        data = base64.b64decode(entry["artifact_bytes_b64"])
        ref = store.put(data, request.modality, ext=entry.get("ext"), meta=entry.get("meta") or {})
        return MediaGenResponse(artifact=ref, backend_id=self.backend_id)


def scripted_backend_load(fixture_file: str | Path, *, media_fallback: MediaBackend | None = None) -> ScriptedBackend:
    return ScriptedBackend(read_fixture_file(fixture_file), media_fallback=media_fallback)


ChatFn = Callable[[ChatRequest], Union[ChatResponse, str, tuple]]


class CallableChatBackend:
    """Adapts a plain function into a chat backend.

    The function may return a ChatResponse, a string, or ``(text, probs)``.
    """

    backend_id = "callable"

    def __init__(self, fn: ChatFn, *, supports_token_probs: bool = True) -> None:
        self.fn = fn
        self.supports_token_probs = supports_token_probs

    def chat(self, request: ChatRequest) -> ChatResponse:
        out = self.fn(request)
        if isinstance(out, ChatResponse):
            return out
        if isinstance(out, tuple):
            text, probs = out
            return ChatResponse(text=text, token_probs=probs, backend_id=self.backend_id)
        return ChatResponse(text=str(out), backend_id=self.backend_id)


class RecordingBackend:
    """Passes calls through to real backends and remembers them as fixtures."""

    def __init__(self, chat_backend, media_backend: MediaBackend | None = None) -> None:
        self.chat_backend = chat_backend
        self.media_backend = media_backend
        self.backend_id = f"recording({chat_backend.backend_id})"
        self.supports_token_probs = chat_backend.supports_token_probs
        self.entries: dict[str, dict[str, Any]] = {}
        self._lock = threading.Lock()

    def chat(self, request: ChatRequest) -> ChatResponse:
        response = self.chat_backend.chat(request)
        entry: dict[str, Any] = {"text": response.text}
        if response.token_probs is not None:
            entry["token_probs"] = list(response.token_probs)
        with self._lock:
            self.entries.setdefault(fixture_key(request.role, request.digest), entry)
        return response

    def generate_media(self, request: MediaGenRequest, store: ArtifactStore) -> MediaGenResponse:
        if self.media_backend is None:
            raise FixtureError("recording backend has no media backend")
        response = self.media_backend.generate_media(request, store)
        ref = response.artifact
        entry = {
            "artifact_bytes_b64": base64.b64encode(store.read(ref)).decode("ascii"),
            "meta": dict(ref.meta),
            "ext": ref.uri.rsplit(".", 1)[-1],
        }
        with self._lock:
            self.entries.setdefault(fixture_key(request.role, request.digest), entry)
        return response

    def fixtures(self, tasks: list[dict[str, Any]] | None = None) -> dict[str, Any]:
        out: dict[str, Any] = dict(sorted(self.entries.items()))
        if tasks is not None:
            out["tasks"] = tasks
        return out

    def dump(self, path: str | Path, tasks: list[dict[str, Any]] | None = None) -> None:
        Path(path).write_text(json.dumps(self.fixtures(tasks), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
                              encoding="utf-8")


class ReplayBackend:
    """Serves the successful BackendCall responses recorded in a run's trace.

    Responses are queued per (role, digest) in trace order; when a queue has
    a single entry left it keeps answering with it. Media artifacts are
    copied out of the recorded run's artifact store.
    """

    backend_id = "replay"
    supports_token_probs = True

    def __init__(self, run_dir: str | Path) -> None:
        self.source = ArtifactStore(run_dir)
        _, events = read_trace(Path(run_dir) / "trace.jsonl")
        self._queues: dict[str, deque] = defaultdict(deque)
        for event in events:
            p = event.payload
            if event.kind is EventKind.BACKEND_CALL and p.get("ok"):
                self._queues[fixture_key(p["role"], p["digest"])].append(p["response"])
        self._lock = threading.Lock()

    def _next(self, role: str, digest: str) -> dict[str, Any]:
        with self._lock:
            queue = self._queues.get(fixture_key(role, digest))
            if not queue:
                raise MissingFixture(role, digest)
            return queue.popleft() if len(queue) > 1 else queue[0]

    def chat(self, request: ChatRequest) -> ChatResponse:
        rec = self._next(request.role, request.digest)
        probs = rec.get("token_probs")
        return ChatResponse(text=rec["text"], token_probs=None if probs is None else tuple(probs),
                            backend_id=self.backend_id)

    def generate_media(self, request: MediaGenRequest, store: ArtifactStore) -> MediaGenResponse:
        rec = self._next(request.role, request.digest)
        original = MediaRef.from_dict(rec["artifact"])
        ext = original.uri.rsplit(".", 1)[-1]
        ref = store.put(self.source.read(original), original.modality, ext=ext, meta=dict(original.meta))
        return MediaGenResponse(artifact=ref, backend_id=self.backend_id)
