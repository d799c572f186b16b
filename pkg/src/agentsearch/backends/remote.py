"""HTTP clients for remote model services.

Chat speaks the OpenAI-compatible ``/chat/completions`` dialect with
``logprobs`` enabled; per-token log-probabilities are converted to
probabilities. Media generation is a small bespoke protocol:
``POST /generate`` returns an ``artifact_url`` which is polled until the
artifact is ready.
"""
from __future__ import annotations

import base64
import logging
import math
import os
import sys
import time
from typing import Any
from urllib.parse import urljoin, urlparse

import httpx

from ..core import MediaRef, Modality
from ..errors import BackendError, ConfigError, TransportError
from ..store import ArtifactStore
from .base import ChatRequest, ChatResponse, MediaGenRequest, MediaGenResponse

logger = logging.getLogger(__name__)

_MIME = {
    Modality.IMAGE: "image/png",
    Modality.VIDEO: "video/mp4",
    Modality.AUDIO: "audio/wav",
}


def _auth_headers(api_key_env: str | None) -> dict[str, str]:
    if not api_key_env:
        return {}
    token = os.environ.get(api_key_env)
    if not token:
        raise ConfigError(f"environment variable {api_key_env} is not set")
    return {"Authorization": f"Bearer {token}"}


def _check(response: httpx.Response, what: str) -> None:
    if response.status_code >= 500:
        raise TransportError(f"{what}: HTTP {response.status_code}")
    if response.status_code >= 400:
        raise BackendError(f"{what}: HTTP {response.status_code}: {response.text[:200]}")


def logprobs_to_probs(choice: dict[str, Any]) -> tuple[float, ...] | None:
    lp = choice.get("logprobs")
    if not lp:
        return None
    if isinstance(lp.get("content"), list):
        values = [item["logprob"] for item in lp["content"]]
    elif isinstance(lp.get("token_logprobs"), list):
        values = [v for v in lp["token_logprobs"] if v is not None]
    else:
        return None
    # exp() of a very negative logprob underflows to 0, which is outside (0, 1]
    return tuple(min(1.0, max(math.exp(v), sys.float_info.min)) for v in values)


class RemoteChatBackend:
    def __init__(self, base_url: str, model: str, store: ArtifactStore | None = None, *,
                 api_key_env: str | None = None, timeout_s: float = 120.0,
                 supports_token_probs: bool = True, client: httpx.Client | None = None) -> None:
        self.base_url = base_url.rstrip("/") + "/"
        self.model = model
        self.store = store
        self.supports_token_probs = supports_token_probs
        self.backend_id = f"remote-chat:{model}"
        self._headers = _auth_headers(api_key_env)
        self._client = client or httpx.Client(timeout=timeout_s)

    def _part(self, part: str | MediaRef) -> dict[str, Any]:
        if isinstance(part, str):
            return {"type": "text", "text": part}
        if self.store is None:
            raise BackendError("remote chat needs an artifact store to send media")
        b64 = base64.b64encode(self.store.read(part)).decode("ascii")
        if part.modality is Modality.AUDIO:
            return {"type": "input_audio", "input_audio": {"data": b64, "format": part.uri.rsplit(".", 1)[-1]}}
        kind = "video_url" if part.modality is Modality.VIDEO else "image_url"
        return {"type": kind, kind: {"url": f"data:{_MIME[part.modality]};base64,{b64}"}}

    def build_body(self, request: ChatRequest) -> dict[str, Any]:
        messages: list[dict[str, Any]] = [{"role": "system", "content": request.system_role}]
        for m in request.messages:
            messages.append({"role": m.role, "content": [self._part(p) for p in m.parts]})
        body: dict[str, Any] = {
            "model": self.model,
            "messages": messages,
            "logprobs": bool(request.want_token_probs and self.supports_token_probs),
            "temperature": request.temperature,
        }
        if request.seed is not None:
            body["seed"] = request.seed
        return body

    def chat(self, request: ChatRequest) -> ChatResponse:
        url = urljoin(self.base_url, "chat/completions")
        try:
            response = self._client.post(url, json=self.build_body(request), headers=self._headers)
        except httpx.HTTPError as exc:
            raise TransportError(f"chat: {exc}") from exc
        _check(response, "chat")
        try:
            choice = response.json()["choices"][0]
        except (ValueError, KeyError, IndexError) as exc:
            raise BackendError(f"chat: malformed response body: {exc}") from exc
        text = choice.get("text")
        if text is None:
            text = (choice.get("message") or {}).get("content") or ""
        probs = logprobs_to_probs(choice) if request.want_token_probs else None
        return ChatResponse(text=text, token_probs=probs, backend_id=self.backend_id)


class RemoteMediaBackend:
    def __init__(self, base_url: str, *, api_key_env: str | None = None, timeout_s: float = 600.0,
                 poll_interval_s: float = 2.0, max_polls: int = 300, client: httpx.Client | None = None) -> None:
        self.base_url = base_url.rstrip("/") + "/"
        self.backend_id = f"remote-media:{urlparse(base_url).netloc}"
        self.poll_interval_s = poll_interval_s
        self.max_polls = max_polls
        self._headers = _auth_headers(api_key_env)
        self._client = client or httpx.Client(timeout=timeout_s)

    def generate_media(self, request: MediaGenRequest, store: ArtifactStore) -> MediaGenResponse:
        body: dict[str, Any] = {
            "prompt": request.prompt,
            "modality": request.modality.value,
            "params": request.params,
            "seed": request.seed,
        }
        if request.conditioning is not None:
            body["conditioning_b64"] = base64.b64encode(store.read(request.conditioning)).decode("ascii")
        try:
            response = self._client.post(urljoin(self.base_url, "generate"), json=body, headers=self._headers)
            _check(response, "generate")
            artifact_url = urljoin(self.base_url, response.json()["artifact_url"])
            data = self._poll(artifact_url)
        except httpx.HTTPError as exc:
            raise TransportError(f"generate: {exc}") from exc
        except (ValueError, KeyError) as exc:
            raise BackendError(f"generate: malformed response body: {exc}") from exc
        suffix = urlparse(artifact_url).path.rsplit(".", 1)
        ext = suffix[1] if len(suffix) == 2 and "/" not in suffix[1] else None
        meta = {k: str(v) for k, v in request.params.items()}
        ref = store.put(data, request.modality, ext=ext, meta=meta)
        return MediaGenResponse(artifact=ref, backend_id=self.backend_id)

    def _poll(self, url: str) -> bytes:
        for _ in range(self.max_polls):
            response = self._client.get(url, headers=self._headers)
            if response.status_code in (202, 404):
                time.sleep(self.poll_interval_s)
                continue
            _check(response, "artifact fetch")
            return response.content
        raise TransportError(f"artifact {url} not ready after {self.max_polls} polls")
