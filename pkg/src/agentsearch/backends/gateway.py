"""The single door every model call goes through.

The gateway adds what individual backends should not have to care about:
bounded retries on transport failures, one BackendCall trace event per
attempt, capability checks for token probabilities, and filling unset seeds
from the run-level generator.
"""
from __future__ import annotations

import dataclasses
import logging
import random
import threading
import time

from ..errors import BackendError, TransportError, UnsupportedCapability
from ..store import ArtifactStore
from ..trace import EventKind, Tracer
from .base import ChatBackend, ChatRequest, ChatResponse, MediaBackend, MediaGenRequest, MediaGenResponse

logger = logging.getLogger(__name__)


class Gateway:
    def __init__(
        self,
        chat_backend: ChatBackend,
        media_backend: MediaBackend | None,
        store: ArtifactStore,
        *,
        tracer: Tracer | None = None,
        max_retries: int = 2,
        probs_fallback_configured: bool = True,
        rng: random.Random | None = None,
        retry_backoff_s: float = 0.0,
    ) -> None:
        self.chat_backend = chat_backend
        self.media_backend = media_backend
        self.store = store
        self.tracer = tracer or Tracer(deterministic=True)
        self.max_retries = max_retries
        self.probs_fallback_configured = probs_fallback_configured
        self.retry_backoff_s = retry_backoff_s
        self._rng = rng
        self._rng_lock = threading.Lock()

    def _draw_seed(self) -> int | None:
        if self._rng is None:
            return None
        with self._rng_lock:
            return self._rng.randrange(2**31)

    def _attempts(self, op, role, digest, describe, call):
        last_error: Exception | None = None
        for attempt in range(1, self.max_retries + 2):
            try:
                result = call()
            except TransportError as exc:
                last_error = exc
                self.tracer.emit(EventKind.BACKEND_CALL, op=op, role=role, digest=digest, attempt=attempt,
                                 ok=False, error=str(exc), request=describe)
                logger.warning("%s %s attempt %d failed: %s", op, role, attempt, exc)
                if self.retry_backoff_s and attempt <= self.max_retries:
                    time.sleep(self.retry_backoff_s * 2 ** (attempt - 1))
                continue
            except BackendError as exc:
                self.tracer.emit(EventKind.BACKEND_CALL, op=op, role=role, digest=digest, attempt=attempt,
                                 ok=False, error=str(exc), request=describe)
                raise
            return attempt, result
        raise TransportError(f"{op} {role}: retries exhausted ({last_error})")

    def chat(self, request: ChatRequest) -> ChatResponse:
        if request.want_token_probs and not self.chat_backend.supports_token_probs \
                and not self.probs_fallback_configured:
            raise UnsupportedCapability(
                f"backend {self.chat_backend.backend_id} cannot return token probabilities and no fallback is configured")
        if request.seed is None:
            seed = self._draw_seed()
            if seed is not None:
                request = dataclasses.replace(request, seed=seed)
        describe = request.describe()
        attempt, response = self._attempts("chat", request.role, request.digest, describe,
                                           lambda: self.chat_backend.chat(request))
        self.tracer.emit(EventKind.BACKEND_CALL, op="chat", role=request.role, digest=request.digest,
                         attempt=attempt, ok=True, request=describe, response=response.to_dict())
        return response

    def generate_media(self, request: MediaGenRequest) -> MediaGenResponse:
        if self.media_backend is None:
            raise BackendError("no media backend configured")
        if request.seed is None:
            seed = self._draw_seed()
            if seed is not None:
                request = dataclasses.replace(request, seed=seed)
        describe = request.describe()
        attempt, response = self._attempts("generate_media", request.role, request.digest, describe,
                                           lambda: self.media_backend.generate_media(request, self.store))
        if response.artifact.modality is not request.modality:
            raise BackendError(
                f"backend returned {response.artifact.modality.value} for a {request.modality.value} request")
        self.tracer.emit(EventKind.BACKEND_CALL, op="generate_media", role=request.role, digest=request.digest,
                         attempt=attempt, ok=True, request=describe,
                         response={"artifact": response.artifact.to_dict(), "backend_id": response.backend_id})
        return response
