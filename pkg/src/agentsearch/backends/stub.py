"""Placeholder media generator for offline runs."""
from __future__ import annotations

import json

from ..store import ArtifactStore
from .base import MediaGenRequest, MediaGenResponse


class StubMediaBackend:
    """Writes a small JSON placeholder instead of real media.

    The bytes are a pure function of (prompt, modality, params, seed,
    conditioning), so the store's content addressing gives identical
    requests identical uris.
    """

    backend_id = "stub-media"

    def generate_media(self, request: MediaGenRequest, store: ArtifactStore) -> MediaGenResponse:
        body = {
            "placeholder": True,
            "modality": request.modality.value,
            "prompt": request.prompt,
            "params": request.params,
            "seed": request.seed,
            "conditioning": request.conditioning.id if request.conditioning else None,
        }
        data = json.dumps(body, sort_keys=True, ensure_ascii=False).encode("utf-8")
        meta = {k: str(v) for k, v in request.params.items()}
        meta["placeholder"] = "true"
        ref = store.put(data, request.modality, ext="json", meta=meta)
        return MediaGenResponse(artifact=ref, backend_id=self.backend_id)
