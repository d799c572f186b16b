"""Content-addressed artifact store rooted in a run directory."""
from __future__ import annotations

import hashlib
import threading
from pathlib import Path

from .core import MediaRef, Modality

ARTIFACT_DIR = "artifacts"

DEFAULT_EXTENSIONS = {
    Modality.IMAGE: "png",
    Modality.VIDEO: "mp4",
    Modality.AUDIO: "wav",
    Modality.TEXT: "txt",
}


class ArtifactStore:
    """Writes are serialised; ids are derived from (modality, bytes)."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self._lock = threading.Lock()

    def put(self, data: bytes, modality: Modality, *, ext: str | None = None,
            meta: dict[str, str] | None = None) -> MediaRef:
        digest = hashlib.sha256(modality.value.encode() + b"\0" + data).hexdigest()[:20]
        ext = (ext or DEFAULT_EXTENSIONS[modality]).lstrip(".")
        uri = f"{ARTIFACT_DIR}/{digest}.{ext}"
        path = self.root / uri
        with self._lock:
            if not path.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(path.suffix + ".tmp")
                tmp.write_bytes(data)
                tmp.replace(path)
        return MediaRef(id=digest, modality=modality, uri=uri, meta={k: str(v) for k, v in (meta or {}).items()})

    def import_file(self, source: str | Path, modality: Modality) -> MediaRef:
        source = Path(source)
        ext = source.suffix.lstrip(".") or None
        return self.put(source.read_bytes(), modality, ext=ext, meta={"source_name": source.name})

    def path(self, ref: MediaRef) -> Path:
        return self.root / ref.uri

    def exists(self, ref: MediaRef) -> bool:
        return self.path(ref).is_file()

    def read(self, ref: MediaRef) -> bytes:
        return self.path(ref).read_bytes()
