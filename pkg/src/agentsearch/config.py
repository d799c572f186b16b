"""TOML configuration with ``${ENV}`` interpolation.

Example::

    runs_dir = "runs"
    seed = 7
    deterministic_trace = true

    [backend.chat]
    kind = "remote"
    base_url = "http://localhost:8000/v1"
    model = "omni-7b"
    api_key_env = "CHAT_API_KEY"

    [backend.media]
    kind = "remote"
    base_url = "http://localhost:9000"

    [search.reasoning]
    threshold = 0.7
    beam_width = 3

    [search."generation:video"]
    threshold = 0.6
    max_depth = 2
"""
from __future__ import annotations

import dataclasses
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import tomli

from .backends.base import validate_params
from .core import DEFAULT_GENERATION_CONFIG, DEFAULT_REASONING_CONFIG, Modality, SearchConfig, TaskKind
from .errors import ConfigError, InvalidParams
from .orchestrator import RunSettings
from .scoring import ProbsFallback

CHAT_KINDS = ("remote", "scripted", "synthetic")
MEDIA_KINDS = ("remote", "scripted", "stub")
_ENV = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass(frozen=True)
class BackendConfig:
    kind: str
    base_url: str | None = None
    model: str | None = None
    api_key_env: str | None = None  # name of the variable holding the key, never the key itself
    timeout_s: float = 120.0
    supports_token_probs: bool = True
    poll_interval_s: float = 2.0


@dataclass(frozen=True)
class Config:
    chat: BackendConfig = BackendConfig("scripted")
    media: BackendConfig = BackendConfig("stub")
    fixtures: Path | None = None
    role_overrides: Path | None = None
    catalog_extension: Path | None = None
    settings: RunSettings = field(default_factory=RunSettings)
    runs_dir: Path = Path("runs")
    deterministic_trace: bool = False
    seed: int = 0
    offline: bool = False
    synthetic_seed: int = 0

    def validate(self) -> None:
        if self.chat.kind not in CHAT_KINDS:
            raise ConfigError(f"backend.chat.kind must be one of {CHAT_KINDS}, got {self.chat.kind!r}")
        if self.media.kind not in MEDIA_KINDS:
            raise ConfigError(f"backend.media.kind must be one of {MEDIA_KINDS}, got {self.media.kind!r}")
        for name, b in (("chat", self.chat), ("media", self.media)):
            if b.kind == "remote" and not self.offline and not b.base_url:
                raise ConfigError(f"backend.{name}.base_url is required for a remote backend")
        if self.chat.kind == "remote" and not self.offline and not self.chat.model:
            raise ConfigError("backend.chat.model is required for a remote chat backend")
        uses_fixtures = self.chat.kind == "scripted" or self.media.kind == "scripted" or (
            self.offline and self.chat.kind == "remote")
        if uses_fixtures and self.fixtures is None:
            raise ConfigError("scripted backends and --offline runs need a fixture file (--fixtures)")
        if self.fixtures is not None and not self.fixtures.is_file():
            raise ConfigError(f"fixture file not found: {self.fixtures}")
        for label, path in (("role_overrides", self.role_overrides), ("catalog_extension", self.catalog_extension)):
            if path is not None and not path.is_file():
                raise ConfigError(f"{label} file not found: {path}")


def interpolate(value: Any) -> Any:
    """Replace ``${NAME}`` in every string with the environment variable's value."""
    if isinstance(value, str):
        def sub(m: re.Match) -> str:
            name = m.group(1)
            if name not in os.environ:
                raise ConfigError(f"environment variable {name} is not set")
            return os.environ[name]
        return _ENV.sub(sub, value)
    if isinstance(value, dict):
        return {k: interpolate(v) for k, v in value.items()}
    if isinstance(value, list):
        return [interpolate(v) for v in value]
    return value


def _search_config(raw: Any, base: SearchConfig, where: str) -> SearchConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"[{where}] must be a table")
    known = {f.name for f in dataclasses.fields(SearchConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"[{where}] has unknown keys {sorted(unknown)}")
    try:
        return dataclasses.replace(base, **raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}]: {exc}") from None


def _backend(raw: Any, default_kind: str, where: str) -> BackendConfig:
    if raw is None:
        return BackendConfig(default_kind)
    if not isinstance(raw, dict):
        raise ConfigError(f"[{where}] must be a table")
    known = {f.name for f in dataclasses.fields(BackendConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"[{where}] has unknown keys {sorted(unknown)}")
    return BackendConfig(**{"kind": default_kind, **raw})


def _path(raw: Any, base: Path) -> Path | None:
    if raw is None or raw == "":
        return None
    p = Path(str(raw)).expanduser()
    return p if p.is_absolute() else base / p


_TOP_KEYS = {"runs_dir", "seed", "deterministic_trace", "offline", "fixtures", "role_overrides",
             "catalog_extension", "probs_fallback", "max_rounds", "extend_prompts", "parallel_steps",
             "synthetic_seed", "backend", "search", "media_params"}


def config_from_dict(data: dict[str, Any], base_dir: Path = Path(".")) -> Config:
    data = interpolate(data)
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    backends = data.get("backend") or {}
    search = dict(data.get("search") or {})
    reasoning = _search_config(search.pop("reasoning", {}), DEFAULT_REASONING_CONFIG, "search.reasoning")
    generation = _search_config(search.pop("generation", {}), DEFAULT_GENERATION_CONFIG, "search.generation")
    per_kind = {}
    for label, raw in search.items():
        try:
            kind = TaskKind.parse(label)
        except ValueError as exc:
            raise ConfigError(f"[search.{label}]: {exc}") from None
        per_kind[str(kind)] = _search_config(raw, reasoning if kind.is_reasoning else generation, f"search.{label}")
    media_params = {}
    for label, raw in (data.get("media_params") or {}).items():
        try:
            modality = Modality.parse(label)
            validate_params(modality, raw)
        except (ValueError, InvalidParams) as exc:
            raise ConfigError(f"[media_params.{label}]: {exc}") from None
        media_params[modality.value] = dict(raw)
    try:
        fallback = ProbsFallback.parse(str(data.get("probs_fallback", "judge_score")))
        settings = RunSettings(
            reasoning=reasoning,
            generation=generation,
            search=per_kind,
            max_rounds=int(data.get("max_rounds", 3)),
            extend_prompts=bool(data.get("extend_prompts", True)),
            media_params=media_params,
            parallel_steps=bool(data.get("parallel_steps", False)),
            probs_fallback=fallback,
        )
        if settings.max_rounds < 0:
            raise ValueError("max_rounds must be >= 0")
        return Config(
            chat=_backend(backends.get("chat"), "scripted", "backend.chat"),
            media=_backend(backends.get("media"), "stub", "backend.media"),
            fixtures=_path(data.get("fixtures"), base_dir),
            role_overrides=_path(data.get("role_overrides"), base_dir),
            catalog_extension=_path(data.get("catalog_extension"), base_dir),
            settings=settings,
            runs_dir=_path(data.get("runs_dir", "runs"), base_dir),
            deterministic_trace=bool(data.get("deterministic_trace", False)),
            seed=int(data.get("seed", 0)),
            offline=bool(data.get("offline", False)),
            synthetic_seed=int(data.get("synthetic_seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path | None) -> Config:
    """Read a TOML file; relative paths inside resolve against its directory."""
    if path is None:
        return Config()
    path = Path(path)
    try:
        data = tomli.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data, path.parent)
