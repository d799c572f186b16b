"""Append-only event trace, serialised as JSONL.

The first line of a trace file is a header record (schema name, version,
run id, run-level seed). Each following line is one :class:`TraceEvent`.
In deterministic mode timestamps are left out entirely so two runs of the
same invocation produce byte-identical files.
"""
from __future__ import annotations

import dataclasses
import enum
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

TRACE_SCHEMA = "agentsearch.trace"
TRACE_VERSION = 1


class EventKind(str, enum.Enum):
    RUN_STARTED = "RunStarted"
    NODE_CREATED = "NodeCreated"
    ACTION_SELECTED = "ActionSelected"
    BACKEND_CALL = "BackendCall"
    NODE_SCORED = "NodeScored"
    BEAM_UPDATED = "BeamUpdated"
    TERMINATED = "Terminated"


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    kind: EventKind
    payload: dict[str, Any] = field(default_factory=dict)
    timestamp: float | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"seq": self.seq, "kind": self.kind.value, "payload": self.payload}
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TraceEvent:
        return cls(
            seq=int(data["seq"]),
            kind=EventKind(data["kind"]),
            payload=data.get("payload") or {},
            timestamp=data.get("timestamp"),
        )


def to_jsonable(obj: Any) -> Any:
    """Convert dataclasses/enums/tuples into plain JSON types."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if hasattr(obj, "to_dict") and callable(obj.to_dict):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, Path):
        return obj.as_posix()
    return obj


def dumps_line(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class Tracer:
    """Thread-safe, gap-free event sequencer.

    All components funnel events through one tracer per run, which is what
    makes ``seq`` a total order even when expansions run concurrently.
    """

    def __init__(self, *, deterministic: bool = False, sink: str | Path | None = None,
                 header: dict[str, Any] | None = None) -> None:
        self.deterministic = deterministic
        self.events: list[TraceEvent] = []
        self._lock = threading.Lock()
        self._sink = Path(sink) if sink is not None else None
        self.header: dict[str, Any] = {"record": "header", "schema": TRACE_SCHEMA, "version": TRACE_VERSION}
        self.header.update(header or {})
        if not deterministic:
            self.header.setdefault("created_at", time.time())
        if self._sink is not None:
            self._sink.parent.mkdir(parents=True, exist_ok=True)
            self._sink.write_text(dumps_line(self.header) + "\n", encoding="utf-8")

    def emit(self, kind: EventKind, **payload: Any) -> TraceEvent:
        body = to_jsonable(payload)
        with self._lock:
            event = TraceEvent(
                seq=len(self.events),
                kind=EventKind(kind),
                payload=body,
                timestamp=None if self.deterministic else time.time(),
            )
            self.events.append(event)
            if self._sink is not None:
                with self._sink.open("a", encoding="utf-8") as fh:
                    fh.write(dumps_line(event.to_dict()) + "\n")
        return event

    def mark(self) -> int:
        with self._lock:
            return len(self.events)

    def since(self, mark: int) -> list[TraceEvent]:
        with self._lock:
            return list(self.events[mark:])


def read_trace(path: str | Path) -> tuple[dict[str, Any], list[TraceEvent]]:
    header: dict[str, Any] = {}
    events: list[TraceEvent] = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            record = json.loads(line)
            if lineno == 1 and record.get("record") == "header":
                header = record
                continue
            events.append(TraceEvent.from_dict(record))
    return header, events


def iter_kind(events: list[TraceEvent], kind: EventKind) -> Iterator[TraceEvent]:
    return (e for e in events if e.kind is kind)


def describe_event(event: TraceEvent) -> str:
    """One human-readable line for ``trace show``."""
    p = event.payload
    k = event.kind
    if k is EventKind.RUN_STARTED:
        detail = f"{p.get('mode', 'run')}: {p.get('instruction') or p.get('question') or p.get('prompt') or ''}"
    elif k is EventKind.NODE_CREATED:
        detail = f"{p.get('node')} depth={p.get('depth')} actions={','.join(p.get('actions', [])) or '-'}"
    elif k is EventKind.NODE_SCORED:
        flag = " (clamped)" if p.get("clamped") else ""
        detail = f"{p.get('node')} score={p.get('score'):.4f}{flag}"
    elif k is EventKind.ACTION_SELECTED:
        detail = f"{p.get('node')} -> {p.get('action')} via {p.get('via')}"
    elif k is EventKind.BACKEND_CALL:
        status = "ok" if p.get("ok") else f"FAILED ({p.get('error')})"
        detail = f"{p.get('op')} role={p.get('role')} attempt={p.get('attempt')} {status}"
    elif k is EventKind.BEAM_UPDATED:
        detail = f"depth={p.get('depth')} beam={p.get('beam')}"
    else:
        detail = f"{p.get('terminated_by')} best={p.get('best_node')} score={p.get('best_score')}"
    return f"{event.seq:5d}  {k.value:<15} {detail}"
