"""Does the planner pick the right output modalities for an instruction?

Strict accuracy counts exact set matches. Flexible accuracy counts
predictions that cover every target modality, extra ones allowed.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .core import Modality
from .errors import DatasetError

logger = logging.getLogger(__name__)

Predictor = Callable[[str], Iterable[Modality]]


@dataclass(frozen=True)
class InstructionSample:
    instruction: str
    target_modalities: frozenset[Modality]

    def __post_init__(self) -> None:
        object.__setattr__(self, "target_modalities", frozenset(self.target_modalities))
        if not self.target_modalities:
            raise ValueError("a sample needs at least one target modality")
        if not self.instruction.strip():
            raise ValueError("a sample needs an instruction")


@dataclass(frozen=True)
class SampleResult:
    strict_hit: bool
    flexible_hit: bool
    predicted: frozenset[Modality] | None  # None when the predictor failed
    error: str | None = None


@dataclass(frozen=True)
class EvalReport:
    n: int
    strict_accuracy: float
    flexible_accuracy: float
    per_sample: tuple[SampleResult, ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "strict_accuracy": self.strict_accuracy,
            "flexible_accuracy": self.flexible_accuracy,
            "per_sample": [
                {
                    "strict_hit": r.strict_hit,
                    "flexible_hit": r.flexible_hit,
                    "predicted": None if r.predicted is None else _names(r.predicted),
                    "error": r.error,
                }
                for r in self.per_sample
            ],
        }


def _names(modalities: Iterable[Modality]) -> list[str]:
    return sorted(m.value for m in modalities)


def _modalities(raw, where: str) -> frozenset[Modality]:
    if not isinstance(raw, list):
        raise DatasetError(f"{where}: expected a list of modality names")
    try:
        return frozenset(Modality.parse(x) for x in raw)
    except ValueError as exc:
        raise DatasetError(f"{where}: {exc}") from None


def _jsonl(path: str | Path):
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"{path}: no such file")
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: {exc.msg}") from None
            if not isinstance(record, dict):
                raise DatasetError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def load_dataset(path: str | Path) -> list[InstructionSample]:
    """One ``{"instruction": ..., "targets": [...]}`` object per line."""
    samples = []
    for lineno, record in _jsonl(path):
        where = f"{path}:{lineno}"
        instruction = record.get("instruction")
        if not isinstance(instruction, str) or not instruction.strip():
            raise DatasetError(f"{where}: missing instruction")
        targets = _modalities(record.get("targets"), where)
        if not targets:
            raise DatasetError(f"{where}: targets is empty")
        samples.append(InstructionSample(instruction, targets))
    return samples


def file_predictor(path: str | Path) -> Predictor:
    """Predictions precomputed as ``{"instruction": ..., "predicted": [...]}`` lines."""
    table: dict[str, frozenset[Modality]] = {}
    for lineno, record in _jsonl(path):
        where = f"{path}:{lineno}"
        instruction = record.get("instruction")
        if not isinstance(instruction, str):
            raise DatasetError(f"{where}: missing instruction")
        if instruction in table:
            raise DatasetError(f"{where}: duplicate prediction for {instruction!r}")
        table[instruction] = _modalities(record.get("predicted"), where)

    def predict(instruction: str) -> frozenset[Modality]:
        try:
            return table[instruction]
        except KeyError:
            raise DatasetError(f"no prediction for {instruction!r}") from None

    return predict


def percent(hits: int, n: int) -> float:
    return round(100.0 * hits / n, 1)


def _score(sample: InstructionSample, predictor: Predictor) -> SampleResult:
    try:
        predicted = frozenset(Modality.parse(m) for m in predictor(sample.instruction))
    except Exception as exc:  # any predictor failure is a miss on both metrics
        logger.warning("prediction failed for %r: %s", sample.instruction, exc)
        return SampleResult(False, False, None, f"{type(exc).__name__}: {exc}")
    target = sample.target_modalities
    return SampleResult(predicted == target, predicted >= target, predicted)


def evaluate(samples: Sequence[InstructionSample], predictor: Predictor, *, workers: int = 1) -> EvalReport:
    if not samples:
        raise ValueError("no samples to evaluate")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _score(s, predictor), samples))
    else:
        results = [_score(s, predictor) for s in samples]
    n = len(results)
    return EvalReport(
        n=n,
        strict_accuracy=percent(sum(r.strict_hit for r in results), n),
        flexible_accuracy=percent(sum(r.flexible_hit for r in results), n),
        per_sample=tuple(results),
    )


def render_table(report: EvalReport, samples: Sequence[InstructionSample]) -> str:
    rows = [("#", "strict", "flexible", "target", "predicted", "instruction")]
    for i, (s, r) in enumerate(zip(samples, report.per_sample), 1):
        predicted = "error" if r.predicted is None else ",".join(_names(r.predicted))
        text = s.instruction if len(s.instruction) <= 50 else s.instruction[:47] + "..."
        rows.append((str(i), "y" if r.strict_hit else "n", "y" if r.flexible_hit else "n",
                     ",".join(_names(s.target_modalities)), predicted, text))
    widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.append("")
    lines.append(f"n={report.n}  strict={report.strict_accuracy:.1f}%  flexible={report.flexible_accuracy:.1f}%")
    return "\n".join(lines)
