from __future__ import annotations

import json
import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from agentsearch.core import Modality
from agentsearch.errors import DatasetError
from agentsearch.instruction_eval import (
    InstructionSample,
    evaluate,
    file_predictor,
    load_dataset,
    percent,
    render_table,
)

from support import write_jsonl

DATA = Path(__file__).parent / "data"
I, T, A, V = Modality.IMAGE, Modality.TEXT, Modality.AUDIO, Modality.VIDEO
ALL = frozenset(Modality)


def _samples(*targets):
    return [InstructionSample(f"instruction {i}", frozenset(t)) for i, t in enumerate(targets)]


def _table_predictor(samples, predictions):
    table = {s.instruction: p for s, p in zip(samples, predictions)}
    return lambda instruction: table[instruction]


def test_load_dataset_line(tmp_path):
    path = write_jsonl(tmp_path / "d.jsonl", [
        {"instruction": "Draw an image of a blue dog sitting in the grass.", "targets": ["image", "text"]},
        {"instruction": "Hum.", "targets": ["audio", "audio"]},
    ])
    first, second = load_dataset(path)
    assert first.target_modalities == {I, T}
    assert second.target_modalities == {A}


@pytest.mark.parametrize("line,fragment", [
    ('{"instruction": "x", "targets": []}', "targets is empty"),
    ('{"instruction": "x", "targets": ["smell"]}', "unknown modality"),
    ('{"instruction": "x", "targets": "image"}', "list"),
    ('{"targets": ["image"]}', "instruction"),
    ("not json", "d.jsonl:2"),
])
def test_load_dataset_errors_name_the_line(tmp_path, line, fragment):
    path = tmp_path / "d.jsonl"
    path.write_text('{"instruction": "ok", "targets": ["text"]}\n' + line + "\n")
    with pytest.raises(DatasetError) as info:
        load_dataset(path)
    assert fragment in str(info.value)
    assert "d.jsonl:2" in str(info.value)


def test_missing_dataset_file(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(tmp_path / "nope.jsonl")


def test_three_exact_one_superset():
    samples = _samples({I, T}, {A, T}, {T}, {V, T})
    preds = [{I, T}, {A, T}, {T}, {V, A, T}]
    report = evaluate(samples, _table_predictor(samples, preds))
    assert (report.strict_accuracy, report.flexible_accuracy) == (75.0, 100.0)


def test_full_set_predictor_matches_only_quadmodal_targets():
    samples = _samples({I, T}, ALL, {T}, ALL, {A, V, T})
    report = evaluate(samples, lambda _: ALL)
    assert report.flexible_accuracy == 100.0
    assert report.strict_accuracy == 40.0


def test_identity_predictor_is_perfect():
    samples = _samples({I, T}, {A}, {V, A, I, T})
    table = {s.instruction: s.target_modalities for s in samples}
    report = evaluate(samples, table.__getitem__)
    assert report.strict_accuracy == report.flexible_accuracy == 100.0


def test_predictor_failure_counts_as_miss():
    samples = _samples({T}, {I})

    def predictor(instruction):
        if instruction.endswith("1"):
            raise RuntimeError("backend down")
        return {T}

    report = evaluate(samples, predictor)
    assert report.strict_accuracy == report.flexible_accuracy == 50.0
    assert report.per_sample[1].predicted is None
    assert "backend down" in report.per_sample[1].error


def test_hand_labelled_fixture():
    # 13 exact matches, 4 supersets, 3 misses (dropped modality, wrong set, no prediction)
    samples = load_dataset(DATA / "instructions20.jsonl")
    report = evaluate(samples, file_predictor(DATA / "predictions20.jsonl"))
    assert report.n == 20
    assert report.strict_accuracy == 65.0
    assert report.flexible_accuracy == 85.0
    assert sum(r.predicted is None for r in report.per_sample) == 1
    assert "strict=65.0%  flexible=85.0%" in render_table(report, samples)
    assert json.loads(json.dumps(report.to_dict()))["n"] == 20


def test_file_predictor_rejects_duplicates(tmp_path):
    path = write_jsonl(tmp_path / "p.jsonl", [{"instruction": "a", "predicted": ["text"]}] * 2)
    with pytest.raises(DatasetError):
        file_predictor(path)


def test_percent_rounds_to_one_decimal():
    assert percent(2, 3) == 66.7
    assert percent(1, 8) == 12.5


modality_sets = st.frozensets(st.sampled_from(list(Modality)), min_size=1)


@given(st.lists(st.tuples(modality_sets, st.frozensets(st.sampled_from(list(Modality)))), min_size=1, max_size=30),
       st.randoms())
def test_metrics_ignore_sample_order(pairs, rnd):
    samples = [InstructionSample(f"s{i}", t) for i, (t, _) in enumerate(pairs)]
    predictor = _table_predictor(samples, [p for _, p in pairs])
    shuffled = list(samples)
    rnd.shuffle(shuffled)
    a, b = evaluate(samples, predictor), evaluate(shuffled, predictor)
    assert (a.strict_accuracy, a.flexible_accuracy) == (b.strict_accuracy, b.flexible_accuracy)
    assert a.strict_accuracy <= a.flexible_accuracy
    assert all(r.flexible_hit for r in a.per_sample if r.strict_hit)


def test_concurrent_evaluation_keeps_sample_order():
    rng = random.Random(4)
    samples = [InstructionSample(f"s{i}", frozenset(rng.sample(list(Modality), rng.randint(1, 4))))
               for i in range(40)]
    predictor = lambda s: samples[int(s[1:])].target_modalities if int(s[1:]) % 3 else {T}
    assert evaluate(samples, predictor, workers=8) == evaluate(samples, predictor)


def test_sample_invariants():
    with pytest.raises(ValueError):
        InstructionSample("x", frozenset())
    with pytest.raises(ValueError):
        evaluate([], lambda _: {T})
