from __future__ import annotations

import json

import pytest

from agentsearch.backends.scripted import CallableChatBackend
from agentsearch.backends.stub import StubMediaBackend
from agentsearch.backends.synthetic import SyntheticChatBackend
from agentsearch.cognition import plan_modalities
from agentsearch.core import Modality, SearchConfig, TaskKind
from agentsearch.errors import ConfigError, EmptySequence
from agentsearch.orchestrator import (
    MediaInput,
    RunSettings,
    Session,
    guess_modality,
    init_generation_root,
    init_reasoning_root,
    make_run_id,
    replay,
    run,
    run_generation,
    run_reasoning,
)
from agentsearch.search import TerminatedBy, run_search
from agentsearch.expansion import GenerationExpander
from agentsearch.trace import read_trace

from support import backend_calls, make_ctx, role_script

QUAD = ("Generate a futuristic sci-fi video showing a memory upload process, add fusion reactor sounds, and an "
        "image of the machine.")


def _cascade(score):
    return role_script({"PromptExtender*": "an extended prompt", "Judger*": "Object Presence: fine",
                        "Scorer*": score})


def test_generation_root_scored_by_cascade(tmp_path):
    ctx = make_ctx(tmp_path, _cascade("0.55"))
    root = init_generation_root(ctx, "a red fox", Modality.IMAGE)
    assert root.score.value == 0.55 and root.actions == ()
    assert root.content.original_prompt == "a red fox"
    assert root.content.node_prompt == "an extended prompt"
    media = [c for c in backend_calls(ctx) if c["op"] == "generate_media"][0]
    assert media["request"]["prompt"] == "an extended prompt"
    assert root.score.value < SearchConfig(threshold=0.6).threshold


def test_generation_root_above_threshold_is_returned(tmp_path):
    ctx = make_ctx(tmp_path, _cascade("0.80"))
    kind = TaskKind.generation(Modality.IMAGE)
    root = init_generation_root(ctx, "a red fox", Modality.IMAGE)
    outcome = run_search(root, SearchConfig(threshold=0.6), kind, GenerationExpander(ctx, kind), ctx.tracer)
    assert outcome.terminated_by is TerminatedBy.THRESHOLD_MET and outcome.best_node is root


def test_extender_can_be_disabled(tmp_path):
    ctx = make_ctx(tmp_path, _cascade("0.5"))
    root = init_generation_root(ctx, "a red fox", Modality.AUDIO, extend=False)
    assert root.content.node_prompt == "a red fox"
    assert backend_calls(ctx, "PromptExtender") == []


@pytest.mark.parametrize("probs,expected", [((0.9, 0.9), 0.9), ((0.3, 0.5), 0.4)])
def test_reasoning_root_score(tmp_path, probs, expected):
    ctx = make_ctx(tmp_path, role_script({"GeneralAnswer": ("B", probs)}))
    root = init_reasoning_root(ctx, "Which option?", [])
    assert root.score.value == pytest.approx(expected)
    assert root.content.node_answer == "B"


def test_empty_probabilities_fail_initialisation(tmp_path):
    ctx = make_ctx(tmp_path, role_script({"GeneralAnswer": ("B", ())}))
    with pytest.raises(EmptySequence):
        init_reasoning_root(ctx, "Which option?", [])


def _session(tmp_path, fn, *, mode="run", inputs=None, settings=None, **kw):
    return Session(tmp_path / "runs", mode=mode, inputs=inputs or {"x": 1},
                   chat_backend=CallableChatBackend(fn), media_backend=StubMediaBackend(),
                   settings=settings, **kw)


def _plan_reply(*steps):
    return json.dumps({"intent": "make things", "steps": [
        {"kind": k, "modality": m, "prompt": p} for k, m, p in steps]})


def test_single_image_step_run(tmp_path):
    fn = role_script({
        "Perceiver": "wants a dog", "Planner": _plan_reply(("generate", "image", "a blue dog")),
        "Reflector": '{"approved": true}', "PromptExtender*": "a blue dog, detailed",
        "Judger*": "fine", "Scorer*": "0.9", "Speaker": "Here is your dog.",
    })
    session = _session(tmp_path, fn)
    record = run(session, "Draw an image of a blue dog sitting in the grass.")
    assert len(record.step_outcomes) == 1 and len(record.artifacts) == 1
    assert record.final_response == "Here is your dog."
    run_dir = session.run_dir
    assert {p.name for p in run_dir.iterdir()} == {"run.json", "plan.json", "trace.jsonl", "artifacts"}
    for ref in record.artifacts:
        assert (run_dir / ref.uri).is_file()
    saved = json.loads((run_dir / "run.json").read_text())
    assert saved["steps"][0]["best_node"]["score"] == 0.9
    assert json.loads((run_dir / "plan.json").read_text()) == record.plan.to_dict()


def test_quadmodal_run(tmp_path):
    fn = role_script({
        "Planner": _plan_reply(("generate", "video", "memory upload"), ("generate", "audio", "fusion reactor hum"),
                               ("generate", "image", "the machine")),
        "Reflector": '{"approved": true}', "Scorer*": "0.95", "Speaker": "All done.",
    }, default="text")
    record = run(_session(tmp_path, fn), QUAD)
    assert [r.outcome is not None for r in record.step_outcomes] == [True, True, True]
    assert {a.modality for a in record.artifacts} == {Modality.VIDEO, Modality.AUDIO, Modality.IMAGE}
    assert record.final_response == "All done."
    assert plan_modalities(record.plan) == set(Modality)


def test_failing_step_is_recorded_and_run_continues(tmp_path):
    fn = role_script({
        "Planner": _plan_reply(("understand", "text", "why?"), ("generate", "image", "a cat")),
        "Reflector": '{"approved": true}', "GeneralAnswer": ("B", ()), "Scorer*": "0.9", "Speaker": "partial",
    }, default="text")
    record = run(_session(tmp_path, fn), "Explain and draw.")
    first, second = record.step_outcomes
    assert first.error and "EmptySequence" in first.error
    assert second.ok and len(record.artifacts) == 1


def test_text_generation_steps_go_to_the_speaker(tmp_path):
    fn = role_script({"Planner": _plan_reply(("generate", "text", "a short poem")),
                      "Reflector": '{"approved": true}', "Speaker": "Roses are red."}, default="x")
    session = _session(tmp_path, fn)
    record = run(session, "Write a poem.")
    assert record.step_outcomes[0].delegated and record.step_outcomes[0].outcome is None
    speaker = backend_calls(session.tracer.events, "Speaker")[0]
    texts = [p["text"] for m in speaker["request"]["messages"] for p in m["parts"]]
    assert any("a short poem" in t for t in texts)


def test_trace_sequence_is_gap_free(tmp_path):
    session = _session(tmp_path, SyntheticChatBackend(seed=3).chat)
    run(session, "Draw a lighthouse and describe it?")
    header, events = read_trace(session.run_dir / "trace.jsonl")
    assert header["run_id"] == session.run_id
    assert [e.seq for e in events] == list(range(len(events)))
    assert events[0].kind.value == "RunStarted"


def test_per_kind_search_settings(tmp_path):
    settings = RunSettings(search={"generation:audio": SearchConfig(threshold=0.1)})
    assert settings.search_config(TaskKind.generation(Modality.AUDIO)).threshold == 0.1
    assert settings.search_config(TaskKind.generation(Modality.IMAGE)).threshold == 0.6
    assert settings.search_config(TaskKind.reasoning(Modality.IMAGE)).threshold == 0.7


def _synthetic_session(runs, mode, inputs, seed=0):
    return Session(runs, mode=mode, inputs=inputs, chat_backend=SyntheticChatBackend(seed=1),
                   media_backend=StubMediaBackend(), seed=seed)


def test_replay_reproduces_the_record(tmp_path):
    media = MediaInput(b"\x89PNG fake", Modality.IMAGE, "png", "photo.png")
    inputs = {"question": "What is shown?", "media": [media.fingerprint()], "task_kind": "reasoning:image"}
    session = _synthetic_session(tmp_path / "a", "reason", inputs)
    refs = session.import_media([media])
    original = run_reasoning(session, "What is shown?", refs)
    again = replay(session.run_dir, tmp_path / "b", settings=RunSettings())
    assert again.to_dict() == original.to_dict()
    first = (session.run_dir / "trace.jsonl").read_text().splitlines()
    second = (tmp_path / "b" / again.run_id / "trace.jsonl").read_text().splitlines()
    assert _without_backend_ids(first) == _without_backend_ids(second)


def _without_backend_ids(lines):
    """Replayed calls differ from the originals only in which backend answered."""
    out = []
    for line in lines:
        record = json.loads(line)
        response = record.get("payload", {}).get("response")
        if isinstance(response, dict):
            response.pop("backend_id", None)
        out.append(record)
    return out


def test_replay_of_generation_and_run_modes(tmp_path):
    gen = _synthetic_session(tmp_path / "a", "generate", {"prompt": "a kite", "task_kind": "generation:image"})
    original = run_generation(gen, "a kite", Modality.IMAGE)
    assert replay(gen.run_dir, tmp_path / "b", settings=RunSettings()).to_dict() == original.to_dict()

    full = _synthetic_session(tmp_path / "c", "run", {"instruction": "Make a song", "media": [], "plan": None})
    original = run(full, "Make a song")
    assert replay(full.run_dir, tmp_path / "d", settings=RunSettings()).to_dict() == original.to_dict()


def test_run_ids_are_stable_and_collisions_get_suffixes(tmp_path):
    assert make_run_id({"a": 1}, True) == make_run_id({"a": 1}, True)
    assert make_run_id({"a": 1}, True) != make_run_id({"a": 2}, True)
    assert make_run_id({"a": 1}, False) != make_run_id({"a": 1}, False)
    one = _synthetic_session(tmp_path, "run", {"k": 1})
    two = _synthetic_session(tmp_path, "run", {"k": 1})
    assert one.run_id == two.run_id
    assert two.run_dir.name == one.run_id + "-1"


def test_media_input_helpers(tmp_path):
    path = tmp_path / "clip.WAV"
    path.write_bytes(b"RIFF")
    assert guess_modality(path) is Modality.AUDIO
    item = MediaInput.from_path(path)
    assert item.ext == "WAV" and item.name == "clip.WAV"
    with pytest.raises(ConfigError):
        guess_modality(tmp_path / "notes.xyz")
    with pytest.raises(ConfigError):
        MediaInput.from_path(tmp_path / "missing.png")
