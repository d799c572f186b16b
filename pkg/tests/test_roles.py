from __future__ import annotations

import json

import pytest

from agentsearch.actions import ActionRegistry, ActionSpec
from agentsearch.core import Modality, TaskKind
from agentsearch.errors import EmptySelection, NoJsonFound, NoNumberFound, RegistryError, UnknownExpert
from agentsearch.roles import (
    SUMMARIZER,
    dimension_names,
    judger_role,
    parse_judgement,
    parse_score,
    parse_selector,
    registry_load,
    render_score,
    selector_role,
)
from agentsearch.roles.registry import RoleRegistry

IMAGE_EXPERTS = ["text_logic_vision_expert", "general_vision_expert", "cultural_vision_expert", "visual_augmenter"]


def test_default_prompts():
    reg = registry_load()
    assert reg.prompt(SUMMARIZER).startswith("You are a Final Answer Agent")
    assert dimension_names(Modality.AUDIO)[0] == "Content Enjoyment (CE)"
    assert "Content Enjoyment (CE)" in reg.prompt(judger_role(Modality.AUDIO))
    assert len(dimension_names(Modality.IMAGE)) == 6
    assert len(dimension_names(Modality.VIDEO)) == 16


def test_every_action_resolves_to_a_prompt():
    actions = ActionRegistry()
    reg = registry_load(actions=actions)
    for spec in actions.all_actions():
        assert reg.prompt(spec.agent_role).strip()


def test_override_replaces_only_named_role(tmp_path):
    base = registry_load()
    path = tmp_path / "prompts.json"
    path.write_text(json.dumps({selector_role(False): "Pick one."}))
    reg = registry_load(path)
    assert reg.prompt(selector_role(False)) == "Pick one."
    assert reg[selector_role(False)].output_shape is base[selector_role(False)].output_shape
    for name in base.names():
        if name != selector_role(False):
            assert reg.prompt(name) == base.prompt(name)


@pytest.mark.parametrize("content", ["{", "[]", '{"Summarizer": ""}'])
def test_bad_override_file(tmp_path, content):
    path = tmp_path / "p.json"
    path.write_text(content)
    with pytest.raises(RegistryError):
        registry_load(path)


def test_unresolved_action_role_is_rejected():
    spec = ActionSpec("mystery_expert", "?", TaskKind.reasoning(Modality.TEXT), "expert_advice", "Ghost")
    reg = registry_load()
    with pytest.raises(RegistryError):
        reg.check_actions(ActionRegistry([spec]))
    with pytest.raises(RegistryError):
        reg["Ghost"]
    with pytest.raises(RegistryError):
        RoleRegistry([reg[SUMMARIZER], reg[SUMMARIZER]])


def test_parse_selector_examples():
    assert parse_selector('{"selected_experts": ["general_vision_expert"]}', IMAGE_EXPERTS).expert \
        == "general_vision_expert"
    assert parse_selector('I choose: {"selected_experts": ["visual_augmenter"]}', IMAGE_EXPERTS).expert \
        == "visual_augmenter"
    with pytest.raises(UnknownExpert) as info:
        parse_selector('{"selected_experts": ["unlisted_expert"]}', IMAGE_EXPERTS)
    assert info.value.name == "unlisted_expert"


def test_parse_selector_error_kinds():
    with pytest.raises(NoJsonFound):
        parse_selector("general_vision_expert", IMAGE_EXPERTS)
    with pytest.raises(EmptySelection):
        parse_selector('{"selected_experts": []}', IMAGE_EXPERTS)
    with pytest.raises(ValueError):
        parse_selector("{}", [])


def test_parse_selector_skips_unrelated_json_and_takes_first_element():
    text = 'note {"x": 1} then {"selected_experts": ["general_vision_expert", "visual_augmenter"]}'
    assert parse_selector(text, IMAGE_EXPERTS).expert == "general_vision_expert"
    assert parse_selector('"selected_experts": ["visual_augmenter"]', IMAGE_EXPERTS).expert == "visual_augmenter"


def test_parse_score_examples():
    assert parse_score("0.85").value == 0.85
    assert parse_score("Score: 0.42\n").value == 0.42
    clamped = parse_score("1.3")
    assert clamped.value == 1.0 and clamped.clamped
    with pytest.raises(NoNumberFound):
        parse_score("excellent")


def test_score_render_round_trip_over_grid():
    for i in range(101):
        value = i / 100
        assert parse_score(render_score(value)).value == pytest.approx(value, abs=1e-12)


def test_parse_judgement_splits_on_headings():
    names = dimension_names(Modality.IMAGE)
    text = "Overall fine.\n" + "\n".join(f"{i + 1}. **{n}**: analysis {i}" for i, n in enumerate(names))
    report = parse_judgement(text, Modality.IMAGE)
    assert report.names == names
    assert report.dimensions[2] == ("Color Matching", "analysis 2")
    assert report.raw == text


def test_parse_judgement_sixteen_video_dimensions():
    names = dimension_names(Modality.VIDEO)
    text = "\n".join(f"{n} – fine" for n in names)
    assert parse_judgement(text, Modality.VIDEO).names == names


def test_parse_judgement_without_headings():
    report = parse_judgement("Looks great overall.", Modality.AUDIO)
    assert report.dimensions == () and report.raw == "Looks great overall."
