from __future__ import annotations

import json

import pytest

from agentsearch.actions import ActionBehavior, ActionRegistry, ActionSpec, catalog_for, render_candidates
from agentsearch.core import Modality, TaskKind
from agentsearch.errors import ConfigError, UnsupportedKind
from agentsearch.roles import registry_load

R_IMAGE = TaskKind.reasoning(Modality.IMAGE)


def test_image_reasoning_catalog():
    catalog = catalog_for(R_IMAGE)
    assert len(catalog) == 4
    assert "visual_augmenter" in catalog.names
    assert catalog.get("visual_augmenter").behavior is ActionBehavior.GENERATIVE_AUGMENT


def test_audio_generation_catalog_refines_prompts():
    catalog = catalog_for(TaskKind.generation(Modality.AUDIO))
    assert len(catalog) == 3
    assert all(a.behavior is ActionBehavior.PROMPT_REFINE for a in catalog)


def test_text_reasoning_catalog_is_advice_only():
    catalog = catalog_for(TaskKind.reasoning(Modality.TEXT))
    assert catalog.names == ["text_logic_vision_expert", "cultural_vision_expert"]
    assert all(a.behavior is ActionBehavior.EXPERT_ADVICE for a in catalog)


def test_catalog_sizes():
    reg = ActionRegistry()
    sizes = {str(k): len(reg.catalog_for(k)) for k in reg.kinds()}
    assert sizes == {"reasoning:text": 2, "reasoning:image": 4, "reasoning:audio": 4, "reasoning:video": 5,
                     "generation:image": 3, "generation:audio": 3, "generation:video": 3}


def test_text_generation_is_unsupported():
    with pytest.raises(UnsupportedKind):
        catalog_for(TaskKind.generation(Modality.TEXT))


def test_render_candidates():
    catalog = catalog_for(R_IMAGE)
    lines = render_candidates(catalog).splitlines()
    assert len(lines) == 4 and lines[0].startswith("text_logic_vision_expert:")
    assert render_candidates(catalog, catalog.names) == ""
    rest = render_candidates(catalog, {"visual_augmenter"}).splitlines()
    assert rest == lines[:3]
    assert len(render_candidates(catalog, {"visual_augmenter", "not_there"}).splitlines()) == 3


def test_extension_adds_actions_and_roles(tmp_path):
    entry = {"name": "chart_expert", "description": "Reads charts.", "task_kind": "reasoning",
             "modality": "image", "behavior": "expert_advice"}
    path = tmp_path / "ext.json"
    path.write_text(json.dumps([entry]))
    reg = ActionRegistry.load(path)
    catalog = reg.catalog_for(R_IMAGE)
    assert catalog.names[-1] == "chart_expert" and len(catalog) == 5
    assert registry_load(actions=reg).prompt("chart_expert")
    assert ActionSpec.from_dict(catalog.get("chart_expert").to_dict()) == catalog.get("chart_expert")


def test_extension_cannot_shadow_existing_action():
    spec = ActionSpec("visual_augmenter", "again", R_IMAGE, "generative_augment", "visual_augmenter")
    with pytest.raises(ConfigError):
        ActionRegistry([spec])


@pytest.mark.parametrize("name,kind,behavior", [
    ("a+b", R_IMAGE, "expert_advice"),
    ("fancy_expert", TaskKind.generation(Modality.IMAGE), "expert_advice"),
    ("sound_augmenter", R_IMAGE, "expert_advice"),
    ("plain_expert", R_IMAGE, "generative_augment"),
    ("text_augmenter", TaskKind.reasoning(Modality.TEXT), "generative_augment"),
])
def test_invalid_action_specs(name, kind, behavior):
    with pytest.raises(ConfigError):
        ActionSpec(name, "d", kind, behavior, name)


def test_bad_extension_files(tmp_path):
    path = tmp_path / "ext.json"
    path.write_text("{}")
    with pytest.raises(ConfigError):
        ActionRegistry.load(path)
    path.write_text('[{"name": "x"}]')
    with pytest.raises(ConfigError):
        ActionRegistry.load(path)
