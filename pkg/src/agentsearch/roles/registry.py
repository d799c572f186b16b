"""Role registry: every agent's name, system prompt, and output shape."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..actions import ActionBehavior, ActionRegistry, ActionSpec
from ..core import MEDIA_MODALITIES, Modality
from ..errors import RegistryError
from . import prompts


class OutputShape(str, enum.Enum):
    FREE_TEXT = "free_text"
    SELECTOR_JSON = "selector_json"
    SCORE_SCALAR = "score_scalar"
    JUDGEMENT_REPORT = "judgement_report"
    PLAN_JSON = "plan_json"
    VERDICT_JSON = "verdict_json"


@dataclass(frozen=True)
class AgentRole:
    name: str
    system_prompt: str
    output_shape: OutputShape = OutputShape.FREE_TEXT


GENERAL_ANSWER = "GeneralAnswer"
SUMMARIZER = "Summarizer"
SPEAKER = "Speaker"
PERCEIVER = "Perceiver"
PLANNER = "Planner"
REFLECTOR = "Reflector"


def selector_role(generation: bool) -> str:
    return "Selector(generation)" if generation else "Selector(reasoning)"


def judger_role(modality: Modality) -> str:
    return f"Judger({modality.value})"


def scorer_role(modality: Modality) -> str:
    return f"Scorer({modality.value})"


def extender_role(modality: Modality) -> str:
    return f"PromptExtender({modality.value})"


_JUDGERS = {
    Modality.IMAGE: (prompts.IMAGE_JUDGER, prompts.IMAGE_SCORER),
    Modality.VIDEO: (prompts.VIDEO_JUDGER, prompts.VIDEO_SCORER),
    Modality.AUDIO: (prompts.AUDIO_JUDGER, prompts.AUDIO_SCORER),
    Modality.TEXT: (prompts.TEXT_JUDGER, prompts.TEXT_SCORER),
}


def _pipeline_roles() -> list[AgentRole]:
    roles = [
        AgentRole(GENERAL_ANSWER, prompts.GENERAL_ANSWER),
        AgentRole(SUMMARIZER, prompts.SUMMARIZER),
        AgentRole(selector_role(False), prompts.SELECTOR_REASONING, OutputShape.SELECTOR_JSON),
        AgentRole(selector_role(True), prompts.SELECTOR_GENERATION, OutputShape.SELECTOR_JSON),
        AgentRole(SPEAKER, prompts.SPEAKER),
        AgentRole(PERCEIVER, prompts.PERCEIVER),
        AgentRole(PLANNER, prompts.PLANNER, OutputShape.PLAN_JSON),
        AgentRole(REFLECTOR, prompts.REFLECTOR, OutputShape.VERDICT_JSON),
    ]
    for modality, (judger, scorer) in _JUDGERS.items():
        roles.append(AgentRole(judger_role(modality), judger, OutputShape.JUDGEMENT_REPORT))
        roles.append(AgentRole(scorer_role(modality), scorer, OutputShape.SCORE_SCALAR))
    for modality in MEDIA_MODALITIES:
        roles.append(AgentRole(extender_role(modality), prompts.PROMPT_EXTENDERS[modality.value]))
    return roles


def _action_role(spec: ActionSpec) -> AgentRole:
    if spec.behavior is ActionBehavior.PROMPT_REFINE:
        text = prompts.refiner_prompt(spec.name, spec.description)
    elif spec.behavior is ActionBehavior.GENERATIVE_AUGMENT:
        text = prompts.augmenter_prompt(spec.name, spec.description, spec.task_kind.modality.value)
    else:
        text = prompts.reasoning_expert_prompt(spec.name, spec.description)
    return AgentRole(spec.agent_role, text)


class RoleRegistry:
    def __init__(self, roles: Iterable[AgentRole]) -> None:
        self._roles: dict[str, AgentRole] = {}
        for role in roles:
            if role.name in self._roles:
                raise RegistryError(f"duplicate role {role.name!r}")
            self._roles[role.name] = role

    def __contains__(self, name: str) -> bool:
        return name in self._roles

    def __getitem__(self, name: str) -> AgentRole:
        try:
            return self._roles[name]
        except KeyError:
            raise RegistryError(f"unknown agent role {name!r}") from None

    def prompt(self, name: str) -> str:
        return self[name].system_prompt

    def names(self) -> list[str]:
        return list(self._roles)

    def check_actions(self, actions: ActionRegistry) -> None:
        """Every catalog action must resolve to a role with a non-empty prompt."""
        for spec in actions.all_actions():
            if spec.agent_role not in self._roles:
                raise RegistryError(f"action {spec.name!r} refers to unregistered role {spec.agent_role!r}")
            if not self._roles[spec.agent_role].system_prompt.strip():
                raise RegistryError(f"role {spec.agent_role!r} has an empty system prompt")


def registry_load(overrides: str | Path | None = None, actions: ActionRegistry | None = None) -> RoleRegistry:
    """Build the registry from defaults plus an optional JSON override file.

    The override file maps role names to prompt text. Names not known yet are
    added as free-text roles, which is how extension actions get a prompt.
    """
    actions = actions or ActionRegistry()
    roles = {r.name: r for r in _pipeline_roles()}
    for spec in actions.all_actions():
        roles.setdefault(spec.agent_role, _action_role(spec))
    if overrides is not None:
        try:
            data = json.loads(Path(overrides).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise RegistryError(f"cannot read prompt overrides {overrides}: {exc}") from exc
        if not isinstance(data, dict) or not all(isinstance(v, str) and v.strip() for v in data.values()):
            raise RegistryError("prompt override file must map role names to non-empty strings")
        for name, text in data.items():
            shape = roles[name].output_shape if name in roles else OutputShape.FREE_TEXT
            roles[name] = AgentRole(name, text, shape)
    registry = RoleRegistry(roles.values())
    registry.check_actions(actions)
    return registry
