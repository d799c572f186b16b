"""Per task-kind action catalogs.

Catalog order is significant: it is the order candidates are shown to the
Selector, the fallback order when the Selector misbehaves, and the beam
tie-break order.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from .core import Modality, TaskKind, TaskMode
from .errors import ConfigError, UnsupportedKind


class ActionBehavior(str, enum.Enum):
    EXPERT_ADVICE = "expert_advice"
    GENERATIVE_AUGMENT = "generative_augment"
    PROMPT_REFINE = "prompt_refine"


@dataclass(frozen=True)
class ActionSpec:
    name: str
    description: str
    task_kind: TaskKind
    behavior: ActionBehavior
    agent_role: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "behavior", ActionBehavior(self.behavior))
        if not self.name or "+" in self.name or "|" in self.name:
            raise ConfigError(f"invalid action name {self.name!r}")
        if self.task_kind.is_generation and self.behavior is not ActionBehavior.PROMPT_REFINE:
            raise ConfigError(f"{self.name}: generation actions must refine prompts")
        if self.task_kind.is_reasoning:
            if self.name.endswith("augmenter") != (self.behavior is ActionBehavior.GENERATIVE_AUGMENT):
                raise ConfigError(f"{self.name}: exactly the actions named '*augmenter' generate auxiliary media")
            if self.behavior is ActionBehavior.GENERATIVE_AUGMENT and self.task_kind.modality is Modality.TEXT:
                raise ConfigError(f"{self.name}: text reasoning has no media to augment")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "task_kind": self.task_kind.mode.value,
            "modality": self.task_kind.modality.value,
            "behavior": self.behavior.value,
            "agent_role": self.agent_role,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ActionSpec:
        try:
            kind = TaskKind(TaskMode(data["task_kind"]), Modality.parse(data["modality"]))
            return cls(
                name=data["name"],
                description=data["description"],
                task_kind=kind,
                behavior=ActionBehavior(data["behavior"]),
                agent_role=data.get("agent_role") or data["name"],
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad action entry {data!r}: {exc}") from exc


@dataclass(frozen=True)
class ActionCatalog:
    kind: TaskKind
    entries: tuple[ActionSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        names = [a.name for a in self.entries]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate action names in {self.kind} catalog")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.entries]

    def get(self, name: str) -> ActionSpec:
        for a in self.entries:
            if a.name == name:
                return a
        raise KeyError(name)

    def order(self, name: str | None) -> int:
        """Catalog position of ``name``; -1 for None (the root has no last action)."""
        if name is None:
            return -1
        return self.names.index(name)

    def unused(self, used: Iterable[str]) -> list[ActionSpec]:
        used = set(used)
        return [a for a in self.entries if a.name not in used]


def render_candidates(catalog: ActionCatalog | Sequence[ActionSpec], exclude: Iterable[str] = ()) -> str:
    excluded = set(exclude)
    return "\n".join(f"{a.name}: {a.description}" for a in catalog if a.name not in excluded)


def _spec(kind: TaskKind, name: str, description: str) -> ActionSpec:
    if kind.is_generation:
        behavior = ActionBehavior.PROMPT_REFINE
    elif name.endswith("augmenter"):
        behavior = ActionBehavior.GENERATIVE_AUGMENT
    else:
        behavior = ActionBehavior.EXPERT_ADVICE
    return ActionSpec(name, description, kind, behavior, agent_role=name)


_R_IMAGE = TaskKind.reasoning(Modality.IMAGE)
_R_AUDIO = TaskKind.reasoning(Modality.AUDIO)
_R_VIDEO = TaskKind.reasoning(Modality.VIDEO)
_R_TEXT = TaskKind.reasoning(Modality.TEXT)
_G_IMAGE = TaskKind.generation(Modality.IMAGE)
_G_VIDEO = TaskKind.generation(Modality.VIDEO)
_G_AUDIO = TaskKind.generation(Modality.AUDIO)

_TABLE: list[tuple[TaskKind, str, str]] = [
    (_R_IMAGE, "text_logic_vision_expert",
     "Strong in logical reasoning, character recognition, code-related visual understanding."),
    (_R_IMAGE, "general_vision_expert",
     "Specialized in basic visual understanding—object existence, counting, spatial positioning, and scene layout."),
    (_R_IMAGE, "cultural_vision_expert",
     "Skilled in interpreting cultural elements, artistic styles, and historical landmarks. "
     "Also capable of general vision tasks."),
    (_R_IMAGE, "visual_augmenter",
     "An auxiliary visual generator that can produce new high-resolution images to support your reasoning. "
     "Use this if the visual content is unclear or missing details."),
    (_R_AUDIO, "general_audio_expert",
     "Specialized in ambient sound perception, environmental acoustics, and physical event recognition. "
     "Skilled at analyzing eco-acoustic cues, temporal sound patterns, and complex sound scenes."),
    (_R_AUDIO, "speech_audio_expert",
     "Expert in human speech comprehension, including speaker role mapping, emotion tone detection, stress "
     "patterns, and factual or conversational content extraction."),
    (_R_AUDIO, "music_audio_expert",
     "Focused on music-related understanding—identifying melody, rhythm, harmony, instrumentation, genre, "
     "lyrics, and structural composition of audio tracks."),
    (_R_AUDIO, "audio_augmenter",
     "An auxiliary audio generator that imagines and describes realistic auditory scenes based on the question "
     "and options. Helps synthesize supporting audio for better inference."),
    (_R_VIDEO, "narrative_event_reasoning_expert",
     "Expert in understanding video narratives and event progressions, including temporal order and causal "
     "relationships."),
    (_R_VIDEO, "role_interaction_expert",
     "Expert in analyzing roles, behaviors, and social or functional interactions between people and objects "
     "in videos."),
    (_R_VIDEO, "goal_procedure_expert",
     "Expert in identifying step-by-step procedures and the underlying goals of actions observed in video "
     "sequences."),
    (_R_VIDEO, "emotion_context_expert",
     "Expert in interpreting emotional cues, situational context, and their impact on behavior through visual "
     "analysis."),
    (_R_VIDEO, "video_augmenter",
     "An auxiliary video generator that creates realistic dynamic scenes based on the question and context. "
     "Helps generate supportive video clips when visual motion, temporal dynamics, or scene evolution are "
     "critical for accurate reasoning."),
    (_G_IMAGE, "image_structure_expert",
     "Responsible for improving the structural clarity of the prompt, including the number of objects, spatial "
     "relationships (left/right/above/below), and proper binding between objects and their attributes. Use this "
     "expert when the image shows incorrect positions, wrong object counts, or confused attribute associations."),
    (_G_IMAGE, "image_visual_expert",
     "Focuses on refining visual details in the prompt, such as color accuracy, size descriptions, shape, "
     "material, or texture. Use this expert when the generated image fails to match the visual appearance "
     "described in the prompt (e.g., wrong colors or missing visual traits)."),
    (_G_IMAGE, "image_scene_expert",
     "Improves overall scene coherence and completeness by adding background elements, contextual settings, or "
     "enhancing the realism of object placement. Use this expert when the image appears sparse, disconnected, "
     "or lacks environmental grounding."),
    (_G_VIDEO, "video_structure_expert",
     "Enhances the structural consistency of the video by focusing on subject identity, object count, spatial "
     "layout, and accurate human-object interactions across frames."),
    (_G_VIDEO, "video_visual_expert",
     "Ensures consistency and quality of visual features such as color, appearance style, clarity, and "
     "aesthetic fidelity across time in the video."),
    (_G_VIDEO, "video_scene_expert",
     "Improves temporal coherence and background consistency by addressing motion smoothness, flickering, and "
     "maintaining a unified scene style and realism throughout the video."),
    (_G_AUDIO, "audio_semantic_expert",
     "Improves the semantic alignment between the audio and the prompt. Use this expert when the generated audio "
     "fails to reflect the intended meaning, emotion, or context described, such as missing the expected sound "
     "types, mood, or narrative structure."),
    (_G_AUDIO, "audio_production_expert",
     "Enhances clarity, layering, and technical structure of the described audio. Use this expert when the "
     "audio lacks proper timing, multi-source coordination, or sounds muddy and poorly composed."),
    (_G_AUDIO, "audio_aesthetic_expert",
     "Focuses on the overall listening experience and emotional/aesthetic resonance. Use this expert when the "
     "audio sounds bland, lacks expressiveness, or fails to create the desired atmosphere or artistic effect."),
]

# Text-only questions have no published catalog; default to the two image
# experts whose specialties (logic, cultural knowledge) do not need pixels.
TEXT_REASONING_ACTIONS = ("text_logic_vision_expert", "cultural_vision_expert")


def _default_catalogs() -> dict[TaskKind, list[ActionSpec]]:
    catalogs: dict[TaskKind, list[ActionSpec]] = {}
    for kind, name, description in _TABLE:
        catalogs.setdefault(kind, []).append(_spec(kind, name, description))
    image_specs = {a.name: a for a in catalogs[_R_IMAGE]}
    catalogs[_R_TEXT] = [_spec(_R_TEXT, n, image_specs[n].description) for n in TEXT_REASONING_ACTIONS]
    return catalogs


class ActionRegistry:
    """All catalogs, optionally extended (never shrunk) from a JSON file."""

    def __init__(self, extensions: Sequence[ActionSpec] = ()) -> None:
        catalogs = _default_catalogs()
        for spec in extensions:
            entries = catalogs.setdefault(spec.task_kind, [])
            if any(a.name == spec.name for a in entries):
                raise ConfigError(f"extension action {spec.name!r} already exists in the {spec.task_kind} catalog")
            entries.append(spec)
        self._catalogs = {k: ActionCatalog(k, v) for k, v in catalogs.items()}

    @classmethod
    def load(cls, extension_file: str | Path | None = None) -> ActionRegistry:
        if extension_file is None:
            return cls()
        try:
            data = json.loads(Path(extension_file).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read catalog extension {extension_file}: {exc}") from exc
        if not isinstance(data, list):
            raise ConfigError("catalog extension file must hold a JSON list")
        return cls([ActionSpec.from_dict(d) for d in data])

    def catalog_for(self, kind: TaskKind) -> ActionCatalog:
        try:
            return self._catalogs[kind]
        except KeyError:
            raise UnsupportedKind(f"no action catalog for {kind}") from None

    def kinds(self) -> list[TaskKind]:
        return sorted(self._catalogs)

    def all_actions(self) -> list[ActionSpec]:
        return [a for k in self.kinds() for a in self._catalogs[k]]

    def dump(self) -> list[dict[str, Any]]:
        return [a.to_dict() for a in self.all_actions()]


_DEFAULT: ActionRegistry | None = None


def catalog_for(kind: TaskKind) -> ActionCatalog:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = ActionRegistry()
    return _DEFAULT.catalog_for(kind)
