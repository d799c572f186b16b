from .parsing import (
    JUDGEMENT_DIMENSIONS,
    JudgementReport,
    SelectorChoice,
    dimension_names,
    parse_judgement,
    parse_score,
    parse_selector,
    render_score,
)
from .registry import (
    GENERAL_ANSWER,
    PERCEIVER,
    PLANNER,
    REFLECTOR,
    SPEAKER,
    SUMMARIZER,
    AgentRole,
    OutputShape,
    RoleRegistry,
    extender_role,
    judger_role,
    registry_load,
    scorer_role,
    selector_role,
)

__all__ = [
    "AgentRole", "GENERAL_ANSWER", "JUDGEMENT_DIMENSIONS", "JudgementReport", "OutputShape", "PERCEIVER",
    "PLANNER", "REFLECTOR", "RoleRegistry", "SPEAKER", "SUMMARIZER", "SelectorChoice", "dimension_names",
    "extender_role", "judger_role", "parse_judgement", "parse_score", "parse_selector", "registry_load",
    "render_score", "scorer_role", "selector_role",
]
