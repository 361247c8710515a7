"""Python bindings for the guiagent C++ core."""

from ._core import (
    ActionParseError,
    ActionRejected,
    GatewayError,
    OracleFailed,
    SimEnv,
    UnknownActionName,
    UnknownFamily,
    ValidationError,
    build_caap_prompt,
    build_rationale_prompt,
    family_names,
    function_schemas,
    observation_digest,
    parse_llm_actions,
    render_action_line,
    render_center,
    render_demo,
    render_observation,
    render_screen,
    run_eval,
    script_demo,
    semi_mask,
    summarize,
    xbox_mask,
)

__all__ = [
    "ActionParseError",
    "ActionRejected",
    "GatewayError",
    "OracleFailed",
    "SimEnv",
    "UnknownActionName",
    "UnknownFamily",
    "ValidationError",
    "build_caap_prompt",
    "build_rationale_prompt",
    "family_names",
    "function_schemas",
    "observation_digest",
    "parse_llm_actions",
    "render_action_line",
    "render_center",
    "render_demo",
    "render_observation",
    "render_screen",
    "run_eval",
    "script_demo",
    "semi_mask",
    "summarize",
    "xbox_mask",
]
