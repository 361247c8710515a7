import json
import os
import pathlib

import pytest

import guiagent

FIXTURES = pathlib.Path(
    os.environ.get("GUIAGENT_FIXTURES", pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures")
)


def choose_list_screen():
    return {
        "width": 160,
        "height": 210,
        "elements": [
            {"kind": "dropdown", "bbox": [1, 152, 55, 76], "text": "Theodora", "focused": False},
            {"kind": "button", "bbox": [1, 98, 80, 112], "text": "Submit", "focused": False},
        ],
    }


def test_render_center():
    assert [guiagent.render_center(a, b) for a, b in [(10, 52), (0, 151), (55, 70), (79, 112)]] == [31, 76, 62, 96]


def test_parse_reference_response():
    text = (FIXTURES / "llm_response_choose_list.txt").read_text()
    assert guiagent.parse_llm_actions(text) == [{"name": "click_element", "args": {"element_id": 1}}]
    with pytest.raises(guiagent.ActionParseError):
        guiagent.parse_llm_actions("no actions")


def test_action_line_round_trip():
    line = guiagent.render_action_line(2, "type_text", {"string_to_type": "Helli"})
    assert line == 'Action_2=(Action: functions.type_text, Argument: {string_to_type: "Helli"})'
    assert guiagent.parse_llm_actions(line)[0]["args"] == {"string_to_type": "Helli"}


def test_schemas_match_fixture():
    expected = json.loads((FIXTURES / "function_schemas_click_type.json").read_text())
    assert guiagent.function_schemas(["click_element", "type_text"]) == expected


def test_golden_prompt():
    demo = json.loads((FIXTURES / "demo_choose_list.json").read_text())
    bundle = guiagent.build_caap_prompt(
        "Select Helli from the list and click Submit.",
        [{"name": "start"}],
        choose_list_screen(),
        demos=[demo],
    )
    assert bundle["user_text"] == (FIXTURES / "caap_prompt_choose_list.txt").read_text()
    assert len(bundle["tool_schemas"]) == 11


def test_sim_env_oracle_solves_login():
    env = guiagent.SimEnv("login-user", 2)
    assert "username" in env.utterance
    for _ in range(10):
        if env.status != "running":
            break
        step = env.oracle_plan()[0]
        env.step(step["name"], step["args"])
    assert env.status == "success"
    with pytest.raises(guiagent.UnknownFamily):
        guiagent.SimEnv("nope", 0)


def test_observation_digest_and_render():
    env = guiagent.SimEnv("choose-list", 3)
    snap = env.snapshot()
    assert guiagent.observation_digest(snap) == guiagent.observation_digest(env.snapshot())
    assert guiagent.render_observation(snap) == env.render()


def test_demo_and_eval():
    demo = guiagent.script_demo("choose-list", 3000)
    assert len(demo["steps"]) == 4
    assert guiagent.render_demo(demo).startswith("DEMO_1 = {")
    result = guiagent.run_eval({"families": ["click-test", "enter-text"], "episodes_per_task": 3})
    assert result["report"]["average_sr"]["text"] == "1.000"
    assert result["report"]["infrastructure_errors"] == 0


def test_summarize():
    s = guiagent.summarize([("a", 50, 47), ("b", 4, 3)])
    assert s["report"]["average_sr"]["text"] == "0.845"
    assert "Average SR" in s["text"]


def test_masks():
    env = guiagent.SimEnv("click-button", 0)
    width, height, pixels = guiagent.render_screen(env.snapshot())
    assert len(pixels) == width * height * 3
    masked = guiagent.semi_mask(pixels, width, height, (10, 50, 60, 80), darken=0.5, outline_px=1)
    assert len(masked) == len(pixels)
    assert masked[(70 * width + 20) * 3 : (70 * width + 20) * 3 + 3] == pixels[(70 * width + 20) * 3 : (70 * width + 20) * 3 + 3]
    assert masked[(61 * width + 9) * 3 : (61 * width + 9) * 3 + 3] == bytes([0, 255, 0])
    crossed = guiagent.xbox_mask(pixels, width, height, (10, 50, 60, 80))
    assert crossed[(60 * width + 10) * 3 : (60 * width + 10) * 3 + 3] == bytes([0, 0, 0])
    with pytest.raises(ValueError):
        guiagent.semi_mask(b"\x00", width, height, (10, 50, 60, 80))
