#include "doctest.h"
#include "fixtures.hpp"

#include "guiagent/action_model.hpp"
#include "guiagent/hash.hpp"

using namespace guiagent;

TEST_CASE("action lines render in the grammar")
{
    CHECK(render_action_line(2, cmd::ClickElement{1}) ==
          "Action_2=(Action: functions.click_element, Argument: {element_id: 1})");
    CHECK(render_action_line(3, cmd::TypeText{"he said \"hi\""}) ==
          "Action_3=(Action: functions.type_text, Argument: {string_to_type: \"he said \\\"hi\\\"\"})");
    CHECK(render_action_line(4, cmd::PressControlA{}) == "Action_4=(Action: functions.press_control_A, Argument: {})");
    CHECK(render_action_line(5, cmd::DragMouseHoldDown{3, 60}) ==
          "Action_5=(Action: functions.drag_mouse_hold_down, Argument: {x: 3, y: 60})");
}

TEST_CASE("reference response parses to one click")
{
    const auto cmds = parse_llm_actions(read_fixture("llm_response_choose_list.txt"));
    REQUIRE(cmds.size() == 1);
    CHECK(cmds[0] == ActionCommand{cmd::ClickElement{1}});
}

TEST_CASE("parser ignores prose and keeps order")
{
    const auto cmds = parse_llm_actions("I will type.\nAction_2=(Action: functions.click_element, Argument: {element_id: 3})\n"
                                        "then\nAction_3=(Action: functions.type_text, Argument: {string_to_type: \"a, b\"})\n");
    REQUIRE(cmds.size() == 2);
    CHECK(cmds[1] == ActionCommand{cmd::TypeText{"a, b"}});
}

TEST_CASE("parser error kinds")
{
    auto kind_of = [](std::string_view text) {
        try {
            parse_llm_actions(text);
        } catch (const ActionParseError& e) {
            return std::optional(e.kind());
        }
        return std::optional<ActionParseError::Kind>();
    };
    CHECK(kind_of("nothing here") == ActionParseError::Kind::empty_proposal);
    CHECK(kind_of("Action_2=(Action: functions.fly, Argument: {})") == ActionParseError::Kind::unknown_action);
    CHECK(kind_of("Action_2=(Action: functions.click_element, Argument: {element_id: x})") ==
          ActionParseError::Kind::malformed_argument);
    CHECK(kind_of("Action_3=(Action: functions.press_control_A, Argument: {})\n"
                  "Action_2=(Action: functions.press_control_C, Argument: {})") ==
          ActionParseError::Kind::index_disorder);
}

TEST_CASE("render and parse round-trip on random commands")
{
    SplitMix64 rng(11);
    for (int i = 0; i < 300; ++i) {
        std::vector<ActionCommand> cmds;
        const int n = rng.uniform_int(1, 5);
        for (int k = 0; k < n; ++k) {
            const auto name = all_actions()[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kActionCount) - 1))];
            nlohmann::json args = nlohmann::json::object();
            for (const auto& p : action_spec(name).params) {
                if (p.type == ParamType::integer)
                    args[std::string(p.name)] = rng.uniform_int(0, 300);
                else {
                    std::string s;
                    for (int c = rng.uniform_int(0, 12); c > 0; --c)
                        s += static_cast<char>(rng.uniform_int(32, 126));
                    args[std::string(p.name)] = s;
                }
            }
            cmds.push_back(make_command(to_string(name), args));
        }
        CHECK(parse_llm_actions(render_action_lines(cmds, 2)) == cmds);
    }
}

TEST_CASE("tool calls accept object or string arguments")
{
    const std::vector<ToolCall> calls = {{"click_element", {{"element_id", 2}}},
                                         {"type_text", "{\"string_to_type\": \"abc\"}"},
                                         {"click_new_point", {{"x", "4"}, {"y", 70}}}};
    const auto cmds = parse_llm_actions(calls);
    REQUIRE(cmds.size() == 3);
    CHECK(cmds[0] == ActionCommand{cmd::ClickElement{2}});
    CHECK(cmds[1] == ActionCommand{cmd::TypeText{"abc"}});
    CHECK(cmds[2] == ActionCommand{cmd::ClickNewPoint{4, 70}});
    CHECK_THROWS_AS(parse_llm_actions(std::vector<ToolCall>{{"teleport", {}}}), ActionParseError);
}

TEST_CASE("function schemas")
{
    const auto expected = nlohmann::json::parse(read_fixture("function_schemas_click_type.json"));
    CHECK(function_schemas(std::set<std::string>{"type_text", "click_element"}) == expected);
    CHECK(function_schemas(std::set<ActionName>{ActionName::click_element, ActionName::type_text}) == expected);
    const auto all = function_schemas(std::set<ActionName>(all_actions().begin(), all_actions().end()));
    CHECK(all.size() == kActionCount);
    CHECK_THROWS_AS(function_schemas(std::set<std::string>{"warp"}), UnknownActionName);
}

TEST_CASE("validation binds element ids and checks points")
{
    UiElement b;
    b.kind = ElementKind::button;
    b.bbox = {1, 98, 80, 112};
    b.text = "Submit";
    const auto obs = make_observation({b});
    const auto ok = validate(cmd::ClickElement{1}, obs);
    REQUIRE(ok.target);
    CHECK(*ok.target == b);
    try {
        validate(cmd::ClickElement{2}, obs);
        FAIL("stale id accepted");
    } catch (const ValidationError& e) {
        CHECK(e.kind() == ValidationError::Kind::stale_element_id);
    }
    try {
        validate(cmd::ClickNewPoint{160, 5}, obs);
        FAIL("off-screen point accepted");
    } catch (const ValidationError& e) {
        CHECK(e.kind() == ValidationError::Kind::out_of_bounds_point);
    }
    CHECK_FALSE(validate(cmd::TypeText{"x"}, obs).target);
}

TEST_CASE("history records")
{
    CHECK(render_record(start_record(), true) == "action_1: {name: start}");
    CHECK(render_record(start_record(std::string(kStartReason)), true) ==
          "action_1: {name: start, reason: \"Initiating the task.\"}");
    UiElement dd;
    dd.kind = ElementKind::dropdown;
    dd.bbox = {1, 152, 55, 76};
    dd.text = "Theodora";
    dd.focused = false;
    auto r = make_record(2, cmd::ClickElement{1}, dd);
    CHECK(render_record(r, true) == "action_2: {name: click_element, arg: {type: dropdown, X: 76 [1-152], Y: 66 "
                                    "[55-76], text: \"Theodora\", focused: False}}");
    auto t = make_record(3, cmd::TypeText{"Helli"}, std::nullopt);
    t.reason = "Typing.";
    CHECK(render_record(t, true) == "action_3: {name: type_text, arg: {string_to_type: \"Helli\"}, reason: \"Typing.\"}");
    CHECK(render_record(t, false) == "action_3: {name: type_text, arg: {string_to_type: \"Helli\"}}");
    CHECK(record_from_json(to_json(t), 3) == t);
}
