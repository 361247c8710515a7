#include "doctest.h"

#include "guiagent/executor.hpp"
#include "guiagent/sim_env.hpp"

using namespace guiagent;

namespace {

EpisodeContext context(const std::string& family, std::int64_t seed)
{
    return {family, seed, {}, GuidelineSet::defaults()};
}

std::string lines(const std::vector<ActionCommand>& cmds, int first = 2) { return render_action_lines(cmds, first); }

} // namespace

TEST_CASE("commands decompose into primitives at the rendered center")
{
    UiElement b;
    b.kind = ElementKind::button;
    b.bbox = {1, 98, 80, 112};
    const CheckedCommand click{cmd::ClickElement{1}, b};
    CHECK(decompose(click) == std::vector<Primitive>{prim::MouseMove{50, 96}, prim::MouseDown{}, prim::MouseUp{}});
    const CheckedCommand ctrl_click{cmd::ControlClickElement{1}, b};
    CHECK(decompose(ctrl_click) ==
          std::vector<Primitive>{prim::ModifierDown{Modifier::ctrl}, prim::MouseMove{50, 96}, prim::MouseDown{},
                                 prim::MouseUp{}, prim::ModifierUp{Modifier::ctrl}});
    CHECK(decompose({cmd::TypeText{"ab"}, std::nullopt}) == std::vector<Primitive>{prim::Key{'a'}, prim::Key{'b'}});
    CHECK(decompose({cmd::PressControlC{}, std::nullopt}) ==
          std::vector<Primitive>{prim::ModifierDown{Modifier::ctrl}, prim::Key{'c'}, prim::ModifierUp{Modifier::ctrl}});
    CHECK(decompose({cmd::DragMouseHoldDown{3, 70}, std::nullopt}) ==
          std::vector<Primitive>{prim::MouseMove{3, 70}, prim::MouseDown{}});
    CHECK(decompose({cmd::DragMouseRelease{}, std::nullopt}) == std::vector<Primitive>{prim::MouseUp{}});
    CHECK(decompose({cmd::PointElement{1}, b}) == std::vector<Primitive>{prim::MouseMove{50, 96}});
}

TEST_CASE("unvalidated element commands are refused")
{
    auto env = SimEnv::reset("click-test", 0);
    CHECK_THROWS_AS(execute_command(env, {cmd::ClickElement{1}, std::nullopt}), std::invalid_argument);
}

TEST_CASE("rejected primitive releases ctrl")
{
    auto env = SimEnv::reset("click-test", 0);
    CHECK_THROWS_AS(execute_command(env, {cmd::DragMouseRelease{}, std::nullopt}), ActionRejected);
    CHECK_FALSE(env.state().ctrl);
}

TEST_CASE("login-user halts after the click that changes focus")
{
    auto env = SimEnv::reset("login-user", 0);
    OracleBackend oracle(env);
    const auto r = run_episode(env, ground_truth_observer(), oracle, context("login-user", 0), EpisodeConfig{});
    CHECK(r.outcome == Outcome::success);
    REQUIRE(r.transcript.size() == 5);
    const auto& first = r.transcript[0];
    CHECK(first.parsed_actions.size() == 5);
    CHECK(first.parsed_actions[1]["name"] == "type_text");
    REQUIRE(first.executed.size() == 1);
    CHECK(first.executed[0]["name"] == "click_element");
    CHECK(first.halted_at == 0);
    // type_text leaves the focused field's text changed too, halting again
    CHECK(r.transcript[1].executed.size() == 1);
    CHECK(r.transcript[1].executed[0]["name"] == "type_text");
    CHECK(r.transcript.back().status == "success");
    CHECK_FALSE(r.transcript.back().halted_at);
    CHECK(r.history.size() == 6);
    CHECK(r.history[1].index == 2);
    CHECK(r.history[5].index == 6);
}

TEST_CASE("oracle round counts per family")
{
    struct Want {
        const char* family;
        int rounds;
    };
    for (const auto& w : {Want{"login-user", 5}, Want{"drag-box", 2}, Want{"highlight-text", 1}, Want{"choose-list", 3},
                          Want{"click-test", 1}}) {
        auto env = SimEnv::reset(w.family, 1);
        OracleBackend oracle(env);
        const auto r = run_episode(env, ground_truth_observer(), oracle, context(w.family, 1), EpisodeConfig{});
        CHECK_MESSAGE(r.outcome == Outcome::success, w.family);
        CHECK_MESSAGE(r.rounds == w.rounds, w.family);
    }
}

TEST_CASE("episodes time out at the round budget")
{
    auto env = SimEnv::reset("click-checkboxes", 2);
    std::vector<std::string> texts(3, lines({cmd::ClickNewPoint{0, 0}}));
    auto gw = ScriptedBackend::sequence(texts);
    EpisodeConfig cfg;
    cfg.max_rounds = 3;
    const auto r = run_episode(env, ground_truth_observer(), *gw, context("click-checkboxes", 2), cfg);
    CHECK(r.outcome == Outcome::timeout);
    CHECK(r.rounds == 3);
    CHECK(r.transcript.size() == 3);
}

TEST_CASE("gateway and parse errors consume a round and are logged")
{
    auto env = SimEnv::reset("click-test", 3);
    OracleBackend oracle(env);
    auto gw = ScriptedBackend::sequence(std::vector<std::string>{"no actions here"});
    EpisodeConfig cfg;
    cfg.max_rounds = 2;
    const auto r = run_episode(env, ground_truth_observer(), *gw, context("click-test", 3), cfg);
    REQUIRE(r.transcript.size() == 2);
    REQUIRE(r.transcript[0].error);
    CHECK(r.transcript[0].error->find("EmptyProposal") != std::string::npos);
    REQUIRE(r.transcript[1].error);
    CHECK(r.transcript[1].error->find("ScriptExhausted") != std::string::npos);
    CHECK(r.gateway_errors == 1);
    CHECK(r.outcome == Outcome::timeout);
}

TEST_CASE("stale ids become error records and the round continues")
{
    auto env = SimEnv::reset("click-test", 4);
    const auto target = *env.element_id("target");
    auto gw = ScriptedBackend::sequence(
        std::vector<std::string>{lines({cmd::ClickElement{99}, cmd::ClickElement{target}})});
    const auto r = run_episode(env, ground_truth_observer(), *gw, context("click-test", 4), EpisodeConfig{});
    CHECK(r.outcome == Outcome::success);
    REQUIRE(r.history.size() == 3);
    REQUIRE(r.history[1].error);
    CHECK_FALSE(r.history[2].error);
    CHECK(r.transcript[0].executed.size() == 2);
}

TEST_CASE("proposals are truncated to the per-round cap")
{
    auto env = SimEnv::reset("click-checkboxes", 0);
    std::vector<ActionCommand> many(6, cmd::PointElement{1});
    auto gw = ScriptedBackend::sequence(std::vector<std::string>{lines(many)});
    EpisodeConfig cfg;
    cfg.max_rounds = 1;
    cfg.max_actions_per_round = 4;
    const auto r = run_episode(env, ground_truth_observer(), *gw, context("click-checkboxes", 0), cfg);
    CHECK(r.transcript[0].parsed_actions.size() == 4);
}

TEST_CASE("tool calls are preferred over text")
{
    auto env = SimEnv::reset("click-test", 5);
    ChatResponse resp;
    resp.text = "prose only";
    resp.tool_calls = std::vector<ToolCall>{{"click_element", {{"element_id", *env.element_id("target")}}}};
    auto gw = ScriptedBackend::sequence(std::vector<ChatResponse>{resp});
    const auto r = run_episode(env, ground_truth_observer(), *gw, context("click-test", 5), EpisodeConfig{});
    CHECK(r.outcome == Outcome::success);
}

TEST_CASE("transcripts are deterministic JSON lines")
{
    auto run = [] {
        auto env = SimEnv::reset("choose-list", 9);
        OracleBackend oracle(env);
        return transcript_jsonl(
            run_episode(env, ground_truth_observer(), oracle, context("choose-list", 9), EpisodeConfig{}));
    };
    const auto a = run();
    CHECK(a == run());
    std::istringstream in(a);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["round"] == ++n);
        CHECK(j.contains("post_digest"));
    }
    CHECK(n == 3);
}

TEST_CASE("requested action index")
{
    CHECK(requested_action_index("What should be the next actions(action_7, action_8, ...)") == 7);
    CHECK_FALSE(requested_action_index("nothing"));
}

TEST_CASE("episode config validation and JSON")
{
    EpisodeConfig c;
    c.max_rounds = 0;
    CHECK_THROWS_AS(c.check(), std::invalid_argument);
    c.max_rounds = 4;
    c.no_cot = true;
    const auto back = episode_config_from_json(to_json(c));
    CHECK(back.max_rounds == 4);
    CHECK(back.no_cot);
    CHECK_FALSE(back.prompt_options().include_cot);
}
