#include "guiagent/executor.hpp"

#include "guiagent/sim_env.hpp"

#include <charconv>

namespace guiagent {

namespace {

nlohmann::json action_json(const ActionCommand& c)
{
    return {{"name", to_string(name_of(c))}, {"args", arguments_of(c)}};
}

std::pair<int, int> center(const UiElement& el)
{
    return {render_center(el.bbox.left, el.bbox.right), render_center(el.bbox.top, el.bbox.bottom)};
}

std::vector<Primitive> chord(char ch)
{
    return {prim::ModifierDown{Modifier::ctrl}, prim::Key{ch}, prim::ModifierUp{Modifier::ctrl}};
}

} // namespace

void EpisodeConfig::check() const
{
    if (max_rounds < 1)
        throw std::invalid_argument("max_rounds must be >= 1");
    if (max_actions_per_round < 1)
        throw std::invalid_argument("max_actions_per_round must be >= 1");
    if (demo_max < 0)
        throw std::invalid_argument("demo_max must be >= 0");
    if (temperature < 0.0)
        throw std::invalid_argument("temperature must be >= 0");
}

PromptOptions EpisodeConfig::prompt_options() const
{
    PromptOptions o;
    o.use_tools = use_tools;
    o.include_demos = !no_demos;
    o.include_cot = !no_cot;
    o.demo_reasons = !strip_rationales;
    return o;
}

nlohmann::json to_json(const EpisodeConfig& c)
{
    return {{"max_rounds", c.max_rounds},
            {"max_actions_per_round", c.max_actions_per_round},
            {"demo_max", c.demo_max},
            {"use_tools", c.use_tools},
            {"no_demos", c.no_demos},
            {"no_cot", c.no_cot},
            {"strip_rationales", c.strip_rationales},
            {"model", c.model},
            {"temperature", c.temperature},
            {"max_tokens", c.max_tokens},
            {"timeout_s", c.timeout_s}};
}

EpisodeConfig episode_config_from_json(const nlohmann::json& j, EpisodeConfig c)
{
    c.max_rounds = j.value("max_rounds", c.max_rounds);
    c.max_actions_per_round = j.value("max_actions_per_round", c.max_actions_per_round);
    c.demo_max = j.value("demo_max", c.demo_max);
    c.use_tools = j.value("use_tools", c.use_tools);
    c.no_demos = j.value("no_demos", c.no_demos);
    c.no_cot = j.value("no_cot", c.no_cot);
    c.strip_rationales = j.value("strip_rationales", c.strip_rationales);
    c.model = j.value("model", c.model);
    c.temperature = j.value("temperature", c.temperature);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    return c;
}

std::string_view to_string(Outcome outcome)
{
    switch (outcome) {
    case Outcome::success:
        return "success";
    case Outcome::failure:
        return "failure";
    case Outcome::timeout:
        return "timeout";
    case Outcome::error:
        return "error";
    }
    return "?";
}

nlohmann::json to_json(const RoundLog& log)
{
    nlohmann::json j;
    j["round"] = log.round;
    j["prompt"] = log.prompt;
    j["response"] = log.response;
    j["parsed_actions"] = log.parsed_actions;
    j["executed"] = log.executed;
    j["halted_at"] = log.halted_at ? nlohmann::json(*log.halted_at) : nlohmann::json(nullptr);
    j["post_digest"] = log.post_digest;
    j["status"] = log.status;
    if (log.error)
        j["error"] = *log.error;
    return j;
}

std::string transcript_jsonl(const EpisodeResult& result)
{
    std::string out;
    for (const auto& r : result.transcript)
        out += to_json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    return out;
}

Observer ground_truth_observer()
{
    return [](const Environment& env) { return env.snapshot(); };
}

std::vector<Primitive> decompose(const CheckedCommand& command)
{
    return std::visit(
        [&](const auto& c) -> std::vector<Primitive> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, cmd::ClickElement>) {
                const auto [x, y] = center(*command.target);
                return {prim::MouseMove{x, y}, prim::MouseDown{}, prim::MouseUp{}};
            } else if constexpr (std::is_same_v<T, cmd::ClickNewPoint>) {
                return {prim::MouseMove{c.x, c.y}, prim::MouseDown{}, prim::MouseUp{}};
            } else if constexpr (std::is_same_v<T, cmd::ControlClickElement>) {
                const auto [x, y] = center(*command.target);
                return {prim::ModifierDown{Modifier::ctrl}, prim::MouseMove{x, y}, prim::MouseDown{}, prim::MouseUp{},
                        prim::ModifierUp{Modifier::ctrl}};
            } else if constexpr (std::is_same_v<T, cmd::TypeText>) {
                std::vector<Primitive> keys;
                for (const char ch : c.string_to_type)
                    keys.push_back(prim::Key{ch});
                return keys;
            } else if constexpr (std::is_same_v<T, cmd::PointElement>) {
                const auto [x, y] = center(*command.target);
                return {prim::MouseMove{x, y}};
            } else if constexpr (std::is_same_v<T, cmd::PressControlA>) {
                return chord('a');
            } else if constexpr (std::is_same_v<T, cmd::PressControlC>) {
                return chord('c');
            } else if constexpr (std::is_same_v<T, cmd::PressControlV>) {
                return chord('v');
            } else if constexpr (std::is_same_v<T, cmd::DragMouseHoldDown>) {
                return {prim::MouseMove{c.x, c.y}, prim::MouseDown{}};
            } else if constexpr (std::is_same_v<T, cmd::DragMouseMove>) {
                return {prim::MouseMove{c.x, c.y}};
            } else {
                return {prim::MouseUp{}};
            }
        },
        command.command);
}

std::vector<Primitive> execute_command(Environment& env, const CheckedCommand& command)
{
    if (target_element(command.command) && !command.target)
        throw std::invalid_argument("element-targeted command was not validated");
    const auto prims = decompose(command);
    bool ctrl_held = false;
    for (const auto& p : prims) {
        const auto r = env.apply(p);
        if (!r.accepted) {
            if (ctrl_held)
                env.apply(prim::ModifierUp{Modifier::ctrl});
            throw ActionRejected(describe(p) + " rejected: " + r.note);
        }
        if (std::holds_alternative<prim::ModifierDown>(p))
            ctrl_held = true;
        else if (std::holds_alternative<prim::ModifierUp>(p))
            ctrl_held = false;
    }
    return prims;
}

bool halt_check(const std::string& pre_digest, const Observation& post) { return post.digest() != pre_digest; }

ChatRequest make_request(const PromptBundle& bundle, const EpisodeConfig& config)
{
    ChatRequest req;
    req.model = config.model;
    if (bundle.system_text)
        req.messages.push_back({"system", *bundle.system_text});
    req.messages.push_back({"user", bundle.user_text});
    req.tool_schemas = bundle.tool_schemas;
    req.temperature = config.temperature;
    req.max_tokens = config.max_tokens;
    req.timeout_s = config.timeout_s;
    return req;
}

EpisodeResult run_episode(Environment& env, const Observer& observer, ChatBackend& gateway,
                          const EpisodeContext& context, const EpisodeConfig& config)
{
    config.check();
    EpisodeResult result;
    result.family = context.family;
    result.seed = context.seed;
    result.history.push_back(start_record());

    std::vector<Demonstration> demos;
    if (!config.no_demos) {
        for (const auto& d : context.demos) {
            if (static_cast<int>(demos.size()) >= config.demo_max)
                break;
            demos.push_back(config.strip_rationales ? strip_reasons(d) : d);
        }
    }
    const auto options = config.prompt_options();

    try {
        for (int round = 1; round <= config.max_rounds && env.status() == EnvStatus::running; ++round) {
            RoundLog log;
            log.round = round;
            log.parsed_actions = nlohmann::json::array();
            log.executed = nlohmann::json::array();
            result.rounds = round;

            const auto obs = observer(env);
            const auto pre_digest = obs.digest();
            const auto bundle =
                build_caap_prompt(env.utterance(), demos, result.history, obs, context.guidelines, options);
            log.prompt = bundle.user_text;

            auto finish = [&](const Observation& post) {
                log.post_digest = post.digest();
                log.status = std::string(to_string(env.status()));
                result.transcript.push_back(std::move(log));
            };

            ChatResponse resp;
            try {
                resp = gateway.complete(make_request(bundle, config));
            } catch (const GatewayError& e) {
                log.response = {{"error", std::string(to_string(e.kind())) + ": " + e.what()}};
                log.error = log.response["error"].get<std::string>();
                ++result.gateway_errors;
                finish(obs);
                continue;
            }
            log.response = to_json(resp);
            result.usage.prompt_tokens += resp.usage.prompt_tokens;
            result.usage.completion_tokens += resp.usage.completion_tokens;
            result.usage.total_tokens += resp.usage.total_tokens;

            std::vector<ActionCommand> proposal;
            try {
                if (resp.tool_calls && !resp.tool_calls->empty())
                    proposal = parse_llm_actions(*resp.tool_calls);
                else
                    proposal = parse_llm_actions(resp.text.value_or(""));
            } catch (const ActionParseError& e) {
                log.error = std::string(to_string(e.kind())) + ": " + e.what();
                finish(obs);
                continue;
            }
            if (static_cast<int>(proposal.size()) > config.max_actions_per_round)
                proposal.resize(static_cast<std::size_t>(config.max_actions_per_round));
            for (const auto& c : proposal)
                log.parsed_actions.push_back(action_json(c));

            Observation current = obs;
            for (std::size_t i = 0; i < proposal.size(); ++i) {
                const int index = result.history.back().index + 1;
                ActionRecord record;
                try {
                    const auto checked = validate(proposal[i], current);
                    record = make_record(index, checked.command, checked.target);
                    try {
                        execute_command(env, checked);
                    } catch (const ActionRejected& e) {
                        record.error = e.what();
                    }
                } catch (const ValidationError& e) {
                    record = make_record(index, proposal[i], std::nullopt);
                    record.error = e.what();
                }
                result.history.push_back(record);
                log.executed.push_back(to_json(record));

                current = observer(env);
                if (env.status() != EnvStatus::running)
                    break;
                if (halt_check(pre_digest, current)) {
                    if (i + 1 < proposal.size())
                        log.halted_at = static_cast<int>(i);
                    break;
                }
            }
            finish(current);
        }
    } catch (const std::exception& e) {
        result.outcome = Outcome::error;
        result.error = e.what();
        return result;
    }

    switch (env.status()) {
    case EnvStatus::success:
        result.outcome = Outcome::success;
        break;
    case EnvStatus::failure:
        result.outcome = Outcome::failure;
        break;
    case EnvStatus::running:
        result.outcome = Outcome::timeout;
        break;
    }
    return result;
}

std::optional<int> requested_action_index(std::string_view prompt)
{
    constexpr std::string_view marker = "next actions(action_";
    const auto pos = prompt.rfind(marker);
    if (pos == std::string_view::npos)
        return std::nullopt;
    const char* first = prompt.data() + pos + marker.size();
    const char* last = prompt.data() + prompt.size();
    int n = 0;
    const auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec != std::errc() || ptr == first)
        return std::nullopt;
    return n;
}

ChatResponse OracleBackend::complete(const ChatRequest& req)
{
    check_request(req);
    const auto index = requested_action_index(req.messages.back().content);
    if (!index)
        throw GatewayError(GatewayError::Kind::bad_response, "prompt does not ask for a next action index");
    const auto plan = env_.oracle_plan();
    ChatResponse r;
    std::string text = "Following the reference solution for this screen.\n\n";
    text += render_action_lines(plan, *index);
    r.text = std::move(text);
    return r;
}

} // namespace guiagent
