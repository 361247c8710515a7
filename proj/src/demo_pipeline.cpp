#include "guiagent/demo_pipeline.hpp"

#include "guiagent/executor.hpp"
#include "guiagent/prompter.hpp"
#include "guiagent/sim_env.hpp"

#include <atomic>
#include <thread>

namespace guiagent {

namespace {

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

} // namespace

Demonstration script_demo(std::string_view family, std::int64_t seed, bool strict_split, int max_steps)
{
    if (strict_split && (seed < kDemoSeedFirst || seed > kDemoSeedLast))
        throw std::invalid_argument("seed " + std::to_string(seed) + " is outside the demonstration split " +
                                    std::to_string(kDemoSeedFirst) + "-" + std::to_string(kDemoSeedLast));
    auto env = SimEnv::reset(family, seed);

    Demonstration demo;
    demo.family = std::string(family);
    demo.seed = seed;
    demo.utterance = env.utterance();
    const auto initial = env.snapshot();
    demo.steps.push_back({initial, start_record(std::string(kStartReason)), initial, std::nullopt});

    for (int step = 0; step < max_steps && env.status() == EnvStatus::running; ++step) {
        const auto pre = env.snapshot();
        const auto plan = env.oracle_plan();
        if (plan.empty())
            throw OracleFailed("oracle for " + demo.family + " seed " + std::to_string(seed) + " has no action");
        CheckedCommand checked;
        try {
            checked = validate(plan.front(), pre);
            execute_command(env, checked);
        } catch (const std::exception& e) {
            throw OracleFailed("oracle for " + demo.family + " seed " + std::to_string(seed) +
                               " proposed an unusable action: " + e.what());
        }
        const int index = demo.steps.back().action.index + 1;
        demo.steps.push_back({pre, make_record(index, checked.command, checked.target), env.snapshot(), std::nullopt});
    }
    if (env.status() != EnvStatus::success)
        throw OracleFailed("oracle for " + demo.family + " seed " + std::to_string(seed) + " ended with status " +
                           std::string(to_string(env.status())));
    return demo;
}

ChatRequest rationale_request(const Demonstration& demo, int k, const AugmentOptions& options)
{
    if (k < 2 || static_cast<std::size_t>(k) > demo.steps.size())
        throw std::out_of_range("no demonstration step " + std::to_string(k));
    const auto& step = demo.steps[static_cast<std::size_t>(k - 1)];
    ChatRequest req;
    req.model = options.model;
    req.messages.push_back({"user", build_rationale_prompt(demo.utterance, demo.records(), k, step.pre, step.post)});
    req.temperature = options.temperature;
    req.max_tokens = options.max_tokens;
    req.timeout_s = options.timeout_s;
    return req;
}

Demonstration augment_rationales(Demonstration demo, ChatBackend& gateway, const AugmentOptions& options)
{
    check_chain(demo);
    demo.steps.front().action.reason = std::string(kStartReason);
    for (std::size_t i = 1; i < demo.steps.size(); ++i) {
        auto& step = demo.steps[i];
        step.action.reason.reset();
        step.rationale_error.reset();
        try {
            const auto resp = gateway.complete(rationale_request(demo, static_cast<int>(i) + 1, options));
            auto text = trim(resp.text.value_or(""));
            if (text.empty())
                step.rationale_error = "empty rationale";
            else
                step.action.reason = std::move(text);
        } catch (const GatewayError& e) {
            step.rationale_error = std::string(to_string(e.kind())) + ": " + e.what();
        }
    }
    return demo;
}

std::vector<Demonstration> augment_all(std::vector<Demonstration> demos, ChatBackend& gateway,
                                       const AugmentOptions& options, int parallel)
{
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < demos.size(); i = next++)
            demos[i] = augment_rationales(std::move(demos[i]), gateway, options);
    };
    const auto n = static_cast<std::size_t>(std::max(1, parallel));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(n, demos.size()); ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    return demos;
}

} // namespace guiagent
