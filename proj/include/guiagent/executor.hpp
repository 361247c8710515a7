#pragma once

#include "guiagent/action_model.hpp"
#include "guiagent/demonstration.hpp"
#include "guiagent/environment.hpp"
#include "guiagent/gateway.hpp"
#include "guiagent/prompter.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace guiagent {

class SimEnv;

struct EpisodeConfig {
    int max_rounds = 10;
    int max_actions_per_round = 8;
    int demo_max = 5;
    bool use_tools = true;
    bool no_demos = false;
    bool no_cot = false;
    bool strip_rationales = false;
    std::string model = "gpt-4o";
    double temperature = 0.0;
    int max_tokens = 2048;
    double timeout_s = 120.0;

    /// Throws std::invalid_argument on out-of-range values.
    void check() const;
    PromptOptions prompt_options() const;
};

nlohmann::json to_json(const EpisodeConfig& config);
/// Missing keys keep their defaults.
EpisodeConfig episode_config_from_json(const nlohmann::json& j, EpisodeConfig base = {});

enum class Outcome { success, failure, timeout, error };

std::string_view to_string(Outcome outcome);

/// One line of the episode transcript.
struct RoundLog {
    int round = 0;
    std::string prompt;
    nlohmann::json response;       // response JSON, or {"error": ...}
    nlohmann::json parsed_actions; // array of {name, args}
    nlohmann::json executed;       // records appended this round
    std::optional<int> halted_at;  // 0-based proposal index after which the round stopped
    std::string post_digest;
    std::string status;
    std::optional<std::string> error;
};

nlohmann::json to_json(const RoundLog& log);

struct EpisodeResult {
    std::string family;
    std::int64_t seed = 0;
    Outcome outcome = Outcome::timeout;
    int rounds = 0;
    std::vector<ActionRecord> history;
    std::vector<RoundLog> transcript;
    std::optional<std::string> error;
    int gateway_errors = 0;
    Usage usage;
};

/// Transcript as JSON lines, each terminated by '\n'.
std::string transcript_jsonl(const EpisodeResult& result);

/// Produces the observation the agent sees. The default reads the environment's ground truth.
using Observer = std::function<Observation(const Environment&)>;
Observer ground_truth_observer();

class ActionRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Primitive sequence for a validated command.
std::vector<Primitive> decompose(const CheckedCommand& command);

/// Applies the primitives in order. Throws ActionRejected when the environment
/// refuses one; a held modifier is released first.
std::vector<Primitive> execute_command(Environment& env, const CheckedCommand& command);

/// True when the screen changed since the proposal was made.
bool halt_check(const std::string& pre_digest, const Observation& post);

struct EpisodeContext {
    std::string family;
    std::int64_t seed = 0;
    std::vector<Demonstration> demos;
    GuidelineSet guidelines = GuidelineSet::defaults();
};

ChatRequest make_request(const PromptBundle& bundle, const EpisodeConfig& config);

EpisodeResult run_episode(Environment& env, const Observer& observer, ChatBackend& gateway,
                          const EpisodeContext& context, const EpisodeConfig& config);

/// Answers every proposal request with the environment's oracle plan, rendered
/// as action lines numbered from the index the prompt asks for.
class OracleBackend : public ChatBackend {
public:
    explicit OracleBackend(const SimEnv& env) : env_(env) {}
    ChatResponse complete(const ChatRequest& req) override;

private:
    const SimEnv& env_;
};

/// The `N` in "next actions(action_N" of a proposal prompt, or nullopt.
std::optional<int> requested_action_index(std::string_view prompt);

} // namespace guiagent
