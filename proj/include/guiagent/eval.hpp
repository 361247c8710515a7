#pragma once

#include "guiagent/demonstration.hpp"
#include "guiagent/executor.hpp"
#include "guiagent/gateway.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace guiagent {

enum class BackendKind { http, scripted, replay, record };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view name);

struct EvalConfig {
    std::vector<std::string> families; // empty = every registered family
    std::vector<std::int64_t> seeds;   // candidate seeds; the first `episodes_per_task` are used
    int episodes_per_task = 50;
    EpisodeConfig episode;
    BackendKind backend = BackendKind::scripted;
    BackendKind record_source = BackendKind::http; // inner backend of `record`: http or scripted
    HttpConfig http;
    std::optional<std::filesystem::path> cassette;
    std::optional<std::filesystem::path> demos_dir;
    int parallel = 1;
    std::filesystem::path out_dir = "out";

    /// Throws std::invalid_argument on inconsistent values.
    void check() const;
    std::vector<std::string> resolved_families() const;
    std::vector<std::int64_t> resolved_seeds() const;
};

/// Default test split 0-999.
std::vector<std::int64_t> default_test_seeds();

/// "0-49", "1,5,9" or a mix such as "0-9,20".
std::vector<std::int64_t> parse_seed_list(std::string_view text);

/// Configuration echo written into the report. Excludes parallelism, output
/// location and credentials so reports compare equal across those.
nlohmann::json config_echo(const EvalConfig& config);

/// Overlays keys of a JSON config document.
EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig base = {});

/// Exact fraction in lowest terms.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t num, std::int64_t den);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    /// Rounded half-up at three decimals, e.g. "0.940".
    std::string fixed3() const;
    bool operator==(const Rational&) const = default;
};

Rational operator+(const Rational& a, const Rational& b);

struct FamilyStats {
    std::string family;
    int episodes = 0;
    int successes = 0;
    std::map<std::string, int> outcomes;

    Rational sr() const { return Rational::make(successes, episodes); }
};

struct Summary {
    std::vector<FamilyStats> families; // sorted by name
    Rational average;                  // unweighted mean of family SRs
    std::string text;
    nlohmann::json json;
};

/// Aggregates episode results. Throws std::invalid_argument when empty.
Summary summarize(const std::vector<EpisodeResult>& results, const nlohmann::json& config_echo = nullptr);
Summary summarize(std::vector<FamilyStats> stats, const nlohmann::json& config_echo = nullptr);

struct EvalRun {
    std::vector<EpisodeResult> episodes; // ordered by (family, seed)
    Summary summary;
    int infrastructure_errors = 0;
    int invariant_errors = 0;
    double wall_time_s = 0.0;
};

/// Builds a fresh backend for one episode.
using BackendFactory = std::function<std::shared_ptr<ChatBackend>(const class SimEnv&)>;

/// Backend factory for the configured kind. The shared cassette, when any, is returned through `cassette`.
BackendFactory make_backend_factory(const EvalConfig& config, std::shared_ptr<Cassette>& cassette);

EvalRun run_eval(const EvalConfig& config);
EvalRun run_eval(const EvalConfig& config, const BackendFactory& factory);

/// Writes report.json, report.txt, timing.json and episodes/<family>_<seed>.jsonl.
void write_eval_outputs(const EvalRun& run, const std::filesystem::path& out_dir);

std::string episode_file_name(const std::string& family, std::int64_t seed);

} // namespace guiagent
