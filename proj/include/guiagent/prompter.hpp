#pragma once

#include "guiagent/action_model.hpp"
#include "guiagent/demonstration.hpp"
#include "guiagent/ui_model.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace guiagent {

struct PromptBundle {
    std::optional<std::string> system_text;
    std::string user_text;
    std::optional<nlohmann::json> tool_schemas;
};

/// Closing "MAKE SURE" lines of the action-proposal prompt.
struct GuidelineSet {
    std::vector<std::string> lines;

    static GuidelineSet defaults();
};

/// Builder switches. The four ablation arms are the combinations of
/// `include_demos` and `include_cot`; `demo_reasons=false` gives action-only demos.
struct PromptOptions {
    bool use_tools = true;
    bool include_demos = true;
    bool include_cot = true;
    bool demo_reasons = true;
};

namespace section {
inline constexpr std::string_view kDemonstrations = "### Expert Demonstrations ###";
inline constexpr std::string_view kTask = "### Task Description ###";
inline constexpr std::string_view kHistory = "### Action History ###";
inline constexpr std::string_view kScreen = "### The UI Element List of the Current Screen That You Can Take Next Actions On ###";
inline constexpr std::string_view kActionTypes = "### Action Types ###";
inline constexpr std::string_view kInstructions = "### Instructions ###";
} // namespace section

/// Action-proposal prompt. `history` must begin with the start record.
PromptBundle build_caap_prompt(std::string_view task, const std::vector<Demonstration>& demos,
                               const std::vector<ActionRecord>& history, const Observation& obs,
                               const GuidelineSet& guidelines, const PromptOptions& options = {});

/// Prompt asking for the rationale of action `k` (1-based, k >= 2) of a demonstration.
/// Records before k keep their reasons; records from k on are shown without.
std::string build_rationale_prompt(std::string_view task, const std::vector<ActionRecord>& history, int k,
                                   const Observation& before, const Observation& after);

/// Up to `max_k` demonstrations of `family` in stored order; empty for unknown families.
std::vector<Demonstration> select_demos(const std::string& family, const DemoStore& store, int max_k);

} // namespace guiagent
