#pragma once

#include "guiagent/demonstration.hpp"
#include "guiagent/gateway.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace guiagent {

class OracleFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kDemoSeedFirst = 3000;
inline constexpr std::int64_t kDemoSeedLast = 3999;

/// Runs the family's oracle one action per step, capturing the screen before
/// and after each action. Throws OracleFailed unless the episode succeeds.
/// With `strict_split`, seeds outside the demo split are rejected with std::invalid_argument.
Demonstration script_demo(std::string_view family, std::int64_t seed, bool strict_split = true, int max_steps = 32);

struct AugmentOptions {
    std::string model = "gpt-4o";
    double temperature = 0.0;
    int max_tokens = 1024;
    double timeout_s = 120.0;
};

/// Attaches a generated rationale to every non-start step. A step whose request
/// fails keeps no reason and records the error in `rationale_error`.
Demonstration augment_rationales(Demonstration demo, ChatBackend& gateway, const AugmentOptions& options = {});

/// The rationale request for step `k` (1-based, k >= 2) given the reasons gathered so far.
ChatRequest rationale_request(const Demonstration& demo, int k, const AugmentOptions& options = {});

/// Augments demonstrations on up to `parallel` threads; output order matches input.
std::vector<Demonstration> augment_all(std::vector<Demonstration> demos, ChatBackend& gateway,
                                       const AugmentOptions& options = {}, int parallel = 1);

} // namespace guiagent
