#pragma once

#include "guiagent/action_model.hpp"
#include "guiagent/ui_model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace guiagent {

struct DemoStep {
    Observation pre;
    ActionRecord action; // carries the rationale in `reason`
    Observation post;
    std::optional<std::string> rationale_error; // set when augmentation failed for this step
};

/// A recorded successful trajectory; step 1 is always the start marker.
struct Demonstration {
    std::string family;
    std::int64_t seed = 0;
    std::string utterance;
    std::vector<DemoStep> steps;

    std::vector<ActionRecord> records() const;
};

/// Throws std::invalid_argument when the start marker is missing or the
/// post/pre chain is broken.
void check_chain(const Demonstration& demo);

Demonstration strip_reasons(Demonstration demo);

/// `DEMO_<index> = { ... }` block, every line terminated by '\n'.
std::string render_demo(const Demonstration& demo, int index, bool with_reasons);

nlohmann::json to_json(const Demonstration& demo);
Demonstration demonstration_from_json(const nlohmann::json& j);

Demonstration load_demonstration(const std::filesystem::path& path);
void save_demonstration(const Demonstration& demo, const std::filesystem::path& path);

/// Per-family demonstrations in stored order. Read-only once populated.
class DemoStore {
public:
    void add(Demonstration demo);
    const std::vector<Demonstration>* find(const std::string& family) const;
    const std::map<std::string, std::vector<Demonstration>>& families() const { return by_family_; }
    std::size_t size() const;

    /// Reads `manifest.json` ({"families": {name: [file, ...]}}) under `dir`.
    static DemoStore load(const std::filesystem::path& dir);

    /// Writes one file per demo plus the manifest. Returns the written file names.
    std::vector<std::string> save(const std::filesystem::path& dir) const;

private:
    std::map<std::string, std::vector<Demonstration>> by_family_;
};

std::string demo_file_name(const Demonstration& demo);

} // namespace guiagent
