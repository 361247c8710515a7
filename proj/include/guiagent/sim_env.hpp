#pragma once

#include "guiagent/action_model.hpp"
#include "guiagent/environment.hpp"
#include "guiagent/hash.hpp"
#include "guiagent/ui_model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace guiagent {

/// Top of the widget area; the utterance banner occupies the rows above.
inline constexpr int kTaskAreaTop = 50;

struct Widget {
    ElementKind kind = ElementKind::text;
    std::optional<ElementSubtype> subtype;
    BBox box;
    std::string tag; // stable role name used by goals and oracles ("submit", "target", ...)
    std::string text;

    bool checked = false;
    bool focused = false;
    bool highlighted = false;
    bool exposes_checked = false;
    bool exposes_focused = false;
    bool exposes_highlighted = false;
    bool exposes_text = false;

    bool hidden = false;   // not on screen at all
    bool password = false; // text is shown masked
    bool draggable = false;
    int group = -1; // radio group
    int owner = -1; // option rows: index of their dropdown
    bool expanded = false;

    /// draggable_text: selected character range [first, second)
    std::optional<std::pair<int, int>> selection;
    int char_width = 5;
};

struct SimState {
    int width = kDefaultScreenWidth;
    int height = kDefaultScreenHeight;
    std::vector<Widget> widgets; // later entries are drawn on top

    int mouse_x = 0;
    int mouse_y = 0;
    bool button_held = false;
    int pressed = -1;      // widget under the cursor at mouse_down
    int drag_widget = -1;  // draggable being moved
    int drag_dx = 0;
    int drag_dy = 0;
    int text_anchor = -1;  // selection anchor inside a draggable_text
    bool ctrl = false;
    bool select_all = false; // the focused buffer is fully selected
    std::string clipboard;

    nlohmann::json answer; // ground truth for goals and oracles; never observed

    int fired = -1; // last activated button / link / icon
    int clicks = 0;
    EnvStatus status = EnvStatus::running;

    int find(std::string_view tag) const;
    const Widget& at(std::string_view tag) const;
    int focused_index() const;
    bool occluded(int index) const;
    /// Topmost visible widget containing the point, or -1.
    int hit_test(int x, int y) const;
};

struct Goal {
    std::function<bool(const SimState&)> success;
    std::function<bool(const SimState&)> failure;
};

struct TaskInstance {
    std::string utterance;
    SimState state;
    Goal goal;
};

class SimEnv;

/// Ground-truth solver: the remaining plan from the current state.
using OraclePolicy = std::function<std::vector<ActionCommand>(const SimEnv&)>;

struct TaskFamily {
    std::string name;
    std::function<TaskInstance(SplitMix64&)> generate;
    OraclePolicy oracle;
};

const std::vector<TaskFamily>& task_families();
const TaskFamily* find_family(std::string_view name);
std::vector<std::string> family_names();

class UnknownFamily : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// PRNG seed for a (family, seed) pair.
std::uint64_t mix_seed(std::string_view family, std::int64_t seed);

class SimEnv : public Environment {
public:
    /// Deterministic instance of a registered family. Throws UnknownFamily.
    static SimEnv reset(std::string_view family, std::int64_t seed);

    /// Environment over a hand-built task (tests, fixtures).
    SimEnv(std::string family, std::int64_t seed, TaskInstance instance, OraclePolicy oracle = {});

    PrimitiveResult apply(const Primitive& p) override;
    Observation snapshot() const override;
    EnvStatus status() const override { return state_.status; }
    const std::string& utterance() const override { return utterance_; }

    const SimState& state() const { return state_; }
    const std::string& family() const { return family_; }
    std::int64_t seed() const { return seed_; }

    /// Observation id of a widget in the current snapshot, or nullopt when off screen.
    std::optional<int> element_id(int widget_index) const;
    std::optional<int> element_id(std::string_view tag) const;

    /// Oracle plan for the current state; empty when no oracle is attached.
    std::vector<ActionCommand> oracle_plan() const;

    nlohmann::json fixture_json() const;

private:
    std::vector<int> visible_order() const;
    void click(int index);
    void evaluate();

    std::string family_;
    std::int64_t seed_;
    std::string utterance_;
    SimState state_;
    Goal goal_;
    OraclePolicy oracle_;
};

/// Widget helpers used by the task generators and by tests.
Widget make_button(std::string tag, BBox box, std::string text);
Widget make_radio(std::string tag, BBox box, std::string text, int group);
Widget make_checkbox(std::string tag, BBox box, std::string text);
Widget make_text(std::string tag, BBox box, std::string text);
Widget make_input(std::string tag, BBox box, bool password = false);

} // namespace guiagent
