#pragma once

#include "guiagent/ui_model.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace guiagent {

enum class ActionName {
    click_element,
    click_new_point,
    control_click_element,
    type_text,
    point_element,
    press_control_A,
    press_control_C,
    press_control_V,
    drag_mouse_hold_down,
    drag_mouse_move,
    drag_mouse_release,
};

inline constexpr std::size_t kActionCount = 11;

std::string_view to_string(ActionName name);
std::optional<ActionName> parse_action_name(std::string_view name);
const std::array<ActionName, kActionCount>& all_actions();

namespace cmd {
struct ClickElement {
    int element_id;
    bool operator==(const ClickElement&) const = default;
};
struct ClickNewPoint {
    int x, y;
    bool operator==(const ClickNewPoint&) const = default;
};
struct ControlClickElement {
    int element_id;
    bool operator==(const ControlClickElement&) const = default;
};
struct TypeText {
    std::string string_to_type;
    bool operator==(const TypeText&) const = default;
};
struct PointElement {
    int element_id;
    bool operator==(const PointElement&) const = default;
};
struct PressControlA {
    bool operator==(const PressControlA&) const = default;
};
struct PressControlC {
    bool operator==(const PressControlC&) const = default;
};
struct PressControlV {
    bool operator==(const PressControlV&) const = default;
};
struct DragMouseHoldDown {
    int x, y;
    bool operator==(const DragMouseHoldDown&) const = default;
};
struct DragMouseMove {
    int x, y;
    bool operator==(const DragMouseMove&) const = default;
};
struct DragMouseRelease {
    bool operator==(const DragMouseRelease&) const = default;
};
} // namespace cmd

/// Variant order matches ActionName.
using ActionCommand = std::variant<cmd::ClickElement, cmd::ClickNewPoint, cmd::ControlClickElement, cmd::TypeText,
                                   cmd::PointElement, cmd::PressControlA, cmd::PressControlC, cmd::PressControlV,
                                   cmd::DragMouseHoldDown, cmd::DragMouseMove, cmd::DragMouseRelease>;

ActionName name_of(const ActionCommand& command);

/// Element id for element-targeted commands.
std::optional<int> target_element(const ActionCommand& command);

/// Arguments as a JSON object keyed by parameter name.
nlohmann::json arguments_of(const ActionCommand& command);

enum class ParamType { integer, string };

struct ParamSpec {
    std::string_view name;
    ParamType type;
    std::string_view description;
};

struct ActionSpec {
    ActionName name;
    std::string_view description;
    std::vector<ParamSpec> params;
};

const ActionSpec& action_spec(ActionName name);

class UnknownActionName : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Tool definitions (name / description / parameters) in the chat-completions
/// function layout, in vocabulary order.
nlohmann::json function_schemas(const std::set<std::string>& allowed);
nlohmann::json function_schemas(const std::set<ActionName>& allowed);

/// One grammar line: `Action_<k>=(Action: functions.<name>, Argument: {...})`.
std::string render_action_line(int index, const ActionCommand& command);

/// Consecutive lines starting at `first_index`, each terminated by '\n'.
std::string render_action_lines(const std::vector<ActionCommand>& commands, int first_index);

class ActionParseError : public std::runtime_error {
public:
    enum class Kind { empty_proposal, unknown_action, malformed_argument, index_disorder };

    ActionParseError(Kind kind, std::string message, std::string line)
        : std::runtime_error(std::move(message)), kind_(kind), line_(std::move(line))
    {
    }

    Kind kind() const { return kind_; }
    const std::string& line() const { return line_; }

private:
    Kind kind_;
    std::string line_;
};

std::string_view to_string(ActionParseError::Kind kind);

struct ToolCall {
    std::string name;
    nlohmann::json arguments; // object, or a string holding a JSON object
};

/// Free-text response -> ordered commands. Non-matching prose is ignored.
std::vector<ActionCommand> parse_llm_actions(std::string_view response);

/// Structured tool calls -> ordered commands.
std::vector<ActionCommand> parse_llm_actions(const std::vector<ToolCall>& calls);

/// Build a command from a name and argument object, coercing values.
ActionCommand make_command(std::string_view name, const nlohmann::json& arguments);

struct ActionRecord {
    int index = 1;
    std::string name; // action name or "start"
    std::optional<UiElement> element_snapshot;
    std::optional<nlohmann::json> literal_args; // {x, y} or {string_to_type}
    std::optional<std::string> reason;
    std::optional<std::string> error;

    bool operator==(const ActionRecord&) const = default;
};

inline constexpr std::string_view kStartReason = "Initiating the task.";

ActionRecord start_record(std::optional<std::string> reason = std::nullopt);

/// Record for an executed command. `target` is the element acted on, if any.
ActionRecord make_record(int index, const ActionCommand& command, const std::optional<UiElement>& target);

std::string render_record(const ActionRecord& record, bool include_reason, std::string_view prefix = "action_");

/// One line per record, each terminated by '\n'.
std::string render_history(const std::vector<ActionRecord>& records, bool include_reasons,
                           std::string_view prefix = "action_");

nlohmann::json to_json(const ActionRecord& record);
ActionRecord record_from_json(const nlohmann::json& j, int index);

struct CheckedCommand {
    ActionCommand command;
    std::optional<UiElement> target; // element snapshot for element-targeted commands
};

class ValidationError : public std::runtime_error {
public:
    enum class Kind { stale_element_id, out_of_bounds_point };

    ValidationError(Kind kind, std::string message) : std::runtime_error(std::move(message)), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

CheckedCommand validate(const ActionCommand& command, const Observation& obs);

} // namespace guiagent
