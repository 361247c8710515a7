#include "guiagent/action_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <type_traits>

namespace guiagent {

namespace {

constexpr std::string_view kElementIdDescription =
    "The id number (ranged from 1 to N) of the screen element to act on. A list of elements will be provided with "
    "the corresponding id numbers.";

const ParamSpec kElementId{"element_id", ParamType::integer, kElementIdDescription};
const ParamSpec kX{"x", ParamType::integer, "The x coordinate of the click location."};
const ParamSpec kY{"y", ParamType::integer, "The y coordinate of the click location."};
const ParamSpec kStringToType{"string_to_type", ParamType::string, "The text to type"};

// Descriptions are kept verbatim, including their original typos.
const std::array<ActionSpec, kActionCount> kSpecs = {{
    {ActionName::click_element,
     "This action moves the mouse pointer to a screen element and performs a left-click to activate that element.",
     {kElementId}},
    {ActionName::click_new_point,
     "This action moves the mouse pointer to a screen location and performs a left-click on the location.",
     {kX, kY}},
    {ActionName::control_click_element,
     "This action click on a screen element while holding down the 'control' modifier key. It is used to select "
     "multiple elements.",
     {kElementId}},
    {ActionName::type_text,
     "This action makes keyboard typing actions to enter the text, for example, into the 'input_field'-type screen "
     "element. Before typing the text, the element on which enter the text must be focused.",
     {kStringToType}},
    {ActionName::point_element,
     "This action moves the mouse pointer to on top of an UI element without clicking it. This sometimes activates "
     "the element and reveals hidden menus or scrollbar.",
     {kElementId}},
    {ActionName::press_control_A, "This is 'Select All'. All text in the activated text field is highlighted.", {}},
    {ActionName::press_control_C, "This is 'Copy'. Highlighted text is copied to the clipboard.", {}},
    {ActionName::press_control_V,
     "This is 'Paste'. Text stored in the clipboard is pasted into the selected area.",
     {}},
    {ActionName::drag_mouse_hold_down,
     "This action initiates the drag action sequence by clicking and holding down the left mouse button. It is used "
     "to move objects on the screenor to highlight a block of text. This action marks the starting point of the "
     "dragging move.",
     {kX, kY}},
    {ActionName::drag_mouse_move,
     "This action is the middle of the drag action sequence. It moves the mouse pointer while holding down the left "
     "mouse button. When used to move an object on the screen, the object will be dragged to the current mouse "
     "location. When used to highlight text, it will highlight up to the current mouse location.",
     {kX, kY}},
    {ActionName::drag_mouse_release,
     "This action marks the end of the drag action sequence. It releases the left mouse button, indicating that the "
     "drag move is finished. starting point of the dragging move.",
     {}},
}};

constexpr std::array<std::string_view, kActionCount> kNames = {
    "click_element",   "click_new_point", "control_click_element", "type_text",
    "point_element",   "press_control_A", "press_control_C",       "press_control_V",
    "drag_mouse_hold_down", "drag_mouse_move", "drag_mouse_release",
};

std::string quote(std::string_view s)
{
    return nlohmann::json(std::string(s)).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string render_args(const nlohmann::json& args, const ActionSpec& spec)
{
    std::string out = "{";
    bool first = true;
    for (const auto& p : spec.params) {
        if (!args.contains(p.name))
            continue;
        if (!first)
            out += ", ";
        first = false;
        out += p.name;
        out += ": ";
        const auto& v = args[std::string(p.name)];
        if (v.is_string())
            out += quote(v.get<std::string>());
        else
            out += v.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    }
    out += "}";
    return out;
}

[[noreturn]] void malformed(std::string message, std::string_view line)
{
    throw ActionParseError(ActionParseError::Kind::malformed_argument, std::move(message), std::string(line));
}

std::optional<long long> parse_integer(std::string_view s)
{
    if (s.empty())
        return std::nullopt;
    long long value = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last)
        return std::nullopt;
    return value;
}

int coerce_int(const nlohmann::json& v, std::string_view key)
{
    std::optional<long long> value;
    if (v.is_number_integer())
        value = v.get<long long>();
    else if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == static_cast<double>(static_cast<long long>(d)))
            value = static_cast<long long>(d);
    } else if (v.is_string())
        value = parse_integer(v.get<std::string>());
    if (!value || *value < INT32_MIN || *value > INT32_MAX)
        throw std::invalid_argument("parameter '" + std::string(key) + "' must be an integer, got " + v.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
    return static_cast<int>(*value);
}

std::string coerce_string(const nlohmann::json& v, std::string_view key)
{
    if (!v.is_string())
        throw std::invalid_argument("parameter '" + std::string(key) + "' must be a string, got " + v.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
    return v.get<std::string>();
}

// Hand-written scanner over one response line. Never throws anything but
// ActionParseError.
class LineScanner {
public:
    explicit LineScanner(std::string_view line) : line_(line) {}

    std::size_t pos = 0;

    bool at_end() const { return pos >= line_.size(); }
    char peek() const { return at_end() ? '\0' : line_[pos]; }

    void skip_ws()
    {
        while (!at_end() && (line_[pos] == ' ' || line_[pos] == '\t'))
            ++pos;
    }

    bool consume(std::string_view token)
    {
        if (line_.substr(pos, token.size()) == token) {
            pos += token.size();
            return true;
        }
        return false;
    }

    std::string_view identifier()
    {
        const auto start = pos;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(line_[pos])) || line_[pos] == '_'))
            ++pos;
        return line_.substr(start, pos - start);
    }

    std::string_view digits()
    {
        const auto start = pos;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(line_[pos])))
            ++pos;
        return line_.substr(start, pos - start);
    }

    // Quoted JSON-style string starting at '"'. Returns nullopt when unterminated.
    std::optional<std::string> quoted()
    {
        const auto start = pos;
        ++pos;
        while (!at_end()) {
            const char c = line_[pos];
            if (c == '\\') {
                pos += 2;
                continue;
            }
            if (c == '"') {
                ++pos;
                try {
                    return nlohmann::json::parse(line_.substr(start, pos - start)).get<std::string>();
                } catch (const nlohmann::json::exception&) {
                    return std::nullopt;
                }
            }
            ++pos;
        }
        return std::nullopt;
    }

    std::string_view bare_value()
    {
        const auto start = pos;
        while (!at_end() && line_[pos] != ',' && line_[pos] != '}')
            ++pos;
        auto v = line_.substr(start, pos - start);
        while (!v.empty() && (v.back() == ' ' || v.back() == '\t'))
            v.remove_suffix(1);
        return v;
    }

private:
    std::string_view line_;
};

nlohmann::json parse_props(LineScanner& sc, std::string_view line)
{
    auto props = nlohmann::json::object();
    sc.skip_ws();
    if (!sc.consume("{"))
        malformed("expected '{' after Argument:", line);
    sc.skip_ws();
    if (sc.consume("}"))
        return props;
    while (true) {
        sc.skip_ws();
        std::string key;
        if (sc.peek() == '"') {
            auto k = sc.quoted();
            if (!k)
                malformed("unterminated property name", line);
            key = std::move(*k);
        } else {
            key = std::string(sc.identifier());
        }
        if (key.empty())
            malformed("expected property name", line);
        sc.skip_ws();
        if (!sc.consume(":"))
            malformed("expected ':' after property '" + key + "'", line);
        sc.skip_ws();
        if (props.contains(key))
            malformed("duplicate property '" + key + "'", line);
        if (sc.peek() == '"') {
            auto v = sc.quoted();
            if (!v)
                malformed("unterminated string value for '" + key + "'", line);
            props[key] = std::move(*v);
        } else {
            const auto v = sc.bare_value();
            if (v.empty())
                malformed("missing value for '" + key + "'", line);
            props[key] = std::string(v);
        }
        sc.skip_ws();
        if (sc.consume("}"))
            return props;
        if (!sc.consume(","))
            malformed("expected ',' or '}' in argument list", line);
    }
}

struct Candidate {
    long long index;
    std::size_t after_paren;
};

// Locates `Action_<k> = (` in the line.
std::optional<Candidate> find_candidate(std::string_view line)
{
    std::size_t from = 0;
    while (true) {
        const auto at = line.find("Action_", from);
        if (at == std::string_view::npos)
            return std::nullopt;
        LineScanner sc(line);
        sc.pos = at + 7;
        const auto digits = sc.digits();
        from = at + 1;
        if (digits.empty() || digits.size() > 9)
            continue;
        sc.skip_ws();
        if (!sc.consume("="))
            continue;
        sc.skip_ws();
        if (!sc.consume("("))
            continue;
        return Candidate{*parse_integer(digits), sc.pos};
    }
}

} // namespace

std::string_view to_string(ActionName name) { return kNames[static_cast<std::size_t>(name)]; }

std::optional<ActionName> parse_action_name(std::string_view name)
{
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name)
            return static_cast<ActionName>(i);
    return std::nullopt;
}

const std::array<ActionName, kActionCount>& all_actions()
{
    static const std::array<ActionName, kActionCount> names = [] {
        std::array<ActionName, kActionCount> a{};
        for (std::size_t i = 0; i < kActionCount; ++i)
            a[i] = static_cast<ActionName>(i);
        return a;
    }();
    return names;
}

std::string_view to_string(ActionParseError::Kind kind)
{
    switch (kind) {
    case ActionParseError::Kind::empty_proposal:
        return "EmptyProposal";
    case ActionParseError::Kind::unknown_action:
        return "UnknownAction";
    case ActionParseError::Kind::malformed_argument:
        return "MalformedArgument";
    case ActionParseError::Kind::index_disorder:
        return "IndexDisorder";
    }
    return "?";
}

ActionName name_of(const ActionCommand& command) { return static_cast<ActionName>(command.index()); }

std::optional<int> target_element(const ActionCommand& command)
{
    return std::visit(
        [](const auto& c) -> std::optional<int> {
            if constexpr (requires { c.element_id; })
                return c.element_id;
            else
                return std::nullopt;
        },
        command);
}

nlohmann::json arguments_of(const ActionCommand& command)
{
    return std::visit(
        [](const auto& c) {
            auto j = nlohmann::json::object();
            if constexpr (requires { c.element_id; })
                j["element_id"] = c.element_id;
            if constexpr (requires { c.x; }) {
                j["x"] = c.x;
                j["y"] = c.y;
            }
            if constexpr (requires { c.string_to_type; })
                j["string_to_type"] = c.string_to_type;
            return j;
        },
        command);
}

const ActionSpec& action_spec(ActionName name) { return kSpecs[static_cast<std::size_t>(name)]; }

nlohmann::json function_schemas(const std::set<ActionName>& allowed)
{
    auto out = nlohmann::json::array();
    for (const auto& spec : kSpecs) {
        if (!allowed.contains(spec.name))
            continue;
        nlohmann::json params;
        params["type"] = "object";
        params["properties"] = nlohmann::json::object();
        params["required"] = nlohmann::json::array();
        for (const auto& p : spec.params) {
            params["properties"][std::string(p.name)] = {
                {"type", p.type == ParamType::integer ? "integer" : "string"},
                {"description", std::string(p.description)},
            };
            params["required"].push_back(std::string(p.name));
        }
        out.push_back({
            {"name", std::string(to_string(spec.name))},
            {"description", std::string(spec.description)},
            {"parameters", std::move(params)},
        });
    }
    return out;
}

nlohmann::json function_schemas(const std::set<std::string>& allowed)
{
    std::set<ActionName> names;
    for (const auto& n : allowed) {
        const auto a = parse_action_name(n);
        if (!a)
            throw UnknownActionName("unknown action name '" + n + "'");
        names.insert(*a);
    }
    return function_schemas(names);
}

std::string render_action_line(int index, const ActionCommand& command)
{
    const auto& spec = action_spec(name_of(command));
    return "Action_" + std::to_string(index) + "=(Action: functions." + std::string(to_string(spec.name)) +
           ", Argument: " + render_args(arguments_of(command), spec) + ")";
}

std::string render_action_lines(const std::vector<ActionCommand>& commands, int first_index)
{
    std::string out;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        out += render_action_line(first_index + static_cast<int>(i), commands[i]);
        out += "\n";
    }
    return out;
}

ActionCommand make_command(std::string_view name, const nlohmann::json& arguments)
{
    const auto action = parse_action_name(name);
    if (!action)
        throw UnknownActionName("unknown action '" + std::string(name) + "'");
    if (!arguments.is_object())
        throw std::invalid_argument("arguments must be an object");
    const auto& spec = action_spec(*action);
    for (const auto& [key, _] : arguments.items()) {
        const bool declared =
            std::any_of(spec.params.begin(), spec.params.end(), [&](const ParamSpec& p) { return p.name == key; });
        if (!declared)
            throw std::invalid_argument("unexpected parameter '" + key + "' for " + std::string(name));
    }
    for (const auto& p : spec.params)
        if (!arguments.contains(p.name))
            throw std::invalid_argument("missing parameter '" + std::string(p.name) + "' for " + std::string(name));

    auto i = [&](const char* k) { return coerce_int(arguments.at(k), k); };
    switch (*action) {
    case ActionName::click_element:
        return cmd::ClickElement{i("element_id")};
    case ActionName::click_new_point:
        return cmd::ClickNewPoint{i("x"), i("y")};
    case ActionName::control_click_element:
        return cmd::ControlClickElement{i("element_id")};
    case ActionName::type_text:
        return cmd::TypeText{coerce_string(arguments.at("string_to_type"), "string_to_type")};
    case ActionName::point_element:
        return cmd::PointElement{i("element_id")};
    case ActionName::press_control_A:
        return cmd::PressControlA{};
    case ActionName::press_control_C:
        return cmd::PressControlC{};
    case ActionName::press_control_V:
        return cmd::PressControlV{};
    case ActionName::drag_mouse_hold_down:
        return cmd::DragMouseHoldDown{i("x"), i("y")};
    case ActionName::drag_mouse_move:
        return cmd::DragMouseMove{i("x"), i("y")};
    case ActionName::drag_mouse_release:
        return cmd::DragMouseRelease{};
    }
    throw UnknownActionName("unknown action");
}

std::vector<ActionCommand> parse_llm_actions(std::string_view response)
{
    std::vector<ActionCommand> out;
    std::optional<long long> last_index;
    std::size_t start = 0;
    while (start <= response.size()) {
        auto end = response.find('\n', start);
        if (end == std::string_view::npos)
            end = response.size();
        auto line = response.substr(start, end - start);
        start = end + 1;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);

        const auto cand = find_candidate(line);
        if (!cand)
            continue;

        LineScanner sc(line);
        sc.pos = cand->after_paren;
        sc.skip_ws();
        if (!sc.consume("Action:"))
            malformed("expected 'Action:'", line);
        sc.skip_ws();
        sc.consume("functions.");
        const auto name = std::string(sc.identifier());
        if (name.empty())
            malformed("missing action name", line);
        sc.skip_ws();
        if (!sc.consume(","))
            malformed("expected ',' after action name", line);
        sc.skip_ws();
        if (!sc.consume("Argument:") && !sc.consume("Arguments:"))
            malformed("expected 'Argument:'", line);
        auto props = parse_props(sc, line);
        sc.skip_ws();
        if (!sc.consume(")"))
            malformed("expected ')' closing the action", line);

        if (!parse_action_name(name))
            throw ActionParseError(ActionParseError::Kind::unknown_action, "unknown action '" + name + "'",
                                   std::string(line));
        if (last_index && cand->index <= *last_index)
            throw ActionParseError(ActionParseError::Kind::index_disorder,
                                   "action index " + std::to_string(cand->index) + " does not follow " +
                                       std::to_string(*last_index),
                                   std::string(line));
        last_index = cand->index;
        try {
            out.push_back(make_command(name, props));
        } catch (const std::invalid_argument& e) {
            malformed(e.what(), line);
        }
        if (end == response.size())
            break;
    }
    if (out.empty())
        throw ActionParseError(ActionParseError::Kind::empty_proposal, "no action lines in response", "");
    return out;
}

std::vector<ActionCommand> parse_llm_actions(const std::vector<ToolCall>& calls)
{
    std::vector<ActionCommand> out;
    for (const auto& call : calls) {
        const auto line = call.name + " " + call.arguments.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        if (!parse_action_name(call.name))
            throw ActionParseError(ActionParseError::Kind::unknown_action, "unknown action '" + call.name + "'", line);
        nlohmann::json args = call.arguments;
        if (args.is_string()) {
            try {
                args = nlohmann::json::parse(args.get<std::string>());
            } catch (const nlohmann::json::exception& e) {
                malformed(std::string("arguments are not valid JSON: ") + e.what(), line);
            }
        }
        if (args.is_null())
            args = nlohmann::json::object();
        try {
            out.push_back(make_command(call.name, args));
        } catch (const std::invalid_argument& e) {
            malformed(e.what(), line);
        }
    }
    if (out.empty())
        throw ActionParseError(ActionParseError::Kind::empty_proposal, "no tool calls in response", "");
    return out;
}

ActionRecord start_record(std::optional<std::string> reason)
{
    ActionRecord r;
    r.index = 1;
    r.name = "start";
    r.reason = std::move(reason);
    return r;
}

ActionRecord make_record(int index, const ActionCommand& command, const std::optional<UiElement>& target)
{
    ActionRecord r;
    r.index = index;
    r.name = std::string(to_string(name_of(command)));
    if (target_element(command))
        r.element_snapshot = target;
    else if (auto args = arguments_of(command); !args.empty())
        r.literal_args = std::move(args);
    return r;
}

std::string render_record(const ActionRecord& record, bool include_reason, std::string_view prefix)
{
    std::string out(prefix);
    out += std::to_string(record.index) + ": {name: " + record.name;
    if (record.element_snapshot) {
        out += ", arg: " + render_element(0, *record.element_snapshot, RenderStyle::history_arg);
    } else if (record.literal_args) {
        if (const auto action = parse_action_name(record.name))
            out += ", arg: " + render_args(*record.literal_args, action_spec(*action));
    }
    if (record.error)
        out += ", error: \"" + *record.error + "\"";
    if (include_reason && record.reason)
        out += ", reason: \"" + *record.reason + "\"";
    out += "}";
    return out;
}

std::string render_history(const std::vector<ActionRecord>& records, bool include_reasons, std::string_view prefix)
{
    std::string out;
    for (const auto& r : records) {
        out += render_record(r, include_reasons, prefix);
        out += "\n";
    }
    return out;
}

nlohmann::json to_json(const ActionRecord& record)
{
    nlohmann::json j;
    j["name"] = record.name;
    if (record.element_snapshot)
        j["element_snapshot"] = to_json(*record.element_snapshot);
    if (record.literal_args)
        j["args"] = *record.literal_args;
    if (record.reason)
        j["reason"] = *record.reason;
    if (record.error)
        j["error"] = *record.error;
    return j;
}

ActionRecord record_from_json(const nlohmann::json& j, int index)
{
    ActionRecord r;
    r.index = index;
    r.name = j.at("name").get<std::string>();
    if (j.contains("element_snapshot"))
        r.element_snapshot = element_from_json(j["element_snapshot"]);
    if (j.contains("args"))
        r.literal_args = j["args"];
    if (j.contains("reason"))
        r.reason = j["reason"].get<std::string>();
    if (j.contains("error"))
        r.error = j["error"].get<std::string>();
    return r;
}

CheckedCommand validate(const ActionCommand& command, const Observation& obs)
{
    CheckedCommand checked{command, std::nullopt};
    if (const auto id = target_element(command)) {
        const auto* el = obs.find(*id);
        if (!el)
            throw ValidationError(ValidationError::Kind::stale_element_id,
                                  "element_id " + std::to_string(*id) + " is not on the current screen (1.." +
                                      std::to_string(obs.size()) + ")");
        checked.target = *el;
        return checked;
    }
    std::visit(
        [&](const auto& c) {
            if constexpr (requires { c.x; }) {
                if (c.x < 0 || c.y < 0 || c.x >= obs.width() || c.y >= obs.height())
                    throw ValidationError(ValidationError::Kind::out_of_bounds_point,
                                          "point (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                                              ") lies outside the " + std::to_string(obs.width()) + "x" +
                                              std::to_string(obs.height()) + " screen");
            }
        },
        command);
    return checked;
}

} // namespace guiagent
