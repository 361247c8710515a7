#include "guiagent/ui_model.hpp"

#include "guiagent/hash.hpp"

#include <array>
#include <utility>

namespace guiagent {

namespace {

constexpr std::array<std::string_view, kElementKindCount> kKindNames = {
    "text",        "hyperlink",     "button",         "radio", "checkbox",
    "dropdown",    "input_field",   "text_area",      "resize_handle",
    "scrollbar",   "tabled_text",   "draggable_text", "shape", "icon",
    "image",
};

constexpr std::array<std::string_view, 10> kSubtypeNames = {
    "circle", "triangle", "rectangle", "back", "delete",
    "important", "forward", "reply", "search", "send",
};

// Applicability rows of the element coverage table.
constexpr std::array<KindTraits, kElementKindCount> kTraits = {{
    {false, true, true},   // text
    {false, true, true},   // hyperlink
    {false, true, true},   // button
    {false, true, true},   // radio
    {false, true, true},   // checkbox
    {false, true, true},   // dropdown
    {false, true, true},   // input_field
    {false, true, false},  // text_area
    {false, false, false}, // resize_handle
    {false, false, false}, // scrollbar
    {false, true, true},   // tabled_text
    {false, false, true},  // draggable_text
    {true, false, false},  // shape
    {true, true, false},   // icon
    {false, false, false}, // image
}};

const char* bool_text(bool b) { return b ? "True" : "False"; }

std::string coordinates(const BBox& b)
{
    return "X: " + std::to_string(render_center(b.left, b.right)) + " [" + std::to_string(b.left) + "-" +
           std::to_string(b.right) + "], Y: " + std::to_string(render_center(b.top, b.bottom)) + " [" +
           std::to_string(b.top) + "-" + std::to_string(b.bottom) + "]";
}

std::string attribute_body(const UiElement& el, bool with_coordinates, bool with_visible)
{
    std::string out = "{type: ";
    out += to_string(el.kind);
    if (with_coordinates)
        out += ", " + coordinates(el.bbox);
    if (el.subtype) {
        out += ", subtype: ";
        out += to_string(*el.subtype);
    }
    if (el.checked) {
        out += ", checked: ";
        out += bool_text(*el.checked);
    }
    if (el.text)
        out += ", text: \"" + *el.text + "\"";
    if (el.focused) {
        out += ", focused: ";
        out += bool_text(*el.focused);
    }
    if (el.highlighted) {
        out += ", highlighted: ";
        out += bool_text(*el.highlighted);
    }
    if (with_visible) {
        out += ", visible: ";
        out += bool_text(el.visible);
    }
    out += "}";
    return out;
}

std::string describe(const UiElement& el)
{
    return std::string(to_string(el.kind)) + " [" + std::to_string(el.bbox.left) + "-" +
           std::to_string(el.bbox.right) + "]x[" + std::to_string(el.bbox.top) + "-" +
           std::to_string(el.bbox.bottom) + "]";
}

} // namespace

const std::string_view kCoordinateNote =
    "(Note: Coordinates are given in the form: center_x [left_edge_x-right_edge_x], "
    "center_y [top_edge_y-bottm_edge_y])";
const std::string_view kEmptyScreen = "Empty Screen";

std::string_view to_string(ElementKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::string_view to_string(ElementSubtype subtype) { return kSubtypeNames[static_cast<std::size_t>(subtype)]; }

std::optional<ElementKind> parse_element_kind(std::string_view name)
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name)
            return static_cast<ElementKind>(i);
    return std::nullopt;
}

std::optional<ElementSubtype> parse_element_subtype(std::string_view name)
{
    for (std::size_t i = 0; i < kSubtypeNames.size(); ++i)
        if (kSubtypeNames[i] == name)
            return static_cast<ElementSubtype>(i);
    return std::nullopt;
}

KindTraits traits(ElementKind kind) { return kTraits[static_cast<std::size_t>(kind)]; }

bool subtype_allowed(ElementKind kind, ElementSubtype subtype)
{
    const auto idx = static_cast<int>(subtype);
    if (kind == ElementKind::shape)
        return idx <= static_cast<int>(ElementSubtype::rectangle);
    if (kind == ElementKind::icon)
        return idx >= static_cast<int>(ElementSubtype::back);
    return false;
}

void validate(const UiElement& el)
{
    if (el.bbox.left >= el.bbox.right || el.bbox.top >= el.bbox.bottom)
        throw InvalidElement("degenerate bbox on " + describe(el));
    const auto t = traits(el.kind);
    if (t.has_subtype != el.subtype.has_value())
        throw InvalidElement("subtype presence does not match kind on " + describe(el));
    if (el.subtype && !subtype_allowed(el.kind, *el.subtype))
        throw InvalidElement("subtype " + std::string(to_string(*el.subtype)) + " not allowed on " + describe(el));
    if (!t.has_flags && (el.checked || el.focused || el.highlighted))
        throw InvalidElement("state flags not applicable on " + describe(el));
    if (!t.has_text && el.text)
        throw InvalidElement("text not applicable on " + describe(el));
}

Observation::Observation(std::vector<NumberedElement> elements, int width, int height)
    : elements_(std::move(elements)), width_(width), height_(height)
{
    digest_ = to_hex64(fnv1a64(canonical_serialization(elements_, width_, height_)));
}

const UiElement* Observation::find(int id) const
{
    if (id < 1 || static_cast<std::size_t>(id) > elements_.size())
        return nullptr;
    return &elements_[static_cast<std::size_t>(id - 1)].element;
}

Observation make_observation(std::vector<UiElement> elements, int width, int height)
{
    if (width <= 0 || height <= 0)
        throw InvalidElement("screen dimensions must be positive");
    std::vector<NumberedElement> numbered;
    numbered.reserve(elements.size());
    int id = 1;
    for (auto& el : elements) {
        try {
            validate(el);
        } catch (const InvalidElement& e) {
            throw InvalidElement("element " + std::to_string(id) + ": " + e.what());
        }
        const auto& b = el.bbox;
        if (b.left < 0 || b.top < 0 || b.right > width || b.bottom > height)
            throw InvalidElement("element " + std::to_string(id) + " (" + describe(el) + ") lies outside the " +
                                 std::to_string(width) + "x" + std::to_string(height) + " screen");
        numbered.push_back({id++, std::move(el)});
    }
    return Observation(std::move(numbered), width, height);
}

int render_center(int lo, int hi)
{
    const long long sum = static_cast<long long>(lo) + hi;
    long long half = sum / 2;
    if (sum % 2 != 0) {
        if (sum < 0)
            --half; // floor division
        if (half % 2 != 0)
            ++half;
    }
    return static_cast<int>(half);
}

std::string render_element(int id, const UiElement& el, RenderStyle style)
{
    switch (style) {
    case RenderStyle::current_screen:
        return "- ID: element_" + std::to_string(id) + ", data: " + attribute_body(el, true, false);
    case RenderStyle::demo_state:
        return "demo_element_" + std::to_string(id) + ": " + attribute_body(el, true, true);
    case RenderStyle::history_arg:
        return attribute_body(el, true, false);
    case RenderStyle::attributes_only:
        return attribute_body(el, false, true);
    }
    return {};
}

std::string render_observation(const Observation& obs, RenderStyle style)
{
    if (obs.empty())
        return std::string(kEmptyScreen) + "\n";
    std::string out(kCoordinateNote);
    out += "\n";
    for (const auto& [id, el] : obs.elements()) {
        out += render_element(id, el, style);
        out += "\n";
    }
    return out;
}

std::string canonical_serialization(std::span<const NumberedElement> elements, int width, int height)
{
    nlohmann::json j;
    j["width"] = width;
    j["height"] = height;
    auto& arr = j["elements"] = nlohmann::json::array();
    for (const auto& [id, el] : elements) {
        auto e = to_json(el);
        e["id"] = id;
        arr.push_back(std::move(e));
    }
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

nlohmann::json to_json(const UiElement& el)
{
    nlohmann::json j;
    j["kind"] = std::string(to_string(el.kind));
    if (el.subtype)
        j["subtype"] = std::string(to_string(*el.subtype));
    j["bbox"] = {el.bbox.left, el.bbox.right, el.bbox.top, el.bbox.bottom};
    if (el.checked)
        j["checked"] = *el.checked;
    if (el.focused)
        j["focused"] = *el.focused;
    if (el.highlighted)
        j["highlighted"] = *el.highlighted;
    if (el.text)
        j["text"] = *el.text;
    j["visible"] = el.visible;
    return j;
}

UiElement element_from_json(const nlohmann::json& j)
{
    UiElement el;
    const auto kind_name = j.at("kind").get<std::string>();
    const auto kind = parse_element_kind(kind_name);
    if (!kind)
        throw InvalidElement("unknown element kind '" + kind_name + "'");
    el.kind = *kind;
    if (j.contains("subtype") && !j["subtype"].is_null()) {
        const auto name = j["subtype"].get<std::string>();
        el.subtype = parse_element_subtype(name);
        if (!el.subtype)
            throw InvalidElement("unknown element subtype '" + name + "'");
    }
    const auto& b = j.at("bbox");
    if (!b.is_array() || b.size() != 4)
        throw InvalidElement("bbox must be [left, right, top, bottom]");
    el.bbox = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
    auto flag = [&](const char* key) -> std::optional<bool> {
        if (j.contains(key) && !j[key].is_null())
            return j[key].get<bool>();
        return std::nullopt;
    };
    el.checked = flag("checked");
    el.focused = flag("focused");
    el.highlighted = flag("highlighted");
    if (j.contains("text") && !j["text"].is_null())
        el.text = j["text"].get<std::string>();
    el.visible = j.value("visible", true);
    validate(el);
    return el;
}

nlohmann::json to_json(const Observation& obs)
{
    nlohmann::json j;
    j["width"] = obs.width();
    j["height"] = obs.height();
    auto& arr = j["elements"] = nlohmann::json::array();
    for (const auto& ne : obs.elements())
        arr.push_back(to_json(ne.element));
    return j;
}

Observation observation_from_json(const nlohmann::json& j)
{
    std::vector<UiElement> elements;
    for (const auto& e : j.at("elements"))
        elements.push_back(element_from_json(e));
    return make_observation(std::move(elements), j.value("width", kDefaultScreenWidth),
                            j.value("height", kDefaultScreenHeight));
}

} // namespace guiagent
