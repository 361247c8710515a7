#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace guiagent {

enum class ElementKind {
    text,
    hyperlink,
    button,
    radio,
    checkbox,
    dropdown,
    input_field,
    text_area,
    resize_handle,
    scrollbar,
    tabled_text,
    draggable_text,
    shape,
    icon,
    image,
};

inline constexpr std::size_t kElementKindCount = 15;

enum class ElementSubtype {
    circle,
    triangle,
    rectangle,
    back,
    delete_,
    important,
    forward,
    reply,
    search,
    send,
};

std::string_view to_string(ElementKind kind);
std::string_view to_string(ElementSubtype subtype);
std::optional<ElementKind> parse_element_kind(std::string_view name);
std::optional<ElementSubtype> parse_element_subtype(std::string_view name);

/// Attribute applicability per element kind.
struct KindTraits {
    bool has_subtype;
    bool has_flags; // checked / focused / highlighted
    bool has_text;
};

KindTraits traits(ElementKind kind);

/// True when `subtype` belongs to the family allowed for `kind` (shapes or icons).
bool subtype_allowed(ElementKind kind, ElementSubtype subtype);

/// Integer pixel edges.
struct BBox {
    int left = 0;
    int right = 0;
    int top = 0;
    int bottom = 0;

    int width() const { return right - left; }
    int height() const { return bottom - top; }
    bool contains(int x, int y) const { return x >= left && x <= right && y >= top && y <= bottom; }
    bool overlaps(const BBox& o) const
    {
        return left < o.right && o.left < right && top < o.bottom && o.top < bottom;
    }

    bool operator==(const BBox&) const = default;
};

class InvalidElement : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct UiElement {
    ElementKind kind = ElementKind::text;
    std::optional<ElementSubtype> subtype;
    BBox bbox;
    std::optional<bool> checked;
    std::optional<bool> focused;
    std::optional<bool> highlighted;
    std::optional<std::string> text;
    bool visible = true;

    bool operator==(const UiElement&) const = default;
};

/// Throws InvalidElement when geometry or attribute applicability is violated.
void validate(const UiElement& element);

struct NumberedElement {
    int id;
    UiElement element;

    bool operator==(const NumberedElement&) const = default;
};

inline constexpr int kDefaultScreenWidth = 160;
inline constexpr int kDefaultScreenHeight = 210;

/// Immutable textual view of one screen.
class Observation {
public:
    Observation() : Observation({}, kDefaultScreenWidth, kDefaultScreenHeight) {}

    const std::vector<NumberedElement>& elements() const { return elements_; }
    int width() const { return width_; }
    int height() const { return height_; }
    const std::string& digest() const { return digest_; }
    std::size_t size() const { return elements_.size(); }
    bool empty() const { return elements_.empty(); }

    /// Element by 1-based id; nullptr when out of range.
    const UiElement* find(int id) const;

    bool operator==(const Observation& o) const { return digest_ == o.digest_; }

private:
    friend Observation make_observation(std::vector<UiElement>, int, int);
    Observation(std::vector<NumberedElement> elements, int width, int height);

    std::vector<NumberedElement> elements_;
    int width_;
    int height_;
    std::string digest_;
};

/// Numbers the elements 1..N in order and computes the digest.
/// Throws InvalidElement naming the element when a bbox falls off screen.
Observation make_observation(std::vector<UiElement> elements,
                             int width = kDefaultScreenWidth,
                             int height = kDefaultScreenHeight);

/// Midpoint of [lo, hi], rounded half-to-even.
int render_center(int lo, int hi);

enum class RenderStyle {
    current_screen, // "- ID: element_k, data: {...}"
    demo_state,     // "demo_element_k: {..., visible: ...}"
    history_arg,    // "{...}" without id or visibility
    attributes_only // demo_state attributes without coordinates or id
};

std::string render_element(int id, const UiElement& element, RenderStyle style);

/// Note line preceding every coordinate-bearing element list.
extern const std::string_view kCoordinateNote;
extern const std::string_view kEmptyScreen;

/// Note line then one line per element; "Empty Screen" for an empty observation.
/// Every line ends with '\n'.
std::string render_observation(const Observation& obs, RenderStyle style);

/// Canonical byte serialization hashed into the digest.
std::string canonical_serialization(std::span<const NumberedElement> elements, int width, int height);

nlohmann::json to_json(const UiElement& element);
UiElement element_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j);

} // namespace guiagent
