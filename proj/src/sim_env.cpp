#include "guiagent/sim_env.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace guiagent {

namespace {

bool editable(const Widget& w) { return w.kind == ElementKind::input_field || w.kind == ElementKind::text_area; }

int char_boundary(const Widget& w, int x)
{
    const int len = static_cast<int>(w.text.size());
    const int idx = static_cast<int>(std::lround(static_cast<double>(x - w.box.left) / w.char_width));
    return std::clamp(idx, 0, len);
}

} // namespace

std::string describe(const Primitive& p)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, prim::MouseMove>)
                return "move(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")";
            else if constexpr (std::is_same_v<T, prim::MouseDown>)
                return "down";
            else if constexpr (std::is_same_v<T, prim::MouseUp>)
                return "up";
            else if constexpr (std::is_same_v<T, prim::Key>)
                return std::string("key(") + v.ch + ")";
            else if constexpr (std::is_same_v<T, prim::ModifierDown>)
                return "ctrl_down";
            else
                return "ctrl_up";
        },
        p);
}

std::string_view to_string(EnvStatus status)
{
    switch (status) {
    case EnvStatus::running:
        return "running";
    case EnvStatus::success:
        return "success";
    case EnvStatus::failure:
        return "failure";
    }
    return "?";
}

int SimState::find(std::string_view tag) const
{
    for (std::size_t i = 0; i < widgets.size(); ++i)
        if (widgets[i].tag == tag)
            return static_cast<int>(i);
    return -1;
}

const Widget& SimState::at(std::string_view tag) const
{
    const int i = find(tag);
    if (i < 0)
        throw std::out_of_range("no widget tagged '" + std::string(tag) + "'");
    return widgets[static_cast<std::size_t>(i)];
}

int SimState::focused_index() const
{
    for (std::size_t i = 0; i < widgets.size(); ++i)
        if (widgets[i].focused && !widgets[i].hidden)
            return static_cast<int>(i);
    return -1;
}

bool SimState::occluded(int index) const
{
    const auto& w = widgets[static_cast<std::size_t>(index)];
    if (w.owner >= 0)
        return false;
    for (const auto& o : widgets)
        if (o.owner >= 0 && !o.hidden && o.box.overlaps(w.box))
            return true;
    return false;
}

int SimState::hit_test(int x, int y) const
{
    for (int i = static_cast<int>(widgets.size()) - 1; i >= 0; --i) {
        const auto& w = widgets[static_cast<std::size_t>(i)];
        if (w.hidden || occluded(i))
            continue;
        if (w.box.contains(x, y))
            return i;
    }
    return -1;
}

std::uint64_t mix_seed(std::string_view family, std::int64_t seed)
{
    return fnv1a64(family) ^ static_cast<std::uint64_t>(seed);
}

SimEnv SimEnv::reset(std::string_view family, std::int64_t seed)
{
    const auto* f = find_family(family);
    if (!f)
        throw UnknownFamily("unknown task family '" + std::string(family) + "'");
    SplitMix64 rng(mix_seed(family, seed));
    return SimEnv(f->name, seed, f->generate(rng), f->oracle);
}

SimEnv::SimEnv(std::string family, std::int64_t seed, TaskInstance instance, OraclePolicy oracle)
    : family_(std::move(family)),
      seed_(seed),
      utterance_(std::move(instance.utterance)),
      state_(std::move(instance.state)),
      goal_(std::move(instance.goal)),
      oracle_(std::move(oracle))
{
    state_.status = EnvStatus::running;
}

PrimitiveResult SimEnv::apply(const Primitive& p)
{
    if (state_.status != EnvStatus::running)
        return {false, "episode already finished (" + std::string(to_string(state_.status)) + ")"};

    PrimitiveResult result;
    auto& s = state_;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, prim::MouseMove>) {
                s.mouse_x = v.x;
                s.mouse_y = v.y;
                if (!s.button_held)
                    return;
                if (s.drag_widget >= 0) {
                    auto& w = s.widgets[static_cast<std::size_t>(s.drag_widget)];
                    const int bw = w.box.width();
                    const int bh = w.box.height();
                    w.box.left = std::clamp(v.x - s.drag_dx, 0, s.width - bw);
                    w.box.top = std::clamp(v.y - s.drag_dy, kTaskAreaTop, s.height - bh);
                    w.box.right = w.box.left + bw;
                    w.box.bottom = w.box.top + bh;
                } else if (s.text_anchor >= 0 && s.pressed >= 0) {
                    auto& w = s.widgets[static_cast<std::size_t>(s.pressed)];
                    const int b = char_boundary(w, v.x);
                    w.selection = std::pair{std::min(s.text_anchor, b), std::max(s.text_anchor, b)};
                }
            } else if constexpr (std::is_same_v<T, prim::MouseDown>) {
                if (s.button_held) {
                    result = {false, "mouse button is already held"};
                    return;
                }
                s.button_held = true;
                s.pressed = s.hit_test(s.mouse_x, s.mouse_y);
                for (auto& w : s.widgets)
                    if (w.kind == ElementKind::draggable_text)
                        w.selection.reset();
                if (s.pressed < 0)
                    return;
                auto& w = s.widgets[static_cast<std::size_t>(s.pressed)];
                if (w.draggable) {
                    s.drag_widget = s.pressed;
                    s.drag_dx = s.mouse_x - w.box.left;
                    s.drag_dy = s.mouse_y - w.box.top;
                } else if (w.kind == ElementKind::draggable_text) {
                    s.text_anchor = char_boundary(w, s.mouse_x);
                    w.selection = std::pair{s.text_anchor, s.text_anchor};
                }
            } else if constexpr (std::is_same_v<T, prim::MouseUp>) {
                if (!s.button_held) {
                    result = {false, "mouse_up without a held button"};
                    return;
                }
                s.button_held = false;
                const int pressed = s.pressed;
                s.pressed = -1;
                if (s.drag_widget >= 0) {
                    s.drag_widget = -1;
                    return;
                }
                if (s.text_anchor >= 0) {
                    s.text_anchor = -1;
                    return;
                }
                const int under = s.hit_test(s.mouse_x, s.mouse_y);
                if (under == pressed)
                    click(under);
            } else if constexpr (std::is_same_v<T, prim::Key>) {
                const int f = s.focused_index();
                const bool can_edit = f >= 0 && editable(s.widgets[static_cast<std::size_t>(f)]);
                if (s.ctrl) {
                    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(v.ch)));
                    if (c == 'a') {
                        if (!can_edit) {
                            result.note = "ctrl+a with no focused text field";
                            return;
                        }
                        s.select_all = true;
                    } else if (c == 'c') {
                        if (can_edit && s.select_all) {
                            s.clipboard = s.widgets[static_cast<std::size_t>(f)].text;
                            return;
                        }
                        for (const auto& w : s.widgets) {
                            if (w.kind == ElementKind::draggable_text && w.selection &&
                                w.selection->first < w.selection->second) {
                                s.clipboard = w.text.substr(static_cast<std::size_t>(w.selection->first),
                                                            static_cast<std::size_t>(w.selection->second -
                                                                                     w.selection->first));
                                return;
                            }
                        }
                        result.note = "ctrl+c with nothing selected";
                    } else if (c == 'v') {
                        if (!can_edit) {
                            result.note = "ctrl+v with no focused text field";
                            return;
                        }
                        auto& w = s.widgets[static_cast<std::size_t>(f)];
                        if (s.select_all)
                            w.text.clear();
                        w.text += s.clipboard;
                        s.select_all = false;
                    } else {
                        result.note = std::string("unhandled chord ctrl+") + c;
                    }
                    return;
                }
                if (!can_edit) {
                    result.note = "key with no focused editable widget";
                    return;
                }
                auto& w = s.widgets[static_cast<std::size_t>(f)];
                if (s.select_all)
                    w.text.clear();
                s.select_all = false;
                w.text += v.ch;
            } else if constexpr (std::is_same_v<T, prim::ModifierDown>) {
                s.ctrl = true;
            } else {
                s.ctrl = false;
            }
        },
        p);
    evaluate();
    return result;
}

void SimEnv::click(int index)
{
    auto& s = state_;
    ++s.clicks;
    s.select_all = false;
    if (index < 0) {
        for (auto& w : s.widgets)
            w.focused = false;
        return;
    }
    auto& w = s.widgets[static_cast<std::size_t>(index)];
    if (w.exposes_focused || editable(w)) {
        for (auto& o : s.widgets)
            o.focused = false;
        w.focused = true;
    }
    switch (w.kind) {
    case ElementKind::button:
    case ElementKind::hyperlink:
    case ElementKind::icon:
        s.fired = index;
        break;
    case ElementKind::radio:
        for (auto& o : s.widgets)
            if (o.kind == ElementKind::radio && o.group == w.group)
                o.checked = false;
        w.checked = true;
        break;
    case ElementKind::checkbox:
        w.checked = !w.checked;
        break;
    case ElementKind::dropdown:
        w.expanded = !w.expanded;
        for (auto& o : s.widgets)
            if (o.owner == index)
                o.hidden = !w.expanded;
        break;
    case ElementKind::tabled_text:
        if (w.owner >= 0) {
            auto& dd = s.widgets[static_cast<std::size_t>(w.owner)];
            dd.text = w.text;
            dd.expanded = false;
            for (auto& o : s.widgets) {
                if (o.owner == w.owner) {
                    o.hidden = true;
                    o.highlighted = o.text == dd.text;
                }
            }
        } else if (s.ctrl) {
            w.highlighted = !w.highlighted;
        } else {
            for (auto& o : s.widgets)
                if (o.kind == ElementKind::tabled_text && o.owner < 0 && o.group == w.group)
                    o.highlighted = false;
            w.highlighted = true;
        }
        break;
    default:
        break;
    }
}

void SimEnv::evaluate()
{
    if (state_.status != EnvStatus::running)
        return;
    if (goal_.success && goal_.success(state_))
        state_.status = EnvStatus::success;
    else if (goal_.failure && goal_.failure(state_))
        state_.status = EnvStatus::failure;
}

std::vector<int> SimEnv::visible_order() const
{
    std::vector<int> order;
    if (state_.status != EnvStatus::running)
        return order; // the task screen is cleared once an episode ends
    for (std::size_t i = 0; i < state_.widgets.size(); ++i)
        if (!state_.widgets[i].hidden)
            order.push_back(static_cast<int>(i));
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& wa = state_.widgets[static_cast<std::size_t>(a)].box;
        const auto& wb = state_.widgets[static_cast<std::size_t>(b)].box;
        if (wa.top != wb.top)
            return wa.top < wb.top;
        return wa.left < wb.left;
    });
    return order;
}

Observation SimEnv::snapshot() const
{
    std::vector<UiElement> elements;
    for (const int i : visible_order()) {
        const auto& w = state_.widgets[static_cast<std::size_t>(i)];
        UiElement el;
        el.kind = w.kind;
        el.subtype = w.subtype;
        el.bbox = w.box;
        if (w.exposes_checked)
            el.checked = w.checked;
        if (w.exposes_text)
            el.text = w.password ? std::string(w.text.size(), '*') : w.text;
        if (w.exposes_focused)
            el.focused = w.focused;
        if (w.exposes_highlighted)
            el.highlighted = w.highlighted;
        el.visible = !state_.occluded(i);
        elements.push_back(std::move(el));
    }
    return make_observation(std::move(elements), state_.width, state_.height);
}

std::optional<int> SimEnv::element_id(int widget_index) const
{
    const auto order = visible_order();
    const auto it = std::find(order.begin(), order.end(), widget_index);
    if (it == order.end())
        return std::nullopt;
    return static_cast<int>(it - order.begin()) + 1;
}

std::optional<int> SimEnv::element_id(std::string_view tag) const
{
    const int i = state_.find(tag);
    if (i < 0)
        return std::nullopt;
    return element_id(i);
}

std::vector<ActionCommand> SimEnv::oracle_plan() const
{
    if (!oracle_ || state_.status != EnvStatus::running)
        return {};
    return oracle_(*this);
}

nlohmann::json SimEnv::fixture_json() const
{
    return {{"family", family_}, {"seed", seed_}, {"utterance", utterance_}, {"observation", to_json(snapshot())}};
}

Widget make_button(std::string tag, BBox box, std::string text)
{
    Widget w;
    w.kind = ElementKind::button;
    w.tag = std::move(tag);
    w.box = box;
    w.text = std::move(text);
    w.exposes_text = true;
    w.exposes_focused = true;
    return w;
}

Widget make_radio(std::string tag, BBox box, std::string text, int group)
{
    Widget w;
    w.kind = ElementKind::radio;
    w.tag = std::move(tag);
    w.box = box;
    w.text = std::move(text);
    w.group = group;
    w.exposes_text = true;
    w.exposes_checked = true;
    return w;
}

Widget make_checkbox(std::string tag, BBox box, std::string text)
{
    Widget w;
    w.kind = ElementKind::checkbox;
    w.tag = std::move(tag);
    w.box = box;
    w.text = std::move(text);
    w.exposes_text = true;
    w.exposes_checked = true;
    return w;
}

Widget make_text(std::string tag, BBox box, std::string text)
{
    Widget w;
    w.kind = ElementKind::text;
    w.tag = std::move(tag);
    w.box = box;
    w.text = std::move(text);
    w.exposes_text = true;
    return w;
}

Widget make_input(std::string tag, BBox box, bool password)
{
    Widget w;
    w.kind = ElementKind::input_field;
    w.tag = std::move(tag);
    w.box = box;
    w.password = password;
    w.exposes_text = true;
    w.exposes_focused = true;
    return w;
}

} // namespace guiagent
