#include "guiagent/sim_env.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>

namespace guiagent {

namespace {

constexpr std::array<std::string_view, 40> kWords = {
    "okay",   "submit", "cancel", "next",   "previous", "yes",    "no",     "maybe", "ipsum",  "lorem",
    "dolor",  "amet",   "magna",  "tempor", "sed",      "nulla",  "vitae",  "proin", "etiam",  "morbi",
    "fusce",  "donec",  "augue",  "justo",  "purus",    "neque",  "ligula", "risus", "massa",  "felis",
    "mauris", "turpis", "lacus",  "porta",  "velit",    "metus",  "nunc",   "arcu",  "tellus", "quam",
};

constexpr std::array<std::string_view, 32> kNames = {
    "Selie",  "Janella", "Storm",   "Gena",    "Betti",   "Chrissie", "Helli",  "Theodora",
    "Marta",  "Kendra",  "Lorie",   "Nanete",  "Ofella",  "Pammi",    "Rania",  "Sibby",
    "Tabbie", "Ulla",    "Vinny",   "Wandie",  "Xylia",   "Yasmin",   "Zorah",  "Aurel",
    "Brinn",  "Cathi",   "Delly",   "Emelia",  "Fanchon", "Gussy",    "Hedda",  "Ilka",
};

template <std::size_t N>
std::vector<std::string> pick_distinct(SplitMix64& rng, const std::array<std::string_view, N>& pool, int count)
{
    std::vector<int> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < count; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(i, static_cast<std::int64_t>(N) - 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
    }
    std::vector<std::string> out;
    for (int i = 0; i < count; ++i)
        out.emplace_back(pool[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]);
    return out;
}

int rand_int(SplitMix64& rng, int lo, int hi) { return static_cast<int>(rng.uniform_int(lo, hi)); }

/// Top edges for rows of the given heights stacked in the task area with random gaps.
std::vector<int> stack_rows(SplitMix64& rng, const std::vector<int>& heights, int top = kTaskAreaTop + 2,
                            int bottom = kDefaultScreenHeight - 2, int min_gap = 3)
{
    const int used = std::accumulate(heights.begin(), heights.end(), 0) +
                     min_gap * static_cast<int>(heights.size() > 0 ? heights.size() - 1 : 0);
    int slack = std::max(0, bottom - top - used);
    std::vector<int> tops;
    int y = top;
    for (std::size_t i = 0; i < heights.size(); ++i) {
        const int extra = rand_int(rng, 0, std::min(slack, 12));
        slack -= extra;
        y += extra;
        tops.push_back(y);
        y += heights[i] + min_gap;
    }
    return tops;
}

BBox box(int left, int top, int width, int height) { return {left, left + width, top, top + height}; }

int text_width(std::string_view s) { return 6 * static_cast<int>(s.size()) + 8; }

std::string join_list(const std::vector<std::string>& items)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += ", ";
        out += items[i];
    }
    return out;
}

Widget make_hyperlink(std::string tag, BBox b, std::string text)
{
    Widget w;
    w.kind = ElementKind::hyperlink;
    w.tag = std::move(tag);
    w.box = b;
    w.text = std::move(text);
    w.exposes_text = true;
    return w;
}

Widget make_shape(std::string tag, BBox b, ElementSubtype subtype, bool draggable = false)
{
    Widget w;
    w.kind = ElementKind::shape;
    w.subtype = subtype;
    w.tag = std::move(tag);
    w.box = b;
    w.draggable = draggable;
    return w;
}

Widget make_icon(std::string tag, BBox b, ElementSubtype subtype)
{
    Widget w;
    w.kind = ElementKind::icon;
    w.subtype = subtype;
    w.tag = std::move(tag);
    w.box = b;
    return w;
}

std::string fired_tag(const SimState& s)
{
    if (s.fired < 0)
        return {};
    return s.widgets[static_cast<std::size_t>(s.fired)].tag;
}

std::optional<ActionCommand> click(const SimEnv& env, std::string_view tag)
{
    const auto id = env.element_id(tag);
    if (!id)
        return std::nullopt;
    return cmd::ClickElement{*id};
}

/// Click the widget that must fire; the shared shape of the single-click families.
OraclePolicy click_tag(std::string tag)
{
    return [tag](const SimEnv& env) {
        std::vector<ActionCommand> plan;
        if (auto c = click(env, tag))
            plan.push_back(*c);
        return plan;
    };
}

TaskInstance click_test(SplitMix64& rng)
{
    TaskInstance t;
    t.utterance = "Click the button.";
    const int n_deco = rand_int(rng, 0, 2);
    std::vector<int> heights{20};
    for (int i = 0; i < n_deco; ++i)
        heights.push_back(14);
    const auto tops = stack_rows(rng, heights);
    const int bw = rand_int(rng, 50, 90);
    t.state.widgets.push_back(make_button("target", box(rand_int(rng, 2, 158 - bw), tops[0], bw, 20), "Click Me!"));
    for (int i = 0; i < n_deco; ++i) {
        const int x = rand_int(rng, 2, 142);
        const auto tag = "deco" + std::to_string(i);
        if (rng.uniform01() < 0.5) {
            const auto sub = static_cast<ElementSubtype>(rand_int(rng, 0, 2));
            t.state.widgets.push_back(make_shape(tag, box(x, tops[static_cast<std::size_t>(i) + 1], 14, 14), sub));
        } else {
            const auto sub = static_cast<ElementSubtype>(rand_int(rng, 3, 9));
            t.state.widgets.push_back(make_icon(tag, box(x, tops[static_cast<std::size_t>(i) + 1], 14, 14), sub));
        }
    }
    t.goal.success = [](const SimState& s) { return fired_tag(s) == "target"; };
    t.goal.failure = [](const SimState& s) { return s.fired >= 0 && fired_tag(s) != "target"; };
    return t;
}

TaskInstance click_button(SplitMix64& rng)
{
    TaskInstance t;
    const int n = rand_int(rng, 2, 5);
    const auto words = pick_distinct(rng, kWords, n);
    const int target = rand_int(rng, 0, n - 1);
    t.utterance = "Click on the \"" + words[static_cast<std::size_t>(target)] + "\" button.";
    const auto tops = stack_rows(rng, std::vector<int>(static_cast<std::size_t>(n), 22));
    for (int i = 0; i < n; ++i) {
        const auto& w = words[static_cast<std::size_t>(i)];
        const int bw = text_width(w) + 10;
        const auto tag = i == target ? std::string("target") : "other" + std::to_string(i);
        t.state.widgets.push_back(make_button(tag, box(rand_int(rng, 2, 158 - bw), tops[static_cast<std::size_t>(i)], bw, 22), w));
    }
    t.goal.success = [](const SimState& s) { return fired_tag(s) == "target"; };
    t.goal.failure = [](const SimState& s) { return s.fired >= 0 && fired_tag(s) != "target"; };
    return t;
}

TaskInstance click_link(SplitMix64& rng)
{
    TaskInstance t;
    const int n = rand_int(rng, 2, 4);
    const auto words = pick_distinct(rng, kWords, 2 * n);
    const int target = rand_int(rng, 0, n - 1);
    t.utterance = "Click on the link \"" + words[static_cast<std::size_t>(n + target)] + "\".";
    const auto tops = stack_rows(rng, std::vector<int>(static_cast<std::size_t>(n), 14));
    for (int i = 0; i < n; ++i) {
        const auto y = tops[static_cast<std::size_t>(i)];
        const auto& prose = words[static_cast<std::size_t>(i)];
        const auto& link = words[static_cast<std::size_t>(n + i)];
        const int tw = text_width(prose);
        t.state.widgets.push_back(make_text("text" + std::to_string(i), box(2, y, tw, 14), prose));
        const int lx = tw + rand_int(rng, 6, 20);
        const auto tag = i == target ? std::string("target") : "link" + std::to_string(i);
        t.state.widgets.push_back(make_hyperlink(tag, box(lx, y, text_width(link), 14), link));
    }
    t.goal.success = [](const SimState& s) { return fired_tag(s) == "target"; };
    t.goal.failure = [](const SimState& s) { return s.fired >= 0 && fired_tag(s) != "target"; };
    return t;
}

bool checkboxes_match(const SimState& s)
{
    for (const auto& w : s.widgets)
        if (w.kind == ElementKind::checkbox && w.checked != (w.tag.rfind("want", 0) == 0))
            return false;
    return true;
}

TaskInstance click_checkboxes(SplitMix64& rng)
{
    TaskInstance t;
    const int n = rand_int(rng, 2, 6);
    const int k = rand_int(rng, 0, std::min(3, n));
    const auto words = pick_distinct(rng, kWords, n);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < k; ++i)
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rand_int(rng, i, n - 1))]);
    std::vector<bool> wanted(static_cast<std::size_t>(n), false);
    std::vector<std::string> targets;
    for (int i = 0; i < k; ++i) {
        wanted[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
        targets.push_back(words[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    }
    t.utterance = k == 0 ? "Select nothing and click Submit." : "Select " + join_list(targets) + " and click Submit.";

    std::vector<int> heights(static_cast<std::size_t>(n), 14);
    heights.push_back(22);
    const auto tops = stack_rows(rng, heights);
    for (int i = 0; i < n; ++i) {
        const auto& w = words[static_cast<std::size_t>(i)];
        const auto tag = (wanted[static_cast<std::size_t>(i)] ? "want" : "skip") + std::to_string(i);
        t.state.widgets.push_back(make_checkbox(tag, box(6, tops[static_cast<std::size_t>(i)], text_width(w) + 14, 14), w));
    }
    t.state.widgets.push_back(make_button("submit", box(2, tops.back(), 96, 22), "Submit"));
    t.goal.success = [](const SimState& s) { return fired_tag(s) == "submit" && checkboxes_match(s); };
    t.goal.failure = [](const SimState& s) { return fired_tag(s) == "submit" && !checkboxes_match(s); };
    return t;
}

std::vector<ActionCommand> click_checkboxes_oracle(const SimEnv& env)
{
    std::vector<ActionCommand> plan;
    const auto& s = env.state();
    for (std::size_t i = 0; i < s.widgets.size(); ++i) {
        const auto& w = s.widgets[i];
        if (w.kind == ElementKind::checkbox && w.checked != (w.tag.rfind("want", 0) == 0))
            plan.push_back(cmd::ClickElement{*env.element_id(static_cast<int>(i))});
    }
    plan.push_back(*click(env, "submit"));
    return plan;
}

TaskInstance click_dialog(SplitMix64& rng)
{
    TaskInstance t;
    t.utterance = "Close the dialog box by clicking the \"x\".";
    const auto words = pick_distinct(rng, kWords, 4);
    const int left = rand_int(rng, 2, 20);
    const int width = rand_int(rng, 110, 156 - left);
    const int top = rand_int(rng, kTaskAreaTop + 2, 90);
    auto title = words[0];
    title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
    t.state.widgets.push_back(make_text("title", box(left + 2, top + 2, text_width(title), 14), title));
    t.state.widgets.push_back(make_button("close", box(left + width - 18, top + 2, 16, 14), "x"));
    const auto body = words[1] + " " + words[2] + " " + words[3];
    t.state.widgets.push_back(make_text("body", box(left + 2, top + 24, std::min(text_width(body), width - 4), 14), body));
    t.state.widgets.push_back(make_button("ok", box(left + width / 2 - 20, top + 48, 40, 20), "OK"));
    Widget handle;
    handle.kind = ElementKind::resize_handle;
    handle.tag = "handle";
    handle.box = box(left + width - 8, top + 72, 6, 6);
    t.state.widgets.push_back(handle);
    t.goal.success = [](const SimState& s) { return fired_tag(s) == "close"; };
    t.goal.failure = [](const SimState& s) { return fired_tag(s) == "ok"; };
    return t;
}

TaskInstance choose_list(SplitMix64& rng)
{
    TaskInstance t;
    const int n = rand_int(rng, 5, 8);
    const auto names = pick_distinct(rng, kNames, n);
    const int current = rand_int(rng, 0, n - 1);
    int target = rand_int(rng, 0, n - 2);
    if (target >= current)
        ++target;
    const auto& goal = names[static_cast<std::size_t>(target)];
    t.utterance = "Select " + goal + " from the list and click Submit.";

    Widget dd;
    dd.kind = ElementKind::dropdown;
    dd.tag = "list";
    dd.box = {1, 152, 55, 76};
    dd.text = names[static_cast<std::size_t>(current)];
    dd.exposes_text = true;
    dd.exposes_focused = true;
    t.state.widgets.push_back(dd);
    t.state.widgets.push_back(make_button("submit", {1, 98, 80, 112}, "Submit"));
    for (int i = 0; i < n; ++i) {
        Widget opt;
        opt.kind = ElementKind::tabled_text;
        opt.tag = "option:" + names[static_cast<std::size_t>(i)];
        opt.box = {1, 152, 77 + 16 * i, 93 + 16 * i};
        opt.text = names[static_cast<std::size_t>(i)];
        opt.exposes_text = true;
        opt.exposes_highlighted = true;
        opt.highlighted = i == current;
        opt.hidden = true;
        opt.owner = 0;
        t.state.widgets.push_back(opt);
    }
    t.state.answer = goal;
    t.goal.success = [](const SimState& s) {
        return fired_tag(s) == "submit" && s.at("list").text == s.answer.get<std::string>();
    };
    t.goal.failure = [](const SimState& s) {
        return fired_tag(s) == "submit" && s.at("list").text != s.answer.get<std::string>();
    };
    return t;
}

std::vector<ActionCommand> choose_list_oracle(const SimEnv& env)
{
    const auto& s = env.state();
    const auto goal = s.answer.get<std::string>();
    const auto& dd = s.at("list");
    if (dd.expanded)
        return {*click(env, "option:" + goal)};
    if (dd.text != goal)
        return {*click(env, "list")};
    return {*click(env, "submit")};
}

/// Focus the field, clear it when needed, and type the wanted value.
void fill_field(const SimEnv& env, std::string_view tag, const std::string& want, std::vector<ActionCommand>& plan)
{
    const auto& s = env.state();
    const auto& w = s.at(tag);
    if (w.text == want)
        return;
    if (!w.focused)
        plan.push_back(*click(env, tag));
    if (!w.text.empty())
        plan.push_back(cmd::PressControlA{});
    plan.push_back(cmd::TypeText{want});
}

TaskInstance enter_text(SplitMix64& rng)
{
    TaskInstance t;
    const auto word = pick_distinct(rng, kNames, 1)[0];
    t.utterance = "Enter \"" + word + "\" into the text field and press Submit.";
    const auto tops = stack_rows(rng, {18, 22});
    t.state.widgets.push_back(make_input("field", box(2, tops[0], rand_int(rng, 100, 150), 18)));
    t.state.widgets.push_back(make_button("submit", box(2, tops[1], 96, 22), "Submit"));
    t.state.answer = word;
    t.goal.success = [](const SimState& s) {
        return fired_tag(s) == "submit" && s.at("field").text == s.answer.get<std::string>();
    };
    t.goal.failure = [](const SimState& s) {
        return fired_tag(s) == "submit" && s.at("field").text != s.answer.get<std::string>();
    };
    return t;
}

std::vector<ActionCommand> enter_text_oracle(const SimEnv& env)
{
    std::vector<ActionCommand> plan;
    fill_field(env, "field", env.state().answer.get<std::string>(), plan);
    plan.push_back(*click(env, "submit"));
    return plan;
}

bool login_matches(const SimState& s)
{
    return s.at("username").text == s.answer.at("username").get<std::string>() &&
           s.at("password").text == s.answer.at("password").get<std::string>();
}

TaskInstance login_user(SplitMix64& rng)
{
    TaskInstance t;
    const auto user = pick_distinct(rng, kNames, 1)[0];
    const auto pass = pick_distinct(rng, kWords, 1)[0] + std::to_string(rand_int(rng, 10, 99));
    t.utterance = "Enter the username \"" + user + "\" and the password \"" + pass +
                  "\" into the text fields and press login.";
    const auto tops = stack_rows(rng, {14, 18, 14, 18, 22}, kTaskAreaTop + 2, kDefaultScreenHeight - 2, 2);
    const int fw = rand_int(rng, 110, 150);
    t.state.widgets.push_back(make_text("user_label", box(2, tops[0], text_width("Username"), 14), "Username"));
    t.state.widgets.push_back(make_input("username", box(2, tops[1], fw, 18)));
    t.state.widgets.push_back(make_text("pass_label", box(2, tops[2], text_width("Password"), 14), "Password"));
    t.state.widgets.push_back(make_input("password", box(2, tops[3], fw, 18), true));
    t.state.widgets.push_back(make_button("login", box(2, tops[4], 60, 22), "Login"));
    t.state.answer = {{"username", user}, {"password", pass}};
    t.goal.success = [](const SimState& s) { return fired_tag(s) == "login" && login_matches(s); };
    t.goal.failure = [](const SimState& s) { return fired_tag(s) == "login" && !login_matches(s); };
    return t;
}

std::vector<ActionCommand> login_user_oracle(const SimEnv& env)
{
    std::vector<ActionCommand> plan;
    const auto& a = env.state().answer;
    fill_field(env, "username", a.at("username").get<std::string>(), plan);
    fill_field(env, "password", a.at("password").get<std::string>(), plan);
    plan.push_back(*click(env, "login"));
    return plan;
}

bool inside(const BBox& in, const BBox& out)
{
    return in.left >= out.left && in.right <= out.right && in.top >= out.top && in.bottom <= out.bottom;
}

TaskInstance drag_box(SplitMix64& rng)
{
    TaskInstance t;
    t.utterance = "Drag the smaller box so that it is completely inside the larger box.";
    const int big = rand_int(rng, 40, 60);
    const int small = rand_int(rng, 10, 16);
    const bool big_first = rng.uniform01() < 0.5;
    const auto tops = stack_rows(rng, big_first ? std::vector<int>{big, small} : std::vector<int>{small, big});
    const int big_top = big_first ? tops[0] : tops[1];
    const int small_top = big_first ? tops[1] : tops[0];
    t.state.widgets.push_back(
        make_shape("large", box(rand_int(rng, 2, 158 - big), big_top, big, big), ElementSubtype::rectangle));
    t.state.widgets.push_back(make_shape("small", box(rand_int(rng, 2, 158 - small), small_top, small, small),
                                         ElementSubtype::rectangle, true));
    t.goal.success = [](const SimState& s) { return !s.button_held && inside(s.at("small").box, s.at("large").box); };
    return t;
}

std::vector<ActionCommand> drag_box_oracle(const SimEnv& env)
{
    const auto& s = env.state();
    const auto& small = s.at("small").box;
    const auto& large = s.at("large").box;
    const int gx = render_center(large.left, large.right);
    const int gy = render_center(large.top, large.bottom);
    if (s.button_held && s.drag_widget == s.find("small")) {
        const int px = gx + s.drag_dx - small.width() / 2;
        const int py = gy + s.drag_dy - small.height() / 2;
        if (inside(small, large))
            return {cmd::DragMouseRelease{}};
        return {cmd::DragMouseMove{px, py}, cmd::DragMouseRelease{}};
    }
    std::vector<ActionCommand> plan;
    if (s.button_held)
        plan.push_back(cmd::DragMouseRelease{});
    const int cx = render_center(small.left, small.right);
    const int cy = render_center(small.top, small.bottom);
    const int px = gx + (cx - small.left) - small.width() / 2;
    const int py = gy + (cy - small.top) - small.height() / 2;
    plan.push_back(cmd::DragMouseHoldDown{cx, cy});
    plan.push_back(cmd::DragMouseMove{px, py});
    plan.push_back(cmd::DragMouseRelease{});
    return plan;
}

TaskInstance highlight_text(SplitMix64& rng)
{
    TaskInstance t;
    std::vector<std::string> words;
    std::string text;
    for (;;) {
        words = pick_distinct(rng, kWords, rand_int(rng, 3, 5));
        text = words[0];
        for (std::size_t i = 1; i < words.size(); ++i)
            text += " " + words[i];
        if (text.size() <= 28)
            break;
    }
    const int target = rand_int(rng, 0, static_cast<int>(words.size()) - 1);
    int start = 0;
    for (int i = 0; i < target; ++i)
        start += static_cast<int>(words[static_cast<std::size_t>(i)].size()) + 1;
    const int end = start + static_cast<int>(words[static_cast<std::size_t>(target)].size());
    t.utterance = "Highlight the text \"" + words[static_cast<std::size_t>(target)] + "\".";

    Widget w;
    w.kind = ElementKind::draggable_text;
    w.tag = "text";
    w.text = text;
    w.exposes_text = true;
    w.char_width = 5;
    const int top = rand_int(rng, kTaskAreaTop + 2, 150);
    w.box = {5, 5 + w.char_width * static_cast<int>(text.size()), top, top + 14};
    t.state.widgets.push_back(w);
    t.state.answer = {start, end};

    t.goal.success = [](const SimState& s) {
        const auto& sel = s.at("text").selection;
        return !s.button_held && sel && sel->first == s.answer[0].get<int>() && sel->second == s.answer[1].get<int>();
    };
    t.goal.failure = [](const SimState& s) {
        const auto& sel = s.at("text").selection;
        return !s.button_held && sel && sel->first < sel->second &&
               (sel->first != s.answer[0].get<int>() || sel->second != s.answer[1].get<int>());
    };
    return t;
}

std::vector<ActionCommand> highlight_text_oracle(const SimEnv& env)
{
    const auto& s = env.state();
    const auto& w = s.at("text");
    const int y = render_center(w.box.top, w.box.bottom);
    const int x0 = w.box.left + w.char_width * s.answer[0].get<int>();
    const int x1 = w.box.left + w.char_width * s.answer[1].get<int>();
    if (s.button_held && s.text_anchor == s.answer[0].get<int>() && s.pressed == s.find("text")) {
        if (w.selection && w.selection->second == s.answer[1].get<int>())
            return {cmd::DragMouseRelease{}};
        return {cmd::DragMouseMove{x1, y}, cmd::DragMouseRelease{}};
    }
    std::vector<ActionCommand> plan;
    if (s.button_held)
        plan.push_back(cmd::DragMouseRelease{});
    plan.push_back(cmd::DragMouseHoldDown{x0, y});
    plan.push_back(cmd::DragMouseMove{x1, y});
    plan.push_back(cmd::DragMouseRelease{});
    return plan;
}

std::vector<TaskFamily> build_families()
{
    std::vector<TaskFamily> f;
    f.push_back({"click-test", click_test, click_tag("target")});
    f.push_back({"click-button", click_button, click_tag("target")});
    f.push_back({"click-link", click_link, click_tag("target")});
    f.push_back({"click-checkboxes", click_checkboxes, click_checkboxes_oracle});
    f.push_back({"click-dialog", click_dialog, click_tag("close")});
    f.push_back({"choose-list", choose_list, choose_list_oracle});
    f.push_back({"enter-text", enter_text, enter_text_oracle});
    f.push_back({"login-user", login_user, login_user_oracle});
    f.push_back({"drag-box", drag_box, drag_box_oracle});
    f.push_back({"highlight-text", highlight_text, highlight_text_oracle});
    return f;
}

} // namespace

const std::vector<TaskFamily>& task_families()
{
    static const std::vector<TaskFamily> families = build_families();
    return families;
}

const TaskFamily* find_family(std::string_view name)
{
    for (const auto& f : task_families())
        if (f.name == name)
            return &f;
    return nullptr;
}

std::vector<std::string> family_names()
{
    std::vector<std::string> names;
    for (const auto& f : task_families())
        names.push_back(f.name);
    return names;
}

} // namespace guiagent
