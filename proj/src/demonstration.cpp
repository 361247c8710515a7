#include "guiagent/demonstration.hpp"

#include <fstream>
#include <stdexcept>

namespace guiagent {

std::vector<ActionRecord> Demonstration::records() const
{
    std::vector<ActionRecord> out;
    out.reserve(steps.size());
    for (const auto& s : steps)
        out.push_back(s.action);
    return out;
}

void check_chain(const Demonstration& demo)
{
    if (demo.steps.empty() || demo.steps.front().action.name != "start")
        throw std::invalid_argument("demonstration " + demo_file_name(demo) + " does not begin with a start step");
    for (std::size_t k = 0; k + 1 < demo.steps.size(); ++k) {
        if (demo.steps[k].post.digest() != demo.steps[k + 1].pre.digest())
            throw std::invalid_argument("demonstration " + demo_file_name(demo) + ": post state of step " +
                                        std::to_string(k + 1) + " differs from pre state of step " +
                                        std::to_string(k + 2));
    }
}

Demonstration strip_reasons(Demonstration demo)
{
    for (auto& s : demo.steps)
        s.action.reason.reset();
    return demo;
}

std::string render_demo(const Demonstration& demo, int index, bool with_reasons)
{
    std::string out = "DEMO_" + std::to_string(index) + " = {\n";
    out += "    TASK:\n";
    out += "    " + demo.utterance + "\n";
    out += "\n";
    out += "    Action History:\n";
    for (const auto& s : demo.steps)
        out += "    " + render_record(s.action, with_reasons, "demo_action_") + "\n";
    out += "}\n";
    return out;
}

nlohmann::json to_json(const Demonstration& demo)
{
    nlohmann::json j;
    j["family"] = demo.family;
    j["seed"] = demo.seed;
    j["utterance"] = demo.utterance;
    auto& steps = j["steps"] = nlohmann::json::array();
    for (const auto& s : demo.steps) {
        nlohmann::json step;
        step["pre"] = to_json(s.pre);
        step["action"] = to_json(s.action);
        step["post"] = to_json(s.post);
        if (s.rationale_error)
            step["rationale_error"] = *s.rationale_error;
        steps.push_back(std::move(step));
    }
    return j;
}

Demonstration demonstration_from_json(const nlohmann::json& j)
{
    Demonstration demo;
    demo.family = j.at("family").get<std::string>();
    demo.seed = j.at("seed").get<std::int64_t>();
    demo.utterance = j.at("utterance").get<std::string>();
    int index = 1;
    for (const auto& s : j.at("steps")) {
        DemoStep step{observation_from_json(s.at("pre")), record_from_json(s.at("action"), index++),
                      observation_from_json(s.at("post")), std::nullopt};
        if (s.contains("rationale_error"))
            step.rationale_error = s["rationale_error"].get<std::string>();
        demo.steps.push_back(std::move(step));
    }
    return demo;
}

Demonstration load_demonstration(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open demonstration " + path.string());
    return demonstration_from_json(nlohmann::json::parse(in));
}

void save_demonstration(const Demonstration& demo, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write demonstration " + path.string());
    out << to_json(demo).dump(2) << "\n";
}

std::string demo_file_name(const Demonstration& demo)
{
    return demo.family + "_" + std::to_string(demo.seed) + ".json";
}

void DemoStore::add(Demonstration demo)
{
    auto family = demo.family;
    by_family_[family].push_back(std::move(demo));
}

const std::vector<Demonstration>* DemoStore::find(const std::string& family) const
{
    const auto it = by_family_.find(family);
    return it == by_family_.end() ? nullptr : &it->second;
}

std::size_t DemoStore::size() const
{
    std::size_t n = 0;
    for (const auto& [_, demos] : by_family_)
        n += demos.size();
    return n;
}

DemoStore DemoStore::load(const std::filesystem::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    if (!in)
        throw std::runtime_error("no manifest.json in " + dir.string());
    const auto manifest = nlohmann::json::parse(in);
    DemoStore store;
    for (const auto& [family, files] : manifest.at("families").items()) {
        for (const auto& f : files) {
            auto demo = load_demonstration(dir / f.get<std::string>());
            if (demo.family != family)
                throw std::runtime_error("manifest lists " + f.get<std::string>() + " under " + family +
                                         " but it belongs to " + demo.family);
            store.add(std::move(demo));
        }
    }
    return store;
}

std::vector<std::string> DemoStore::save(const std::filesystem::path& dir) const
{
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["families"] = nlohmann::json::object();
    std::vector<std::string> written;
    for (const auto& [family, demos] : by_family_) {
        auto& list = manifest["families"][family] = nlohmann::json::array();
        for (const auto& d : demos) {
            const auto name = demo_file_name(d);
            save_demonstration(d, dir / name);
            list.push_back(name);
            written.push_back(name);
        }
    }
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
    return written;
}

} // namespace guiagent
