#include "guiagent/dataset.hpp"
#include "guiagent/demo_pipeline.hpp"
#include "guiagent/eval.hpp"
#include "guiagent/executor.hpp"
#include "guiagent/prompter.hpp"
#include "guiagent/sim_env.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace guiagent;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::handle& obj)
{
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

RenderStyle parse_style(const std::string& s)
{
    if (s == "current_screen")
        return RenderStyle::current_screen;
    if (s == "demo_state")
        return RenderStyle::demo_state;
    if (s == "history_arg")
        return RenderStyle::history_arg;
    if (s == "attributes_only")
        return RenderStyle::attributes_only;
    throw py::value_error("unknown render style '" + s + "'");
}

std::vector<ActionRecord> records_from_py(const py::handle& obj)
{
    const auto j = from_py(obj);
    std::vector<ActionRecord> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(record_from_json(j[i], static_cast<int>(i) + 1));
    return out;
}

py::list commands_to_py(const std::vector<ActionCommand>& cmds)
{
    py::list out;
    for (const auto& c : cmds) {
        py::dict d;
        d["name"] = std::string(to_string(name_of(c)));
        d["args"] = to_py(arguments_of(c));
        out.append(d);
    }
    return out;
}

py::bytes raster_bytes(const Raster& r)
{
    return py::bytes(reinterpret_cast<const char*>(r.data().data()), r.data().size());
}

Raster raster_from(const py::bytes& data, int width, int height)
{
    Raster r(width, height);
    const std::string s = data;
    if (s.size() != r.data().size())
        throw py::value_error("pixel buffer has " + std::to_string(s.size()) + " bytes, expected " +
                              std::to_string(r.data().size()));
    std::copy(s.begin(), s.end(), r.data().begin());
    return r;
}

class PySimEnv {
public:
    PySimEnv(const std::string& family, std::int64_t seed) : env_(SimEnv::reset(family, seed)) {}

    const std::string& utterance() const { return env_.utterance(); }
    std::string status() const { return std::string(to_string(env_.status())); }
    py::object snapshot() const { return to_py(to_json(env_.snapshot())); }
    std::string render(const std::string& style) const { return render_observation(env_.snapshot(), parse_style(style)); }
    py::list oracle_plan() const { return commands_to_py(env_.oracle_plan()); }

    std::string step(const std::string& name, const py::object& args)
    {
        const auto cmd = make_command(name, args.is_none() ? nlohmann::json::object() : from_py(args));
        execute_command(env_, validate(cmd, env_.snapshot()));
        return status();
    }

private:
    SimEnv env_;
};

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "GUI agent core: observations, action grammar, prompts, simulated tasks and evaluation";

    py::register_exception<ActionParseError>(m, "ActionParseError", PyExc_ValueError);
    py::register_exception<UnknownActionName>(m, "UnknownActionName", PyExc_ValueError);
    py::register_exception<UnknownFamily>(m, "UnknownFamily", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ActionRejected>(m, "ActionRejected", PyExc_RuntimeError);
    py::register_exception<OracleFailed>(m, "OracleFailed", PyExc_RuntimeError);
    py::register_exception<GatewayError>(m, "GatewayError", PyExc_RuntimeError);

    m.def("render_center", &render_center, py::arg("lo"), py::arg("hi"));
    m.def(
        "render_observation",
        [](const py::object& obs, const std::string& style) {
            return render_observation(observation_from_json(from_py(obs)), parse_style(style));
        },
        py::arg("observation"), py::arg("style") = "current_screen");
    m.def(
        "observation_digest", [](const py::object& obs) { return observation_from_json(from_py(obs)).digest(); },
        py::arg("observation"));

    m.def(
        "parse_llm_actions", [](const std::string& text) { return commands_to_py(parse_llm_actions(text)); },
        py::arg("response"));
    m.def(
        "render_action_line",
        [](int index, const std::string& name, const py::object& args) {
            return render_action_line(index, make_command(name, args.is_none() ? nlohmann::json::object() : from_py(args)));
        },
        py::arg("index"), py::arg("name"), py::arg("args") = py::none());
    m.def(
        "function_schemas",
        [](const std::vector<std::string>& names) {
            return to_py(function_schemas(std::set<std::string>(names.begin(), names.end())));
        },
        py::arg("names"));

    m.def(
        "build_caap_prompt",
        [](const std::string& task, const py::object& history, const py::object& observation, const py::object& demos,
           bool use_tools, bool include_demos, bool include_cot, bool demo_reasons) {
            std::vector<Demonstration> ds;
            if (!demos.is_none())
                for (const auto& d : from_py(demos))
                    ds.push_back(demonstration_from_json(d));
            PromptOptions o{use_tools, include_demos, include_cot, demo_reasons};
            const auto bundle = build_caap_prompt(task, ds, records_from_py(history),
                                                  observation_from_json(from_py(observation)),
                                                  GuidelineSet::defaults(), o);
            py::dict out;
            out["user_text"] = bundle.user_text;
            out["tool_schemas"] = bundle.tool_schemas ? to_py(*bundle.tool_schemas) : py::object(py::none());
            return out;
        },
        py::arg("task"), py::arg("history"), py::arg("observation"), py::arg("demos") = py::none(),
        py::arg("use_tools") = true, py::arg("include_demos") = true, py::arg("include_cot") = true,
        py::arg("demo_reasons") = true);
    m.def(
        "build_rationale_prompt",
        [](const std::string& task, const py::object& history, int k, const py::object& before,
           const py::object& after) {
            return build_rationale_prompt(task, records_from_py(history), k, observation_from_json(from_py(before)),
                                          observation_from_json(from_py(after)));
        },
        py::arg("task"), py::arg("history"), py::arg("k"), py::arg("before"), py::arg("after"));

    m.def("family_names", &family_names);
    py::class_<PySimEnv>(m, "SimEnv")
        .def(py::init<const std::string&, std::int64_t>(), py::arg("family"), py::arg("seed"))
        .def_property_readonly("utterance", &PySimEnv::utterance)
        .def_property_readonly("status", &PySimEnv::status)
        .def("snapshot", &PySimEnv::snapshot)
        .def("render", &PySimEnv::render, py::arg("style") = "current_screen")
        .def("oracle_plan", &PySimEnv::oracle_plan)
        .def("step", &PySimEnv::step, py::arg("name"), py::arg("args") = py::none());

    m.def(
        "script_demo",
        [](const std::string& family, std::int64_t seed, bool strict_split) {
            return to_py(to_json(script_demo(family, seed, strict_split)));
        },
        py::arg("family"), py::arg("seed"), py::arg("strict_split") = true);
    m.def(
        "render_demo",
        [](const py::object& demo, int index, bool with_reasons) {
            return render_demo(demonstration_from_json(from_py(demo)), index, with_reasons);
        },
        py::arg("demo"), py::arg("index") = 1, py::arg("with_reasons") = true);

    m.def(
        "run_eval",
        [](const py::object& config, bool write_outputs) {
            const auto c = eval_config_from_json(config.is_none() ? nlohmann::json::object() : from_py(config));
            EvalRun run;
            {
                py::gil_scoped_release release;
                run = run_eval(c);
                if (write_outputs)
                    write_eval_outputs(run, c.out_dir);
            }
            auto report = run.summary.json;
            report["infrastructure_errors"] = run.infrastructure_errors;
            report["invariant_errors"] = run.invariant_errors;
            py::dict out;
            out["report"] = to_py(report);
            out["text"] = run.summary.text;
            return out;
        },
        py::arg("config") = py::none(), py::arg("write_outputs") = false);
    m.def(
        "summarize",
        [](const std::vector<std::tuple<std::string, int, int>>& rows) {
            std::vector<FamilyStats> stats;
            for (const auto& [family, episodes, successes] : rows)
                stats.push_back({family, episodes, successes, {}});
            const auto s = summarize(std::move(stats));
            py::dict out;
            out["text"] = s.text;
            out["report"] = to_py(s.json);
            return out;
        },
        py::arg("rows"));

    m.def(
        "render_screen",
        [](const py::object& obs) {
            const auto r = render_screen(observation_from_json(from_py(obs)));
            return py::make_tuple(r.width(), r.height(), raster_bytes(r));
        },
        py::arg("observation"));
    m.def(
        "semi_mask",
        [](const py::bytes& pixels, int width, int height, std::tuple<int, int, int, int> bbox, double darken,
           int outline_px) {
            const auto [l, r, t, b] = bbox;
            SemiMaskOptions o;
            o.darken = darken;
            o.outline_px = outline_px;
            return raster_bytes(semi_mask(raster_from(pixels, width, height), BBox{l, r, t, b}, o));
        },
        py::arg("pixels"), py::arg("width"), py::arg("height"), py::arg("bbox"), py::arg("darken") = 0.4,
        py::arg("outline_px") = 2);
    m.def(
        "xbox_mask",
        [](const py::bytes& pixels, int width, int height, std::tuple<int, int, int, int> bbox) {
            const auto [l, r, t, b] = bbox;
            return raster_bytes(xbox_mask(raster_from(pixels, width, height), BBox{l, r, t, b}));
        },
        py::arg("pixels"), py::arg("width"), py::arg("height"), py::arg("bbox"));
}
