// guiagent: evaluation, demonstration and dataset driver.
//
// Exit codes: 0 success, 1 usage error, 2 infrastructure error, 3 invariant violation.

#include "guiagent/dataset.hpp"
#include "guiagent/demo_pipeline.hpp"
#include "guiagent/eval.hpp"
#include "guiagent/executor.hpp"
#include "guiagent/prompter.hpp"
#include "guiagent/sim_env.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace guiagent;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfra = 2;
constexpr int kExitInvariant = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string tasks;
    std::string seeds;
    std::string backend;
    std::string record_source;
    std::string endpoint;
    std::string model;
    std::string api_key_env;
    std::string cassette;
    std::string config;
    std::string out;
    std::string demos;
    int episodes = 0;
    int max_rounds = 0;
    int demo_max = -1;
    int parallel = 0;
    bool no_demos = false;
    bool no_cot = false;
    bool action_only = false;
    bool text_actions = false;
};

std::vector<std::string> split_csv(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

BackendKind backend_or_throw(const std::string& name)
{
    const auto k = parse_backend_kind(name);
    if (!k)
        throw UsageError("unknown backend '" + name + "' (expected http, scripted, replay or record)");
    return *k;
}

nlohmann::json read_json(const fs::path& p)
{
    std::ifstream in(p);
    if (!in)
        throw UsageError("cannot open " + p.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(p.string() + ": " + e.what());
    }
}

EvalConfig build_config(const CommonFlags& f)
{
    EvalConfig c;
    try {
        if (!f.config.empty())
            c = eval_config_from_json(read_json(f.config), c);
        if (!f.tasks.empty())
            c.families = split_csv(f.tasks);
        if (!f.seeds.empty())
            c.seeds = parse_seed_list(f.seeds);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (f.episodes > 0)
        c.episodes_per_task = f.episodes;
    if (!f.backend.empty())
        c.backend = backend_or_throw(f.backend);
    if (!f.record_source.empty())
        c.record_source = backend_or_throw(f.record_source);
    if (!f.endpoint.empty())
        c.http.endpoint = f.endpoint;
    if (!f.model.empty())
        c.episode.model = f.model;
    if (!f.api_key_env.empty())
        c.http.api_key_env = f.api_key_env;
    if (!f.cassette.empty())
        c.cassette = f.cassette;
    if (!f.demos.empty())
        c.demos_dir = f.demos;
    if (!f.out.empty())
        c.out_dir = f.out;
    if (f.max_rounds > 0)
        c.episode.max_rounds = f.max_rounds;
    if (f.demo_max >= 0)
        c.episode.demo_max = f.demo_max;
    if (f.parallel > 0)
        c.parallel = f.parallel;
    if (f.no_demos)
        c.episode.no_demos = true;
    if (f.no_cot)
        c.episode.no_cot = true;
    if (f.action_only)
        c.episode.strip_rationales = true;
    if (f.text_actions)
        c.episode.use_tools = false;
    try {
        c.check();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

void add_eval_flags(CLI::App* app, CommonFlags& f)
{
    app->add_option("--tasks", f.tasks, "Comma-separated task families (default: all)");
    app->add_option("--seeds", f.seeds, "Seed list such as 0-999 or 1,5,9 (default: 0-999)");
    app->add_option("--episodes-per-task", f.episodes, "Episodes per family, taken from the seed list (default: 50)");
    app->add_option("--backend", f.backend, "http, scripted, replay or record (default: scripted)");
    app->add_option("--record-source", f.record_source, "Backend wrapped by --backend record: http or scripted");
    app->add_option("--endpoint", f.endpoint, "OpenAI-compatible base URL");
    app->add_option("--model", f.model, "Model name sent to the endpoint");
    app->add_option("--api-key-env", f.api_key_env, "Environment variable holding the API key");
    app->add_option("--cassette", f.cassette, "Cassette file for replay/record");
    app->add_option("--max-rounds", f.max_rounds, "Proposal rounds per episode (default: 10)");
    app->add_option("--demos", f.demos, "Demonstration directory with manifest.json");
    app->add_option("--demo-max", f.demo_max, "Demonstrations per prompt (default: 5)");
    app->add_flag("--no-demos", f.no_demos, "Leave demonstrations out of the prompt");
    app->add_flag("--no-cot", f.no_cot, "Drop the step-by-step instruction block");
    app->add_flag("--action-only-demos", f.action_only, "Render demonstrations without reasons");
    app->add_flag("--text-actions", f.text_actions, "List actions in the prompt instead of sending tool schemas");
    app->add_option("--parallel", f.parallel, "Concurrent episodes (default: 1)");
    app->add_option("--config", f.config, "JSON config file; flags override its values");
}

int cmd_run_eval(const CommonFlags& f)
{
    const auto config = build_config(f);
    const auto run = run_eval(config);
    write_eval_outputs(run, config.out_dir);
    std::cout << run.summary.text;
    std::cout << "wall time " << run.wall_time_s << " s, reports in " << config.out_dir.string() << "\n";
    if (run.invariant_errors > 0) {
        std::cerr << run.invariant_errors << " episode(s) ended with an internal error\n";
        return kExitInvariant;
    }
    if (run.infrastructure_errors > 0) {
        std::cerr << run.infrastructure_errors << " gateway error(s) during the run\n";
        return kExitInfra;
    }
    return kExitOk;
}

int cmd_record_demos(const std::string& tasks, const std::string& seeds, const std::string& out, bool strict)
{
    const auto families = tasks.empty() ? family_names() : split_csv(tasks);
    std::vector<std::int64_t> seed_list;
    try {
        seed_list = parse_seed_list(seeds);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    DemoStore store;
    for (const auto& fam : families) {
        if (!find_family(fam))
            throw UsageError("unknown task family '" + fam + "'");
        for (const auto seed : seed_list) {
            try {
                store.add(script_demo(fam, seed, strict));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        }
    }
    const auto files = store.save(out);
    std::cout << "wrote " << files.size() << " demonstration(s) to " << out << "\n";
    return kExitOk;
}

int cmd_augment_demos(const CommonFlags& f, const std::string& in_dir, const std::string& out_dir)
{
    const auto store = DemoStore::load(in_dir);
    auto config = build_config(f);
    std::vector<Demonstration> demos;
    for (const auto& [fam, list] : store.families())
        demos.insert(demos.end(), list.begin(), list.end());

    std::shared_ptr<ChatBackend> backend;
    std::shared_ptr<Cassette> cassette;
    switch (config.backend) {
    case BackendKind::http:
        backend = std::make_shared<HttpBackend>(config.http);
        break;
    case BackendKind::replay:
        cassette = Cassette::load(*config.cassette);
        backend = std::make_shared<ReplayBackend>(cassette);
        break;
    case BackendKind::record:
        cassette = std::make_shared<Cassette>();
        backend = std::make_shared<RecordingBackend>(std::make_shared<HttpBackend>(config.http), cassette);
        break;
    case BackendKind::scripted: {
        // canned rationale naming the action
        std::vector<ChatResponse> canned;
        for (const auto& d : demos) {
            for (std::size_t k = 1; k < d.steps.size(); ++k) {
                ChatResponse r;
                r.text = "The expert performed action_" + std::to_string(k + 1) + ", a " + d.steps[k].action.name +
                         " action, to progress toward the task \"" + d.utterance + "\".";
                canned.push_back(std::move(r));
            }
        }
        backend = ScriptedBackend::sequence(std::move(canned));
        config.parallel = 1;
        break;
    }
    }
    AugmentOptions opts;
    opts.model = config.episode.model;
    const auto augmented = augment_all(demos, *backend, opts, config.parallel);
    if (config.backend == BackendKind::record)
        cassette->save(*config.cassette);

    DemoStore out;
    int flagged = 0;
    for (const auto& d : augmented) {
        for (const auto& s : d.steps)
            flagged += s.rationale_error ? 1 : 0;
        out.add(d);
    }
    out.save(out_dir);
    std::cout << "augmented " << augmented.size() << " demonstration(s) into " << out_dir;
    if (flagged)
        std::cout << ", " << flagged << " step(s) flagged without a rationale";
    std::cout << "\n";
    return flagged ? kExitInfra : kExitOk;
}

int cmd_build_dataset(const std::string& tasks, const std::string& seeds, int screens, const std::string& out,
                      std::uint64_t rng_seed, double sigma, double darken, std::size_t min_annotations)
{
    const auto families = tasks.empty() ? family_names() : split_csv(tasks);
    for (const auto& fam : families)
        if (!find_family(fam))
            throw UsageError("unknown task family '" + fam + "'");
    std::vector<std::int64_t> seed_list;
    try {
        seed_list = parse_seed_list(seeds);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    auto samples = collect_screens(families, seed_list, 8, min_annotations);
    if (screens > 0 && samples.size() > static_cast<std::size_t>(screens))
        samples.resize(static_cast<std::size_t>(screens));
    SplitMix64 rng(rng_seed);
    AugmentConfig aug;
    aug.noise_sigma = sigma;
    const auto all = augment_dataset(samples, rng, aug);
    SemiMaskOptions mask;
    mask.darken = darken;
    const auto res = write_dataset(all, out, mask);
    std::cout << "screens " << samples.size() << ", samples " << res.samples << ", pairs " << res.pairs << " in "
              << out << "\n";
    return kExitOk;
}

/// Re-executes the responses stored in a transcript against a fresh environment
/// and checks that the regenerated transcript is identical.
int cmd_replay(const std::string& path, std::string family, std::int64_t seed, bool seed_given, const CommonFlags& f)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open " + path);
    if (family.empty() || !seed_given) {
        const auto stem = fs::path(path).stem().string();
        const auto us = stem.rfind('_');
        if (us == std::string::npos)
            throw UsageError("pass --task and --seed; the file name does not encode them");
        if (family.empty())
            family = stem.substr(0, us);
        if (!seed_given)
            seed = std::stoll(stem.substr(us + 1));
    }
    std::vector<ChatResponse> responses;
    std::string original;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        original += line + "\n";
        const auto j = nlohmann::json::parse(line);
        if (j.at("response").contains("error"))
            throw UsageError("round " + std::to_string(j.at("round").get<int>()) +
                             " has a gateway error; replay needs complete responses");
        responses.push_back(response_from_json(j.at("response")));
    }
    auto config = build_config(f);
    auto env = SimEnv::reset(family, seed);
    auto backend = ScriptedBackend::sequence(std::move(responses));
    DemoStore store;
    if (config.demos_dir)
        store = DemoStore::load(*config.demos_dir);
    EpisodeContext ctx{family, seed, select_demos(family, store, config.episode.demo_max), GuidelineSet::defaults()};
    const auto result = run_episode(env, ground_truth_observer(), *backend, ctx, config.episode);
    const auto regenerated = transcript_jsonl(result);
    for (const auto& r : result.transcript)
        std::cout << "round " << r.round << ": " << r.executed.size() << " action(s)"
                  << (r.halted_at ? ", halted after #" + std::to_string(*r.halted_at + 1) : std::string()) << ", "
                  << r.status << (r.error ? " [" + *r.error + "]" : std::string()) << "\n";
    std::cout << "outcome " << to_string(result.outcome) << " after " << result.rounds << " round(s)\n";
    if (regenerated != original) {
        std::cerr << "replayed transcript differs from " << path << "\n";
        return kExitInvariant;
    }
    std::cout << "transcript reproduced exactly\n";
    return kExitOk;
}

/// Prompt of round `round` when the oracle drives the earlier rounds.
int cmd_show_prompt(const std::string& family, std::int64_t seed, int round, const CommonFlags& f)
{
    if (!find_family(family))
        throw UsageError("unknown task family '" + family + "'");
    if (round < 1)
        throw UsageError("--round must be >= 1");
    auto config = build_config(f);
    config.episode.max_rounds = round;
    auto env = SimEnv::reset(family, seed);
    OracleBackend oracle(env);
    DemoStore store;
    if (config.demos_dir)
        store = DemoStore::load(*config.demos_dir);
    EpisodeContext ctx{family, seed, select_demos(family, store, config.episode.demo_max), GuidelineSet::defaults()};
    const auto result = run_episode(env, ground_truth_observer(), oracle, ctx, config.episode);
    if (result.transcript.size() < static_cast<std::size_t>(round)) {
        std::cerr << "episode ended after " << result.transcript.size() << " round(s) with "
                  << to_string(result.outcome) << "\n";
        return kExitUsage;
    }
    std::cout << result.transcript.back().prompt;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"GUI agent evaluation harness"};
    app.require_subcommand(1);

    CommonFlags eval_flags;
    auto* run = app.add_subcommand("run-eval", "Run episodes and write report.json, report.txt and transcripts");
    add_eval_flags(run, eval_flags);
    run->add_option("--out", eval_flags.out, "Output directory (default: out)");

    std::string rd_tasks, rd_seeds = "3000", rd_out = "demos";
    bool rd_loose = false;
    auto* rd = app.add_subcommand("record-demos", "Script oracle demonstrations into a demo directory");
    rd->add_option("--tasks", rd_tasks, "Comma-separated task families (default: all)");
    rd->add_option("--seeds", rd_seeds, "Seeds from the demo split 3000-3999 (default: 3000)");
    rd->add_option("--out", rd_out, "Demo directory (default: demos)");
    rd->add_flag("--allow-any-seed", rd_loose, "Accept seeds outside the demo split");

    CommonFlags aug_flags;
    std::string aug_in = "demos", aug_out;
    auto* aug = app.add_subcommand("augment-demos", "Attach generated rationales to stored demonstrations");
    add_eval_flags(aug, aug_flags);
    aug->add_option("--in", aug_in, "Input demo directory (default: demos)");
    aug->add_option("--out", aug_out, "Output demo directory (default: overwrite --in)");

    std::string ds_tasks, ds_seeds = "0-9", ds_out = "dataset";
    int ds_screens = 0;
    std::uint64_t ds_rng = 7;
    double ds_sigma = 4.0, ds_darken = 0.4;
    std::size_t ds_min = 1;
    auto* ds = app.add_subcommand("build-dataset", "Render screens, augment them threefold and export mask pairs");
    ds->add_option("--tasks", ds_tasks, "Comma-separated task families (default: all)");
    ds->add_option("--seeds", ds_seeds, "Seed list (default: 0-9)");
    ds->add_option("--screens", ds_screens, "Keep at most this many screens (default: all)");
    ds->add_option("--min-annotations", ds_min, "Skip screens with fewer visible elements (default: 1)");
    ds->add_option("--rng-seed", ds_rng, "Augmentation seed (default: 7)");
    ds->add_option("--noise-sigma", ds_sigma, "Gaussian pixel noise (default: 4)");
    ds->add_option("--darken", ds_darken, "Semi-mask darkening factor (default: 0.4)");
    ds->add_option("--out", ds_out, "Output directory (default: dataset)");

    CommonFlags rp_flags;
    std::string rp_file, rp_task;
    std::int64_t rp_seed = 0;
    auto* rp = app.add_subcommand("replay", "Re-run an episode transcript and check it reproduces");
    rp->add_option("transcript", rp_file, "Episode transcript (.jsonl)")->required();
    auto* rp_seed_opt = rp->add_option("--seed", rp_seed, "Seed (default: from the file name)");
    rp->add_option("--task", rp_task, "Task family (default: from the file name)");
    add_eval_flags(rp, rp_flags);

    CommonFlags sp_flags;
    std::string sp_task;
    std::int64_t sp_seed = 0;
    int sp_round = 1;
    auto* sp = app.add_subcommand("show-prompt", "Print the proposal prompt for a family, seed and round");
    sp->add_option("--task", sp_task, "Task family")->required();
    sp->add_option("--seed", sp_seed, "Seed (default: 0)");
    sp->add_option("--round", sp_round, "Round number (default: 1)");
    add_eval_flags(sp, sp_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run)
            return cmd_run_eval(eval_flags);
        if (*rd)
            return cmd_record_demos(rd_tasks, rd_seeds, rd_out, !rd_loose);
        if (*aug)
            return cmd_augment_demos(aug_flags, aug_in, aug_out.empty() ? aug_in : aug_out);
        if (*ds)
            return cmd_build_dataset(ds_tasks, ds_seeds, ds_screens, ds_out, ds_rng, ds_sigma, ds_darken, ds_min);
        if (*rp)
            return cmd_replay(rp_file, rp_task, rp_seed, rp_seed_opt->count() > 0, rp_flags);
        if (*sp)
            return cmd_show_prompt(sp_task, sp_seed, sp_round, sp_flags);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UnknownFamily& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const GatewayError& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return kExitInfra;
    } catch (const OracleFailed& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfra;
    }
    return kExitUsage;
}
