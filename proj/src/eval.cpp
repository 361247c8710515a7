#include "guiagent/eval.hpp"

#include "guiagent/prompter.hpp"
#include "guiagent/sim_env.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

namespace guiagent {

namespace {

std::int64_t parse_int(std::string_view s)
{
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return v;
}

std::string_view strip(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

nlohmann::json rational_json(const Rational& r) { return {{"num", r.num}, {"den", r.den}, {"text", r.fixed3()}}; }

} // namespace

std::string_view to_string(BackendKind kind)
{
    switch (kind) {
    case BackendKind::http:
        return "http";
    case BackendKind::scripted:
        return "scripted";
    case BackendKind::replay:
        return "replay";
    case BackendKind::record:
        return "record";
    }
    return "?";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name)
{
    for (const auto k : {BackendKind::http, BackendKind::scripted, BackendKind::replay, BackendKind::record})
        if (to_string(k) == name)
            return k;
    return std::nullopt;
}

std::vector<std::int64_t> default_test_seeds()
{
    std::vector<std::int64_t> seeds(1000);
    std::iota(seeds.begin(), seeds.end(), 0);
    return seeds;
}

std::vector<std::int64_t> parse_seed_list(std::string_view text)
{
    std::vector<std::int64_t> seeds;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = strip(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty())
            continue;
        const auto dash = item.find('-', 1);
        if (dash == std::string_view::npos) {
            seeds.push_back(parse_int(item));
            continue;
        }
        const auto lo = parse_int(strip(item.substr(0, dash)));
        const auto hi = parse_int(strip(item.substr(dash + 1)));
        if (hi < lo)
            throw std::invalid_argument("empty seed range '" + std::string(item) + "'");
        for (auto s = lo; s <= hi; ++s)
            seeds.push_back(s);
    }
    if (seeds.empty())
        throw std::invalid_argument("seed list is empty");
    return seeds;
}

void EvalConfig::check() const
{
    episode.check();
    if (episodes_per_task < 1)
        throw std::invalid_argument("episodes_per_task must be >= 1");
    if (parallel < 1)
        throw std::invalid_argument("parallel must be >= 1");
    for (const auto& f : families)
        if (!find_family(f))
            throw UnknownFamily("unknown task family '" + f + "'");
    if (resolved_seeds().size() < static_cast<std::size_t>(episodes_per_task))
        throw std::invalid_argument("seed list has fewer than episodes_per_task entries");
    if ((backend == BackendKind::replay || backend == BackendKind::record) && !cassette)
        throw std::invalid_argument(std::string(to_string(backend)) + " backend needs a cassette path");
    if (backend == BackendKind::record && record_source != BackendKind::http && record_source != BackendKind::scripted)
        throw std::invalid_argument("record source must be http or scripted");
}

std::vector<std::string> EvalConfig::resolved_families() const
{
    auto f = families.empty() ? family_names() : families;
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
    return f;
}

std::vector<std::int64_t> EvalConfig::resolved_seeds() const { return seeds.empty() ? default_test_seeds() : seeds; }

nlohmann::json config_echo(const EvalConfig& c)
{
    const auto seeds = c.resolved_seeds();
    nlohmann::json j;
    j["families"] = c.resolved_families();
    j["seeds"] = std::vector<std::int64_t>(seeds.begin(), seeds.begin() + c.episodes_per_task);
    j["episodes_per_task"] = c.episodes_per_task;
    j["episode"] = to_json(c.episode);
    j["backend"] = to_string(c.backend);
    if (c.backend == BackendKind::record)
        j["record_source"] = to_string(c.record_source);
    if (c.backend == BackendKind::http || (c.backend == BackendKind::record && c.record_source == BackendKind::http)) {
        j["endpoint"] = c.http.endpoint;
        j["api_key_env"] = c.http.api_key_env;
    }
    j["demos"] = c.demos_dir ? nlohmann::json(c.demos_dir->filename().string()) : nlohmann::json(nullptr);
    return j;
}

EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig c)
{
    if (j.contains("families"))
        c.families = j["families"].get<std::vector<std::string>>();
    if (j.contains("tasks"))
        c.families = j["tasks"].get<std::vector<std::string>>();
    if (j.contains("seeds")) {
        if (j["seeds"].is_string())
            c.seeds = parse_seed_list(j["seeds"].get<std::string>());
        else
            c.seeds = j["seeds"].get<std::vector<std::int64_t>>();
    }
    c.episodes_per_task = j.value("episodes_per_task", c.episodes_per_task);
    if (j.contains("episode"))
        c.episode = episode_config_from_json(j["episode"], c.episode);
    if (j.contains("backend")) {
        const auto k = parse_backend_kind(j["backend"].get<std::string>());
        if (!k)
            throw std::invalid_argument("unknown backend '" + j["backend"].get<std::string>() + "'");
        c.backend = *k;
    }
    if (j.contains("record_source")) {
        const auto k = parse_backend_kind(j["record_source"].get<std::string>());
        if (!k)
            throw std::invalid_argument("unknown record source");
        c.record_source = *k;
    }
    c.http.endpoint = j.value("endpoint", c.http.endpoint);
    c.http.api_key_env = j.value("api_key_env", c.http.api_key_env);
    c.http.api_key_header = j.value("api_key_header", c.http.api_key_header);
    c.http.max_retries = j.value("max_retries", c.http.max_retries);
    if (j.contains("cassette"))
        c.cassette = j["cassette"].get<std::string>();
    if (j.contains("demos"))
        c.demos_dir = j["demos"].get<std::string>();
    c.parallel = j.value("parallel", c.parallel);
    if (j.contains("out"))
        c.out_dir = j["out"].get<std::string>();
    if (j.contains("api_key"))
        throw std::invalid_argument("API keys are read from the environment only; remove 'api_key' from the config");
    return c;
}

Rational Rational::make(std::int64_t num, std::int64_t den)
{
    if (den == 0)
        throw std::invalid_argument("zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const auto g = std::gcd(num < 0 ? -num : num, den);
    return {num / g, den / g};
}

std::string Rational::fixed3() const
{
    // round(num/den, 3) half-up, exact
    const std::int64_t scaled = (2 * num * 1000 + den) / (2 * den);
    std::ostringstream out;
    out << scaled / 1000 << "." << std::setw(3) << std::setfill('0') << scaled % 1000;
    return out.str();
}

Rational operator+(const Rational& a, const Rational& b) { return Rational::make(a.num * b.den + b.num * a.den, a.den * b.den); }

Summary summarize(std::vector<FamilyStats> stats, const nlohmann::json& echo)
{
    if (stats.empty())
        throw std::invalid_argument("cannot summarize an empty result set");
    std::sort(stats.begin(), stats.end(), [](const auto& a, const auto& b) { return a.family < b.family; });

    Summary s;
    Rational sum;
    for (const auto& f : stats) {
        if (f.episodes < 1)
            throw std::invalid_argument("family " + f.family + " has no episodes");
        sum = sum + f.sr();
    }
    s.average = Rational::make(sum.num, sum.den * static_cast<std::int64_t>(stats.size()));

    std::size_t width = std::string_view("Average SR").size();
    for (const auto& f : stats)
        width = std::max(width, f.family.size());
    std::ostringstream t;
    t << std::left << std::setw(static_cast<int>(width)) << "family" << std::right << "  " << std::setw(8) << "episodes"
      << "  " << std::setw(9) << "successes" << "  " << std::setw(5) << "SR" << "\n";
    auto rows = nlohmann::json::array();
    for (const auto& f : stats) {
        t << std::left << std::setw(static_cast<int>(width)) << f.family << std::right << "  " << std::setw(8)
          << f.episodes << "  " << std::setw(9) << f.successes << "  " << std::setw(5) << f.sr().fixed3() << "\n";
        rows.push_back({{"family", f.family},
                        {"episodes", f.episodes},
                        {"successes", f.successes},
                        {"sr", rational_json(f.sr())},
                        {"outcomes", f.outcomes}});
    }
    t << std::left << std::setw(static_cast<int>(width)) << "Average SR" << std::right << "  " << std::setw(8) << ""
      << "  " << std::setw(9) << "" << "  " << std::setw(5) << s.average.fixed3() << "\n";

    s.text = t.str();
    s.json = {{"families", rows}, {"average_sr", rational_json(s.average)}};
    if (!echo.is_null())
        s.json["config"] = echo;
    s.families = std::move(stats);
    return s;
}

Summary summarize(const std::vector<EpisodeResult>& results, const nlohmann::json& echo)
{
    std::map<std::string, FamilyStats> by_family;
    for (const auto& r : results) {
        auto& f = by_family[r.family];
        f.family = r.family;
        ++f.episodes;
        if (r.outcome == Outcome::success)
            ++f.successes;
        ++f.outcomes[std::string(to_string(r.outcome))];
    }
    std::vector<FamilyStats> stats;
    for (auto& [name, f] : by_family)
        stats.push_back(std::move(f));
    return summarize(std::move(stats), echo);
}

BackendFactory make_backend_factory(const EvalConfig& config, std::shared_ptr<Cassette>& cassette)
{
    switch (config.backend) {
    case BackendKind::scripted:
        return [](const SimEnv& env) -> std::shared_ptr<ChatBackend> { return std::make_shared<OracleBackend>(env); };
    case BackendKind::http: {
        auto http = std::make_shared<HttpBackend>(config.http);
        return [http](const SimEnv&) -> std::shared_ptr<ChatBackend> { return http; };
    }
    case BackendKind::replay: {
        cassette = Cassette::load(*config.cassette);
        auto replay = std::make_shared<ReplayBackend>(cassette);
        return [replay](const SimEnv&) -> std::shared_ptr<ChatBackend> { return replay; };
    }
    case BackendKind::record: {
        cassette = std::make_shared<Cassette>();
        auto c = cassette;
        if (config.record_source == BackendKind::scripted)
            return [c](const SimEnv& env) -> std::shared_ptr<ChatBackend> {
                return std::make_shared<RecordingBackend>(std::make_shared<OracleBackend>(env), c);
            };
        auto http = std::make_shared<HttpBackend>(config.http);
        return [c, http](const SimEnv&) -> std::shared_ptr<ChatBackend> {
            return std::make_shared<RecordingBackend>(http, c);
        };
    }
    }
    throw std::invalid_argument("unsupported backend");
}

EvalRun run_eval(const EvalConfig& config)
{
    config.check();
    std::shared_ptr<Cassette> cassette;
    const auto factory = make_backend_factory(config, cassette);
    auto run = run_eval(config, factory);
    if (config.backend == BackendKind::record)
        cassette->save(*config.cassette);
    return run;
}

EvalRun run_eval(const EvalConfig& config, const BackendFactory& factory)
{
    config.check();
    const auto start = std::chrono::steady_clock::now();

    DemoStore store;
    if (config.demos_dir)
        store = DemoStore::load(*config.demos_dir);

    struct Job {
        std::string family;
        std::int64_t seed;
    };
    std::vector<Job> jobs;
    const auto seeds = config.resolved_seeds();
    for (const auto& f : config.resolved_families())
        for (int i = 0; i < config.episodes_per_task; ++i)
            jobs.push_back({f, seeds[static_cast<std::size_t>(i)]});
    std::sort(jobs.begin(), jobs.end(),
              [](const Job& a, const Job& b) { return std::tie(a.family, a.seed) < std::tie(b.family, b.seed); });

    EvalRun run;
    run.episodes.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto observer = ground_truth_observer();
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const auto& job = jobs[i];
            EpisodeResult result;
            try {
                auto env = SimEnv::reset(job.family, job.seed);
                auto backend = factory(env);
                EpisodeContext ctx;
                ctx.family = job.family;
                ctx.seed = job.seed;
                ctx.demos = select_demos(job.family, store, config.episode.demo_max);
                result = run_episode(env, observer, *backend, ctx, config.episode);
            } catch (const std::exception& e) {
                result.family = job.family;
                result.seed = job.seed;
                result.outcome = Outcome::error;
                result.error = e.what();
            }
            run.episodes[i] = std::move(result);
        }
    };
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.parallel), jobs.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    for (const auto& e : run.episodes) {
        run.infrastructure_errors += e.gateway_errors;
        if (e.outcome == Outcome::error)
            ++run.invariant_errors;
    }
    run.summary = summarize(run.episodes, config_echo(config));
    run.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

std::string episode_file_name(const std::string& family, std::int64_t seed)
{
    return family + "_" + std::to_string(seed) + ".jsonl";
}

void write_eval_outputs(const EvalRun& run, const std::filesystem::path& out_dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "episodes");
    auto write = [](const fs::path& p, const std::string& content) {
        std::ofstream out(p, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + p.string());
        out << content;
    };
    write(out_dir / "report.json", run.summary.json.dump(2) + "\n");
    write(out_dir / "report.txt", run.summary.text);
    nlohmann::json timing = {{"wall_time_s", run.wall_time_s},
                             {"infrastructure_errors", run.infrastructure_errors},
                             {"invariant_errors", run.invariant_errors}};
    write(out_dir / "timing.json", timing.dump(2) + "\n");
    std::string index;
    for (const auto& e : run.episodes) {
        write(out_dir / "episodes" / episode_file_name(e.family, e.seed), transcript_jsonl(e));
        nlohmann::json line = {{"family", e.family},
                               {"seed", e.seed},
                               {"outcome", to_string(e.outcome)},
                               {"rounds", e.rounds},
                               {"gateway_errors", e.gateway_errors},
                               {"usage",
                                {{"prompt_tokens", e.usage.prompt_tokens},
                                 {"completion_tokens", e.usage.completion_tokens},
                                 {"total_tokens", e.usage.total_tokens}}}};
        if (e.error)
            line["error"] = *e.error;
        index += line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    }
    write(out_dir / "episodes" / "index.jsonl", index);
}

} // namespace guiagent
