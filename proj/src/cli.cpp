// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/cli.hpp>
#include <layoutloop/config.hpp>
#include <layoutloop/corpus.hpp>
#include <layoutloop/error.hpp>
#include <layoutloop/image_io.hpp>
#include <layoutloop/json_io.hpp>
#include <layoutloop/loop.hpp>
#include <layoutloop/parallel.hpp>
#include <layoutloop/perturb.hpp>
#include <layoutloop/rmlite.hpp>
#include <layoutloop/service.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

namespace layoutloop
{

namespace
{

constexpr std::array level_names { "I", "II", "III", "IV" };

std::vector<std::string> read_lines(const std::filesystem::path& path)
{
    std::istringstream in(read_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            lines.push_back(line);
    return lines;
}

/// Writes to a file, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-")
        out << text;
    else
        write_file(path, text);
}

std::string fixed(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

/// Backgrounds shared across many records are decoded once.
class BackgroundCache
{
  public:
    explicit BackgroundCache(const RunConfig& cfg): _cfg(cfg) {}

    const LuminanceRaster& get(const std::string& path)
    {
        std::lock_guard lock(_mutex);
        auto it = _cache.find(path);
        if (it == _cache.end())
            it = _cache.emplace(path, load_image(resolve_background(_cfg, path))).first;
        return it->second;
    }

  private:
    const RunConfig& _cfg;
    std::mutex _mutex;
    std::map<std::string, LuminanceRaster> _cache;
};

std::vector<CorpusDocument> load_inputs(const std::vector<std::string>& inputs)
{
    std::vector<CorpusDocument> docs;
    for (const auto& in: inputs)
    {
        if (std::filesystem::is_directory(in))
        {
            auto more = load_corpus(in);
            std::move(more.begin(), more.end(), std::back_inserter(docs));
        }
        else if (std::filesystem::exists(in))
            docs.push_back(load_document(in));
        else
            throw InputError("input '" + in + "' does not exist");
    }
    return docs;
}

// ---------------------------------------------------------------------------------------------

struct Options
{
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<int> n_max;

    std::string out;
    int count = 100;
    std::string kind = "poster";
    std::vector<std::string> inputs;
    bool json = false;
    std::string background;
    std::optional<std::string> target;
    std::string corpus;
    std::string levels;
    std::string pairs;
    std::string model;
    double lr = 0.5;
    int steps = 1500;
    std::string scheme = "outcome";
    std::optional<double> gamma;
    std::string in;
    std::string policy = "greedy-fixer";
    std::string policy_command;
    std::string dump_dir;
    std::optional<std::string> host;
    std::optional<int> port;
};

RunConfig build_config(const Options& o, char** envp)
{
    RunConfig cfg;
    if (!o.config_path.empty())
        apply_config_file(cfg, o.config_path);
    for (const auto& kv: o.sets)
    {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed)
        cfg.set("seed", std::to_string(*o.seed));
    if (o.jobs)
        cfg.parallelism = *o.jobs;
    if (o.n_max)
        cfg.n_max = *o.n_max;
    if (o.host)
        cfg.host = *o.host;
    if (o.port)
        cfg.port = *o.port;
    apply_environment(cfg, envp);
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------------------------

int cmd_synth(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    if (o.count < 0)
        throw InputError("--count must be non-negative");
    auto docs = o.kind == "fixer" ? crafted_fixer_corpus(o.count, cfg.seed) : synth_corpus(o.count, cfg.seed);
    write_corpus(docs, o.out);
    out << "wrote " << docs.size() << " documents to " << o.out << "\n";
    return exit_ok;
}

int cmd_eval(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    auto docs = load_inputs(o.inputs);
    if (docs.empty())
        throw InputError("no documents to evaluate");
    if (!o.background.empty())
        for (auto& d: docs)
        {
            d.background_path = o.background;
            d.background = load_image(o.background);
        }
    if (o.target)
        for (auto& d: docs)
            d.target_text = *o.target;

    const auto setup = make_scorer(cfg);
    const auto base = score_options(cfg, setup.stats);
    std::vector<ScoredLayout> scored(docs.size());
    parallel_for(docs.size(), cfg.parallelism, [&](size_t i) {
        auto opts = base;
        opts.background_path = docs[i].background_path;
        scored[i] = score_layout_full(docs[i].doc, docs[i].background, docs[i].target_text, *setup.scorer, opts);
    });

    std::string text;
    if (o.json)
    {
        for (size_t i = 0; i < docs.size(); ++i)
        {
            const Json j {
                { "id", docs[i].id },
                { "breakdown", to_json(scored[i].breakdown) },
                { "features", to_json(scored[i].analysis.features) },
                { "ocr_metrics", to_json(scored[i].analysis.ocr_metrics) },
                { "svg_metrics", to_json(scored[i].analysis.svg_metrics) },
            };
            text += j.dump() + "\n";
        }
    }
    else
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %8s %9s %8s %8s %9s\n", "id", "char_f", "r_ali", "r_ove",
                      "r_com", "r_layout", "r_ocr", "r_svg", "r_score");
        text += buf;
        for (size_t i = 0; i < docs.size(); ++i)
        {
            const auto& b = scored[i].breakdown;
            std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %8s %9s %8s %8s %9s\n", docs[i].id.c_str(),
                          fixed(b.char_f).c_str(), fixed(b.graphic.r_ali).c_str(), fixed(b.graphic.r_ove).c_str(),
                          fixed(b.graphic.r_com).c_str(), fixed(b.r_layout).c_str(), fixed(b.r_ocr).c_str(),
                          fixed(b.r_svg).c_str(), fixed(b.r_score).c_str());
            text += buf;
        }
    }
    emit(o.out, text, out);
    return exit_ok;
}

int cmd_perturb(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    auto docs = load_corpus(o.corpus);
    const std::filesystem::path root(o.out);
    std::vector<LevelSet> levels(docs.size());
    parallel_for(docs.size(), cfg.parallelism,
                 [&](size_t i) { levels[i] = build_levels(docs[i].doc, docs[i].id, cfg.perturb); });
    for (size_t k = 0; k < 4; ++k)
    {
        const auto dir = root / level_names[k];
        std::filesystem::create_directories(dir);
        for (size_t i = 0; i < docs.size(); ++i)
        {
            const auto& d = docs[i];
            write_file(dir / (d.id + ".svg"), serialize_svg(levels[i][k]));
            write_file(dir / (d.id + ".txt"), d.target_text);
            if (!d.background_path.empty())
                std::filesystem::copy_file(d.background_path,
                                           dir / (d.id + std::filesystem::path(d.background_path).extension().string()),
                                           std::filesystem::copy_options::overwrite_existing);
        }
    }
    out << "wrote 4 levels for " << docs.size() << " documents to " << o.out << "\n";
    return exit_ok;
}

int cmd_pairs(const Options& o, std::ostream& out)
{
    const std::filesystem::path root(o.levels);
    const auto base_docs = load_corpus(root / "I");
    std::string text;
    size_t count = 0;
    for (const auto& d: base_docs)
    {
        std::map<QualityLevel, std::string> svgs;
        for (size_t k = 0; k < 4; ++k)
        {
            const auto p = root / level_names[k] / (d.id + ".svg");
            if (std::filesystem::exists(p))
                svgs[static_cast<QualityLevel>(k + 1)] = read_file(p);
        }
        for (const auto& r: build_pair_records(d.id, svgs, d.background_path, d.target_text))
        {
            text += to_jsonl(r) + "\n";
            ++count;
        }
    }
    emit(o.out, text, out);
    if (!o.out.empty() && o.out != "-")
        out << "wrote " << count << " pairs to " << o.out << "\n";
    return exit_ok;
}

/// Feature vectors for every pair record; identical SVGs are analyzed once.
std::vector<PreferencePair> featurize(const std::vector<PairRecord>& records, const RunConfig& cfg)
{
    BackgroundCache backgrounds(cfg);
    std::map<std::pair<std::string, std::string>, size_t> index; // (background, svg) -> slot
    std::vector<std::tuple<std::string, std::string, std::string>> jobs; // background, svg, target
    auto slot = [&](const PairRecord& r, const std::string& svg) {
        auto [it, fresh] = index.try_emplace({ r.background_path, svg }, jobs.size());
        if (fresh)
            jobs.emplace_back(r.background_path, svg, r.target_text);
        return it->second;
    };
    std::vector<std::pair<size_t, size_t>> slots;
    for (const auto& r: records)
        slots.emplace_back(slot(r, r.better_svg), slot(r, r.worse_svg));

    std::vector<FeatureVector> features(jobs.size());
    parallel_for(jobs.size(), cfg.parallelism, [&](size_t i) {
        const auto& [bg, svg, target] = jobs[i];
        const auto doc = parse_svg(svg).document;
        features[i] = analyze_layout(doc, backgrounds.get(bg), target, cfg.ocr).features;
    });

    std::vector<PreferencePair> pairs;
    pairs.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i)
        pairs.push_back({ records[i].query_id, features[slots[i].first], features[slots[i].second],
                          records[i].better_level, records[i].worse_level });
    return pairs;
}

std::vector<PairRecord> read_pair_records(const std::string& path)
{
    std::vector<PairRecord> records;
    for (const auto& line: read_lines(path))
        records.push_back(parse_pair_record(line));
    if (records.empty())
        throw InputError("'" + path + "' contains no pairs");
    return records;
}

int cmd_rm_train(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    const auto pairs = featurize(read_pair_records(o.pairs), cfg);
    const auto result = train(pairs, o.lr, o.steps, cfg.seed);

    std::vector<FeatureVector> scored;
    for (const auto& p: pairs)
    {
        scored.push_back(p.better);
        scored.push_back(p.worse);
    }
    RewardModelFile model { result.scorer, fit_norm_stats(result.scorer, scored) };
    write_file(o.out, serialize_model(model));
    const Json summary {
        { "pairs", pairs.size() },
        { "loss_initial", result.loss_trace.front() },
        { "loss_final", result.loss_trace.back() },
        { "train_accuracy", pairwise_accuracy(result.scorer, pairs) },
        { "norm_stats", { { "mean", model.norm_stats.mean }, { "std", model.norm_stats.std } } },
    };
    out << summary.dump() << "\n";
    return exit_ok;
}

int cmd_rm_eval(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    const auto model = parse_model(read_file(o.model));
    const auto pairs = featurize(read_pair_records(o.pairs), cfg);
    std::map<std::string, std::vector<PreferencePair>> by_level;
    for (const auto& p: pairs)
        by_level[std::string(to_string(p.better_level)) + "-" + std::string(to_string(p.worse_level))].push_back(p);
    Json per_level = Json::object();
    for (const auto& [name, ps]: by_level)
        per_level[name] = pairwise_accuracy(model.scorer, ps);
    const Json summary {
        { "pairs", pairs.size() },
        { "accuracy", pairwise_accuracy(model.scorer, pairs) },
        { "loss", bt_loss(model.scorer, pairs) },
        { "accuracy_by_level_pair", per_level },
    };
    if (o.json)
        out << summary.dump() << "\n";
    else
    {
        out << "pairs     " << pairs.size() << "\n";
        out << "accuracy  " << fixed(summary["accuracy"].get<double>()) << "\n";
        out << "loss      " << fixed(summary["loss"].get<double>()) << "\n";
        for (const auto& [name, acc]: per_level.items())
            out << "  " << name << std::string(10 - std::min<size_t>(name.size(), 8), ' ') << fixed(acc.get<double>())
                << "\n";
    }
    return exit_ok;
}

int cmd_advantages(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    if (o.scheme != "outcome" && o.scheme != "process")
        throw InputError("--scheme must be outcome or process");
    std::vector<Rollout> rollouts;
    for (const auto& line: read_lines(o.in))
    {
        rollouts.push_back(parse_rollout(line));
        rollouts.back().validate(cfg.n_max);
    }
    if (rollouts.empty())
        throw InputError("'" + o.in + "' contains no rollouts");
    const auto groups = group_rollouts(std::move(rollouts));
    const double gamma = o.gamma.value_or(cfg.reward.gamma);
    const auto result = o.scheme == "outcome" ? outcome_advantages(groups, gamma) : process_advantages(groups, cfg.n_max);
    std::string text;
    for (const auto& r: result.records)
        text += to_jsonl(r) + "\n";
    emit(o.out, text, out);
    return exit_ok;
}

std::unique_ptr<Policy> make_policy(const Options& o, const CorpusDocument& d, std::uint64_t seed)
{
    if (o.policy == "oracle")
        return std::make_unique<OraclePolicy>(d.doc);
    if (o.policy == "always-reviser")
        return std::make_unique<AlwaysReviserPolicy>(d.doc);
    if (o.policy == "greedy-fixer")
        return std::make_unique<GreedyFixerPolicy>(d.doc);
    if (o.policy == "random-perturber")
        return std::make_unique<RandomPerturberPolicy>(d.doc, derive_seed(seed, d.id));
    if (o.policy == "external")
    {
        if (o.policy_command.empty())
            throw InputError("--policy external needs --policy-command");
        return std::make_unique<ExternalPolicy>(o.policy_command);
    }
    throw InputError("unknown policy '" + o.policy + "'");
}

int cmd_simulate(const Options& o, const RunConfig& cfg, std::ostream& out)
{
    const auto docs = load_corpus(o.corpus);
    const auto setup = make_scorer(cfg);
    LoopOptions lo;
    lo.n_max = cfg.n_max;
    lo.invalid_svg_score = cfg.invalid_svg_score;
    lo.score = score_options(cfg, setup.stats);
    if (!o.dump_dir.empty())
        lo.dump_dir = o.dump_dir;

    std::vector<std::string> lines(docs.size());
    parallel_for(docs.size(), cfg.parallelism, [&](size_t i) {
        const auto& d = docs[i];
        auto policy = make_policy(o, d, cfg.seed);
        const Query q { d.id, d.background_path, d.target_text, d.doc.canvas };
        const auto result = run_loop(*policy, q, d.background, *setup.scorer, lo);
        lines[i] = to_jsonl(result.trajectory, result.r_format) + "\n";
    });
    std::string text;
    for (const auto& l: lines)
        text += l;
    emit(o.out, text, out);
    return exit_ok;
}

RewardService* active_service = nullptr;

extern "C" void stop_active_service(int)
{
    if (active_service)
        active_service->stop();
}

int cmd_serve(const RunConfig& cfg, std::ostream& out)
{
    RewardService service(cfg);
    const int port = service.bind();
    out << "listening on " << cfg.host << ":" << port << std::endl;
    active_service = &service;
    std::signal(SIGINT, stop_active_service);
    std::signal(SIGTERM, stop_active_service);
    service.run();
    active_service = nullptr;
    return exit_ok;
}

} // namespace

int run_cli(int argc, const char* const* argv, char** envp, std::ostream& out, std::ostream& err)
{
    CLI::App app { "Layout reward, perturbation and reflection-loop toolkit", "layoutloop" };
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config_path, "TOML config file")->check(CLI::ExistingFile);
    app.add_option("--set", o.sets, "Config override KEY=VALUE (repeatable)");
    app.add_option("--seed", o.seed, "Random seed");
    app.add_option("--jobs", o.jobs, "Worker threads");
    app.add_option("--n-max", o.n_max, "Tool-call cap for the reflection loop");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    synth->add_option("--out", o.out, "Output directory")->required();
    synth->add_option("--count", o.count, "Number of documents");
    synth->add_option("--kind", o.kind, "poster or fixer")->check(CLI::IsMember({ "poster", "fixer" }));

    auto* eval = app.add_subcommand("eval", "Score SVG documents or corpus directories");
    eval->add_option("inputs", o.inputs, "SVG files or directories")->required();
    eval->add_flag("--json", o.json, "JSON lines instead of a table");
    eval->add_option("--background", o.background, "Background image for every input");
    eval->add_option("--target", o.target, "Target text for every input");
    eval->add_option("--out", o.out, "Output file (default stdout)");

    auto* perturb = app.add_subcommand("perturb", "Build the four quality levels of a corpus");
    perturb->add_option("--corpus", o.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    perturb->add_option("--out", o.out, "Output directory")->required();

    auto* pairs = app.add_subcommand("pairs", "Emit preference pairs from a level build");
    pairs->add_option("--levels", o.levels, "Directory with I, II, III, IV")->required()->check(CLI::ExistingDirectory);
    pairs->add_option("--out", o.out, "Output JSONL (default stdout)");

    auto* rm_train = app.add_subcommand("rm-train", "Train the linear reward model on preference pairs");
    rm_train->add_option("--pairs", o.pairs, "Pair JSONL")->required()->check(CLI::ExistingFile);
    rm_train->add_option("--out", o.out, "Model JSON")->required();
    rm_train->add_option("--lr", o.lr, "Learning rate");
    rm_train->add_option("--steps", o.steps, "Gradient steps");

    auto* rm_eval = app.add_subcommand("rm-eval", "Pairwise accuracy of a trained model");
    rm_eval->add_option("--model", o.model, "Model JSON")->required()->check(CLI::ExistingFile);
    rm_eval->add_option("--pairs", o.pairs, "Pair JSONL")->required()->check(CLI::ExistingFile);
    rm_eval->add_flag("--json", o.json, "JSON output");

    auto* adv = app.add_subcommand("advantages", "Outcome or process advantages from rollout JSONL");
    adv->add_option("--scheme", o.scheme, "outcome or process")->check(CLI::IsMember({ "outcome", "process" }));
    adv->add_option("--in", o.in, "Rollout JSONL")->required()->check(CLI::ExistingFile);
    adv->add_option("--out", o.out, "Output JSONL (default stdout)");
    adv->add_option("--gamma", o.gamma, "Format reward weight");

    auto* sim = app.add_subcommand("simulate", "Run the reflection loop over a corpus");
    sim->add_option("--policy", o.policy, "oracle, always-reviser, greedy-fixer, random-perturber or external")
        ->check(CLI::IsMember({ "oracle", "always-reviser", "greedy-fixer", "random-perturber", "external" }));
    sim->add_option("--policy-command", o.policy_command, "Command for the external policy");
    sim->add_option("--corpus", o.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    sim->add_option("--out", o.out, "Trajectory JSONL (default stdout)");
    sim->add_option("--dump-dir", o.dump_dir, "Write every render as PNG here");

    auto* serve = app.add_subcommand("serve", "Start the reward service");
    serve->add_option("--host", o.host, "Bind address");
    serve->add_option("--port", o.port, "Port (0 picks a free one)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input_error;
    }

    try
    {
        const RunConfig cfg = build_config(o, envp);
        if (synth->parsed())
            return cmd_synth(o, cfg, out);
        if (eval->parsed())
            return cmd_eval(o, cfg, out);
        if (perturb->parsed())
            return cmd_perturb(o, cfg, out);
        if (pairs->parsed())
            return cmd_pairs(o, out);
        if (rm_train->parsed())
            return cmd_rm_train(o, cfg, out);
        if (rm_eval->parsed())
            return cmd_rm_eval(o, cfg, out);
        if (adv->parsed())
            return cmd_advantages(o, cfg, out);
        if (sim->parsed())
            return cmd_simulate(o, cfg, out);
        if (serve->parsed())
            return cmd_serve(cfg, out);
        return exit_input_error;
    }
    catch (const InputError& e)
    {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << "\n";
        return exit_input_error;
    }
    catch (const IoError& e)
    {
        err << "io error: " << e.what() << "\n";
        return exit_input_error;
    }
    catch (const ParseError& e)
    {
        err << "parse error: " << e.what() << "\n";
        return exit_input_error;
    }
    catch (const SchemaError& e)
    {
        err << "schema error: " << e.what() << "\n";
        return exit_input_error;
    }
    catch (const FormatError& e)
    {
        err << "format error: " << e.what() << "\n";
        return exit_input_error;
    }
    catch (const std::exception& e)
    {
        err << "internal error: " << e.what() << "\n";
        return exit_internal_error;
    }
}

} // namespace layoutloop
