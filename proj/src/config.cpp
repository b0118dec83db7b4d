// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/config.hpp>
#include <layoutloop/corpus.hpp>
#include <layoutloop/error.hpp>
#include <layoutloop/rmlite.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

namespace layoutloop
{

namespace
{

double to_double(const std::string& key, const std::string& value)
{
    double out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out))
        throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
    return out;
}

long long to_integer(const std::string& key, const std::string& value)
{
    long long out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1")
        return true;
    if (value == "false" || value == "0")
        return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

Setter real(double PerturbConfig::*field)
{
    return [field](RunConfig& c, const std::string& k, const std::string& v) { c.perturb.*field = to_double(k, v); };
}

Setter ocr_real(double OcrConfig::*field)
{
    return [field](RunConfig& c, const std::string& k, const std::string& v) { c.ocr.*field = to_double(k, v); };
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        { "seed",
          [](RunConfig& c, const std::string& k, const std::string& v) {
              const auto s = to_integer(k, v);
              if (s < 0)
                  throw ConfigError("'seed' must be non-negative");
              c.seed = static_cast<std::uint64_t>(s);
              c.perturb.seed = c.seed;
          } },
        { "n_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_max = static_cast<int>(to_integer(k, v)); } },
        { "parallelism",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.parallelism = static_cast<int>(to_integer(k, v)); } },
        { "paths.corpus_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.corpus_dir = v; } },
        { "paths.background_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.background_dir = v; } },
        { "paths.output_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; } },
        { "reward.alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.reward.alpha = to_double(k, v); } },
        { "reward.gamma", [](RunConfig& c, const std::string& k, const std::string& v) { c.reward.gamma = to_double(k, v); } },
        { "reward.rm_mean",
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.reward.rm_stats.mean = to_double(k, v);
              c.rm_stats_set = true;
          } },
        { "reward.rm_std",
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.reward.rm_stats.std = to_double(k, v);
              c.rm_stats_set = true;
          } },
        { "reward.scorer", [](RunConfig& c, const std::string&, const std::string& v) { c.scorer = v; } },
        { "reward.rm_model", [](RunConfig& c, const std::string&, const std::string& v) { c.rm_model = v; } },
        { "reward.rm_service_url", [](RunConfig& c, const std::string&, const std::string& v) { c.rm_service_url = v; } },
        { "perturb.l2_offset_frac", real(&PerturbConfig::l2_offset_frac) },
        { "perturb.l2_font_jitter", real(&PerturbConfig::l2_font_jitter) },
        { "perturb.l3_offset_frac", real(&PerturbConfig::l3_offset_frac) },
        { "perturb.l4_offset_frac", real(&PerturbConfig::l4_offset_frac) },
        { "perturb.l4_font_scale_min", real(&PerturbConfig::l4_font_scale_min) },
        { "perturb.l4_font_scale_max", real(&PerturbConfig::l4_font_scale_max) },
        { "perturb.l4_text_delete_p", real(&PerturbConfig::l4_text_delete_p) },
        { "perturb.l4_image_drop_p", real(&PerturbConfig::l4_image_drop_p) },
        { "perturb.l4_global_scale_min", real(&PerturbConfig::l4_global_scale_min) },
        { "perturb.l4_global_scale_max", real(&PerturbConfig::l4_global_scale_max) },
        { "ocr.min_visible_fraction", ocr_real(&OcrConfig::min_visible_fraction) },
        { "ocr.min_contrast", ocr_real(&OcrConfig::min_contrast) },
        { "ocr.min_font_size", ocr_real(&OcrConfig::min_font_size) },
        { "ocr.strip_whitespace",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.ocr.strip_whitespace = to_bool(k, v); } },
        { "ocr.external_command",
          [](RunConfig& c, const std::string&, const std::string& v) {
              c.external_ocr_command = v.empty() ? std::nullopt : std::optional<std::string>(v);
          } },
        { "ocr.external_timeout_ms",
          [](RunConfig& c, const std::string& k, const std::string& v) {
              c.ocr.external_timeout = std::chrono::milliseconds(to_integer(k, v));
          } },
        { "loop.n_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_max = static_cast<int>(to_integer(k, v)); } },
        { "loop.invalid_svg_score",
          [](RunConfig& c, const std::string& k, const std::string& v) { c.invalid_svg_score = to_double(k, v); } },
        { "service.host", [](RunConfig& c, const std::string&, const std::string& v) { c.host = v; } },
        { "service.port", [](RunConfig& c, const std::string& k, const std::string& v) { c.port = static_cast<int>(to_integer(k, v)); } },
    };
    return table;
}

std::string trim(std::string s)
{
    auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

/// TOML scalar to its plain text: strips quotes (handling basic escapes) and trailing comments.
std::string toml_scalar(const std::string& key, const std::string& raw)
{
    std::string v = trim(raw);
    if (v.empty())
        throw ConfigError("'" + key + "' has no value");
    if (v.front() == '"' || v.front() == '\'')
    {
        const char quote = v.front();
        std::string out;
        size_t i = 1;
        for (; i < v.size() && v[i] != quote; ++i)
        {
            if (quote == '"' && v[i] == '\\' && i + 1 < v.size())
            {
                const char e = v[++i];
                switch (e)
                {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: throw ConfigError("'" + key + "' uses an unsupported escape");
                }
            }
            else
                out += v[i];
        }
        if (i >= v.size())
            throw ConfigError("'" + key + "' has an unterminated string");
        const std::string rest = trim(v.substr(i + 1));
        if (!rest.empty() && rest.front() != '#')
            throw ConfigError("'" + key + "' has trailing characters after the string");
        return out;
    }
    if (v.front() == '[' || v.front() == '{')
        throw ConfigError("'" + key + "': arrays and inline tables are not supported");
    if (const auto hash = v.find('#'); hash != std::string::npos)
        v = trim(v.substr(0, hash));
    v.erase(std::remove(v.begin(), v.end(), '_'), v.end()); // TOML digit separators
    return v;
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value)
{
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end())
        throw ConfigError("unknown config key '" + key + "'");
    it->second(*this, key, value);
}

void RunConfig::validate() const
{
    if (n_max < 1)
        throw ConfigError("n_max must be at least 1");
    if (parallelism < 1)
        throw ConfigError("parallelism must be at least 1");
    if (!(reward.alpha >= 0) || !std::isfinite(reward.gamma))
        throw ConfigError("reward.alpha must be non-negative and reward.gamma finite");
    if (!(reward.rm_stats.std > 0))
        throw ConfigError("reward.rm_std must be positive");
    if (scorer != "heuristic" && scorer != "learned" && scorer != "service")
        throw ConfigError("reward.scorer must be heuristic, learned or service");
    if (scorer == "learned" && rm_model.empty())
        throw ConfigError("the learned scorer needs reward.rm_model");
    if (scorer == "service" && rm_service_url.empty())
        throw ConfigError("the service scorer needs reward.rm_service_url");
    if (port < 0 || port > 65535)
        throw ConfigError("service.port out of range");
    perturb.validate();
    for (const auto& p: { corpus_dir, background_dir, rm_model })
        if (!p.empty() && !std::filesystem::exists(p))
            throw ConfigError("path '" + p.string() + "' does not exist");
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path)
{
    std::istringstream in(read_file(path));
    boost::property_tree::ptree tree;
    try
    {
        boost::property_tree::ini_parser::read_ini(in, tree);
    }
    catch (const boost::property_tree::ini_parser_error& e)
    {
        throw ConfigError("config " + path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    for (const auto& [name, node]: tree)
    {
        if (node.empty())
        {
            cfg.set(name, toml_scalar(name, node.data()));
            continue;
        }
        for (const auto& [sub, leaf]: node)
        {
            const std::string key = name + "." + sub;
            cfg.set(key, toml_scalar(key, leaf.data()));
        }
    }
}

std::optional<std::string> env_to_key(std::string_view name)
{
    constexpr std::string_view prefix = "LAYOUTLOOP_";
    if (!name.starts_with(prefix))
        return std::nullopt;
    std::string rest(name.substr(prefix.size()));
    std::transform(rest.begin(), rest.end(), rest.begin(), [](unsigned char c) { return std::tolower(c); });
    for (std::string_view section: { "paths", "reward", "perturb", "ocr", "loop", "service" })
        if (rest.size() > section.size() + 1 && rest.starts_with(section) && rest[section.size()] == '_')
            return std::string(section) + "." + rest.substr(section.size() + 1);
    return rest;
}

void apply_environment(RunConfig& cfg, char** envp)
{
    if (!envp)
        return;
    for (char** e = envp; *e; ++e)
    {
        const std::string_view entry(*e);
        const auto eq = entry.find('=');
        if (eq == std::string_view::npos)
            continue;
        if (const auto key = env_to_key(entry.substr(0, eq)))
            cfg.set(*key, std::string(entry.substr(eq + 1)));
    }
}

ScorerSetup make_scorer(const RunConfig& cfg)
{
    ScorerSetup setup;
    setup.stats = cfg.reward.rm_stats;
    if (cfg.scorer == "learned")
    {
        const auto model = parse_model(read_file(cfg.rm_model));
        setup.scorer = std::make_shared<LearnedScorer>(model.scorer);
        if (!cfg.rm_stats_set)
            setup.stats = model.norm_stats;
    }
    else if (cfg.scorer == "service")
        setup.scorer = std::make_shared<ServiceScorer>(cfg.rm_service_url);
    else if (cfg.scorer == "heuristic")
        setup.scorer = std::make_shared<HeuristicScorer>();
    else
        throw ConfigError("unknown scorer '" + cfg.scorer + "'");
    return setup;
}

ScoreOptions score_options(const RunConfig& cfg, const NormStats& stats)
{
    ScoreOptions o;
    o.reward = cfg.reward;
    o.reward.rm_stats = stats;
    o.ocr = cfg.ocr;
    o.external_ocr_command = cfg.external_ocr_command;
    return o;
}

std::filesystem::path resolve_background(const RunConfig& cfg, const std::string& path)
{
    const std::filesystem::path p(path);
    if (p.is_absolute() || cfg.background_dir.empty())
        return p;
    return cfg.background_dir / p;
}

} // namespace layoutloop
