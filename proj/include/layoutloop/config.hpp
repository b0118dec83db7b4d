// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/ocr.hpp>
#include <layoutloop/perturb.hpp>
#include <layoutloop/reward.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace layoutloop
{

struct RunConfig
{
    std::filesystem::path corpus_dir;
    std::filesystem::path background_dir; // base for relative background paths in requests and records
    std::filesystem::path output_dir;

    RewardConfig reward;
    bool rm_stats_set = false; // reward.rm_mean or reward.rm_std given explicitly
    PerturbConfig perturb;
    OcrConfig ocr;

    std::string scorer = "heuristic"; // heuristic | learned | service
    std::filesystem::path rm_model;   // learned scorer weights
    std::string rm_service_url;
    std::optional<std::string> external_ocr_command;

    int n_max = 4;
    double invalid_svg_score = -1.0;
    std::uint64_t seed = 0;
    int parallelism = 1;

    std::string host = "127.0.0.1";
    int port = 8080;

    /// Assigns one dotted key ("reward.alpha", "seed", ...). Throws ConfigError for unknown keys
    /// or values of the wrong type.
    void set(const std::string& key, const std::string& value);

    /// Range checks plus existence of every non-empty input path. Throws ConfigError.
    void validate() const;
};

/// Reads the TOML subset used for config files: [section] headers, key = value pairs with
/// strings, numbers and booleans, and # comments. Throws ConfigError.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// LAYOUTLOOP_<SECTION>_<KEY> or LAYOUTLOOP_<KEY>, e.g. LAYOUTLOOP_REWARD_ALPHA, LAYOUTLOOP_SEED.
void apply_environment(RunConfig& cfg, char** envp);

/// Maps an environment variable name to its config key, or nullopt if it is not one of ours.
[[nodiscard]] std::optional<std::string> env_to_key(std::string_view name);

/// Scorer selected by the config, and the normalization statistics to use with it. For the learned
/// scorer the statistics come from the model file unless reward.rm_mean / rm_std were set explicitly.
struct ScorerSetup
{
    std::shared_ptr<const LayoutScorer> scorer;
    NormStats stats;
};
[[nodiscard]] ScorerSetup make_scorer(const RunConfig& cfg);

/// Score options derived from the config.
[[nodiscard]] ScoreOptions score_options(const RunConfig& cfg, const NormStats& stats);

/// Resolves a background path: absolute paths are kept, relative ones are joined to background_dir.
[[nodiscard]] std::filesystem::path resolve_background(const RunConfig& cfg, const std::string& path);

} // namespace layoutloop
