// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/layout_doc.hpp>
#include <layoutloop/rmlite.hpp>
#include <layoutloop/rng.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace layoutloop
{

/// Perturbation magnitudes. Offsets are fractions of the canvas dimension along each axis.
struct PerturbConfig
{
    double l2_offset_frac = 0.03;
    double l2_font_jitter = 0.10; // font scaled by 1 + U(-j, j)

    double l3_offset_frac = 0.10;

    double l4_offset_frac = 0.40;
    double l4_font_scale_min = 0.3;
    double l4_font_scale_max = 2.5;
    double l4_text_delete_p = 0.3;
    double l4_image_drop_p = 0.5;
    double l4_global_scale_min = 0.5;
    double l4_global_scale_max = 1.8;

    std::uint64_t seed = 0;

    /// Throws ConfigError for probabilities outside [0, 1], negative magnitudes or inverted ranges.
    void validate() const;
};

/// Mild degradation: small offsets plus font jitter on every text element.
[[nodiscard]] LayoutDocument perturb_level2(const LayoutDocument& doc, Rng& rng, const PerturbConfig& cfg = {});

/// Moderate degradation: independent uniform offsets on every text element; nothing else changes.
[[nodiscard]] LayoutDocument perturb_level3(const LayoutDocument& doc, Rng& rng, const PerturbConfig& cfg = {});

/// Severe degradation, in order: global scale about the canvas center (texts and rects),
/// large offsets, per-element font scaling, text deletion, image drop.
[[nodiscard]] LayoutDocument perturb_level4(const LayoutDocument& doc, Rng& rng, const PerturbConfig& cfg = {});

/// The four documents of one prompt, best first.
using LevelSet = std::array<LayoutDocument, 4>;

/// Level I is the input. Each level draws from its own stream derived from (cfg.seed, id, level).
[[nodiscard]] LevelSet build_levels(const LayoutDocument& ground_truth, std::string_view id,
                                    const PerturbConfig& cfg = {});

/// The six (better, worse) level combinations in a fixed order: (I,II), (I,III), (I,IV), (II,III), ...
[[nodiscard]] std::vector<std::pair<QualityLevel, QualityLevel>> level_pairs();

/// One preference pair per level combination. Throws InputError unless all four levels are present.
template <typename T, typename Make>
auto build_pairs(const std::map<QualityLevel, T>& levels, Make make)
{
    using Pair = decltype(make(std::declval<const T&>(), std::declval<const T&>(), QualityLevel::I, QualityLevel::II));
    for (auto level: { QualityLevel::I, QualityLevel::II, QualityLevel::III, QualityLevel::IV })
        if (!levels.contains(level))
            throw InputError("level " + std::string(to_string(level)) + " is missing");
    std::vector<Pair> pairs;
    pairs.reserve(6);
    for (auto [better, worse]: level_pairs())
        pairs.push_back(make(levels.at(better), levels.at(worse), better, worse));
    return pairs;
}

/// Feature-level pairs for reward model training.
[[nodiscard]] std::vector<PreferencePair> build_pairs(const std::string& query_id,
                                                      const std::map<QualityLevel, FeatureVector>& levels);

/// Serialized pair record: {query_id, level_pair, better_svg, worse_svg, background_path, target_text}.
struct PairRecord
{
    std::string query_id;
    QualityLevel better_level = QualityLevel::I;
    QualityLevel worse_level = QualityLevel::II;
    std::string better_svg;
    std::string worse_svg;
    std::string background_path;
    std::string target_text;

    bool operator==(const PairRecord&) const = default;
};

[[nodiscard]] std::vector<PairRecord> build_pair_records(const std::string& query_id,
                                                         const std::map<QualityLevel, std::string>& svgs,
                                                         const std::string& background_path,
                                                         const std::string& target_text);

[[nodiscard]] std::string to_jsonl(const PairRecord& record);
/// Throws InputError on malformed records.
[[nodiscard]] PairRecord parse_pair_record(std::string_view line);

} // namespace layoutloop
