// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/error.hpp>
#include <layoutloop/features.hpp>
#include <layoutloop/trajectory.hpp>

#include <array>
#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace layoutloop
{

/// Fixed standardization statistics for raw layout scores.
struct NormStats
{
    double mean = 0.0;
    double std = 1.0;

    bool operator==(const NormStats&) const = default;
};

struct RewardConfig
{
    double alpha = 0.25; // weight of the OCR and SVG text accuracies
    double gamma = 0.1;  // weight of the format reward in the advantage
    NormStats rm_stats;
};

struct RewardBreakdown
{
    double r_layout = 0;     // normalized layout score
    double r_layout_raw = 0; // scorer output before normalization
    double r_ocr = 0;
    double r_svg = 0;
    double r_format = 1.0;
    double r_score = 0;
    double char_f = 0; // reported alongside; not part of r_score
    GraphicMetrics graphic;
};

/// Layout scorer failure; carries whatever was computed before the provider failed.
class ProviderError: public Error
{
  public:
    ProviderError(const std::string& what, RewardBreakdown partial): Error(what), _partial(std::move(partial)) {}

    [[nodiscard]] const RewardBreakdown& partial() const noexcept { return _partial; }

  private:
    RewardBreakdown _partial;
};

/// Inputs available to a layout scorer.
struct ScoringContext
{
    const LayoutDocument& doc;
    std::string_view svg;
    std::string_view background_path;
    std::string_view target_text;
    const LayoutAnalysis& analysis;
};

/// Produces the raw (unnormalized) layout score. Implementations must be safe to call concurrently.
class LayoutScorer
{
  public:
    virtual ~LayoutScorer() = default;
    [[nodiscard]] virtual double raw_score(const ScoringContext& ctx) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

/// w . [char_f, -r_ali, -r_ove, -r_com/30, in_canvas_fraction]. Not a trained model.
class HeuristicScorer final: public LayoutScorer
{
  public:
    using Weights = std::array<double, 5>;

    explicit HeuristicScorer(Weights weights = { 1, 1, 1, 1, 1 }): _weights(weights) {}

    [[nodiscard]] double raw_score(const ScoringContext& ctx) const override;
    [[nodiscard]] double score_features(const FeatureVector& f) const;
    [[nodiscard]] std::string name() const override { return "heuristic"; }

  private:
    Weights _weights;
};

/// Remote scorer: POST {background_path, target_text, svg} to <base_url>/rm_score, expects {score}.
class ServiceScorer final: public LayoutScorer
{
  public:
    explicit ServiceScorer(std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(30));

    [[nodiscard]] double raw_score(const ScoringContext& ctx) const override;
    [[nodiscard]] std::string name() const override { return "service"; }

  private:
    std::string _baseUrl;
    std::chrono::milliseconds _timeout;
};

/// (raw - mean) / std. Throws ConfigError unless std is positive and finite.
[[nodiscard]] double normalize_rm(double raw, const NormStats& stats);

/// Population mean and standard deviation (floored at 1e-8).
[[nodiscard]] NormStats fit_norm_stats(std::span<const double> scores);

/// r_layout + alpha * (r_ocr + r_svg).
[[nodiscard]] double compose_score(double r_layout_norm, double r_ocr, double r_svg, const RewardConfig& cfg);

struct ScoreOptions
{
    RewardConfig reward;
    OcrConfig ocr;
    AdvanceModel advance;
    std::string background_path;
    std::string svg; // serialized form sent to remote scorers; derived from doc if empty
    std::optional<std::string> external_ocr_command;
};

/// Full reward for one layout: r_ocr and r_svg are character accuracies against the target,
/// r_layout the normalized scorer output, r_score their composition.
[[nodiscard]] RewardBreakdown score_layout(const LayoutDocument& doc, const LuminanceRaster& background,
                                           std::string_view target_text, const LayoutScorer& provider,
                                           const ScoreOptions& options = {});

struct ScoredLayout
{
    RewardBreakdown breakdown;
    LayoutAnalysis analysis;
};

/// score_layout that also returns the render, OCR output and features it computed.
[[nodiscard]] ScoredLayout score_layout_full(const LayoutDocument& doc, const LuminanceRaster& background,
                                             std::string_view target_text, const LayoutScorer& provider,
                                             const ScoreOptions& options = {});

} // namespace layoutloop
