// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/reward.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace layoutloop
{

enum class QualityLevel
{
    I = 1, // best
    II = 2,
    III = 3,
    IV = 4, // worst
};

[[nodiscard]] std::string_view to_string(QualityLevel level) noexcept;
[[nodiscard]] QualityLevel parse_quality_level(std::string_view text);

/// Linear reward model r(x) = w . x + b over metric features.
struct LinearScorer
{
    std::array<double, FeatureVector::size> weights {};
    double bias = 0.0;

    [[nodiscard]] double score(const FeatureVector& f) const;
    [[nodiscard]] LinearScorer negated() const;

    bool operator==(const LinearScorer&) const = default;
};

struct PreferencePair
{
    std::string query_id;
    FeatureVector better;
    FeatureVector worse;
    QualityLevel better_level = QualityLevel::I;
    QualityLevel worse_level = QualityLevel::IV;
};

/// -mean log sigmoid(r(better) - r(worse)). Requires a nonempty pair set.
[[nodiscard]] double bt_loss(const LinearScorer& scorer, std::span<const PreferencePair> pairs);

/// Analytic gradient of bt_loss: weights first, bias last (always zero).
[[nodiscard]] std::array<double, FeatureVector::size + 1> bt_loss_gradient(const LinearScorer& scorer,
                                                                           std::span<const PreferencePair> pairs);

struct TrainResult
{
    LinearScorer scorer;
    std::vector<double> loss_trace; // loss before each step, then the final loss
};

/// Full-batch gradient descent from a small seeded initialization. Throws TrainingError on divergence.
[[nodiscard]] TrainResult train(std::span<const PreferencePair> pairs, double lr, int steps, std::uint64_t seed);

/// Fraction of pairs ranked correctly; ties count one half.
[[nodiscard]] double pairwise_accuracy(const LinearScorer& scorer, std::span<const PreferencePair> pairs);

[[nodiscard]] NormStats fit_norm_stats(const LinearScorer& scorer, std::span<const FeatureVector> scored_set);

/// Layout scorer backed by a trained linear model.
class LearnedScorer final: public LayoutScorer
{
  public:
    explicit LearnedScorer(LinearScorer model): _model(model) {}

    [[nodiscard]] double raw_score(const ScoringContext& ctx) const override { return _model.score(ctx.analysis.features); }
    [[nodiscard]] std::string name() const override { return "learned"; }

  private:
    LinearScorer _model;
};

/// Persisted model: {weights, bias, feature_names, norm_stats}.
struct RewardModelFile
{
    LinearScorer scorer;
    NormStats norm_stats;
};

[[nodiscard]] std::string serialize_model(const RewardModelFile& model);
[[nodiscard]] RewardModelFile parse_model(std::string_view json_text);

} // namespace layoutloop
