// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/rmlite.hpp>
#include <layoutloop/rng.hpp>

#include <json.hpp>

#include <cmath>

namespace layoutloop
{

namespace
{

// log(sigmoid(m)) without overflow for large |m|.
double log_sigmoid(double m)
{
    return m >= 0 ? -std::log1p(std::exp(-m)) : m - std::log1p(std::exp(m));
}

double sigmoid(double m)
{
    if (m >= 0)
        return 1.0 / (1.0 + std::exp(-m));
    const double e = std::exp(m);
    return e / (1.0 + e);
}

} // namespace

std::string_view to_string(QualityLevel level) noexcept
{
    switch (level)
    {
        case QualityLevel::I: return "I";
        case QualityLevel::II: return "II";
        case QualityLevel::III: return "III";
        case QualityLevel::IV: return "IV";
    }
    return "?";
}

QualityLevel parse_quality_level(std::string_view text)
{
    if (text == "I")
        return QualityLevel::I;
    if (text == "II")
        return QualityLevel::II;
    if (text == "III")
        return QualityLevel::III;
    if (text == "IV")
        return QualityLevel::IV;
    throw InputError("unknown quality level '" + std::string(text) + "'");
}

double LinearScorer::score(const FeatureVector& f) const
{
    const auto x = f.values();
    double s = bias;
    for (size_t i = 0; i < x.size(); ++i)
        s += weights[i] * x[i];
    return s;
}

LinearScorer LinearScorer::negated() const
{
    LinearScorer out = *this;
    for (auto& w: out.weights)
        w = -w;
    out.bias = -bias;
    return out;
}

double bt_loss(const LinearScorer& scorer, std::span<const PreferencePair> pairs)
{
    if (pairs.empty())
        throw InputError("bt_loss needs at least one pair");
    double total = 0.0;
    for (const auto& p: pairs)
        total -= log_sigmoid(scorer.score(p.better) - scorer.score(p.worse));
    return total / static_cast<double>(pairs.size());
}

std::array<double, FeatureVector::size + 1> bt_loss_gradient(const LinearScorer& scorer,
                                                             std::span<const PreferencePair> pairs)
{
    if (pairs.empty())
        throw InputError("bt_loss_gradient needs at least one pair");
    std::array<double, FeatureVector::size + 1> grad {};
    for (const auto& p: pairs)
    {
        const double margin = scorer.score(p.better) - scorer.score(p.worse);
        // d/dm [-log sigmoid(m)] = -(1 - sigmoid(m)) = -sigmoid(-m)
        const double coeff = -sigmoid(-margin);
        const auto b = p.better.values();
        const auto w = p.worse.values();
        for (size_t i = 0; i < FeatureVector::size; ++i)
            grad[i] += coeff * (b[i] - w[i]);
    }
    for (auto& g: grad)
        g /= static_cast<double>(pairs.size());
    return grad;
}

TrainResult train(std::span<const PreferencePair> pairs, double lr, int steps, std::uint64_t seed)
{
    if (!(lr > 0) || steps <= 0)
        throw InputError("train requires lr > 0 and steps > 0");
    if (pairs.empty())
        throw InputError("train needs at least one pair");

    TrainResult result;
    Rng rng(seed);
    for (auto& w: result.scorer.weights)
        w = rng.normal(0.0, 0.01);

    result.loss_trace.reserve(static_cast<size_t>(steps) + 1);
    for (int step = 0; step < steps; ++step)
    {
        const double loss = bt_loss(result.scorer, pairs);
        if (!std::isfinite(loss))
            throw TrainingError("loss diverged at step " + std::to_string(step));
        result.loss_trace.push_back(loss);
        const auto grad = bt_loss_gradient(result.scorer, pairs);
        for (size_t i = 0; i < FeatureVector::size; ++i)
            result.scorer.weights[i] -= lr * grad[i];
    }
    const double final_loss = bt_loss(result.scorer, pairs);
    if (!std::isfinite(final_loss))
        throw TrainingError("loss diverged after the final step");
    result.loss_trace.push_back(final_loss);
    return result;
}

double pairwise_accuracy(const LinearScorer& scorer, std::span<const PreferencePair> pairs)
{
    if (pairs.empty())
        return 0.0;
    double hits = 0.0;
    for (const auto& p: pairs)
    {
        const double better = scorer.score(p.better);
        const double worse = scorer.score(p.worse);
        if (better > worse)
            hits += 1.0;
        else if (better == worse)
            hits += 0.5;
    }
    return hits / static_cast<double>(pairs.size());
}

NormStats fit_norm_stats(const LinearScorer& scorer, std::span<const FeatureVector> scored_set)
{
    std::vector<double> scores;
    scores.reserve(scored_set.size());
    for (const auto& f: scored_set)
        scores.push_back(scorer.score(f));
    return fit_norm_stats(scores);
}

std::string serialize_model(const RewardModelFile& model)
{
    nlohmann::json j;
    j["weights"] = model.scorer.weights;
    j["bias"] = model.scorer.bias;
    j["feature_names"] = nlohmann::json::array();
    for (auto name: FeatureVector::names)
        j["feature_names"].push_back(std::string(name));
    j["norm_stats"] = { { "mean", model.norm_stats.mean }, { "std", model.norm_stats.std } };
    return j.dump(2) + "\n";
}

RewardModelFile parse_model(std::string_view json_text)
{
    const auto j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("reward model file is not a JSON object");
    try
    {
        RewardModelFile m;
        const auto names = j.at("feature_names").get<std::vector<std::string>>();
        if (names.size() != FeatureVector::size)
            throw ConfigError("reward model feature count mismatch");
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] != FeatureVector::names[i])
                throw ConfigError("reward model feature '" + names[i] + "' does not match '"
                                  + std::string(FeatureVector::names[i]) + "'");
        const auto weights = j.at("weights").get<std::vector<double>>();
        if (weights.size() != FeatureVector::size)
            throw ConfigError("reward model weight count mismatch");
        std::copy(weights.begin(), weights.end(), m.scorer.weights.begin());
        m.scorer.bias = j.at("bias").get<double>();
        m.norm_stats.mean = j.at("norm_stats").at("mean").get<double>();
        m.norm_stats.std = j.at("norm_stats").at("std").get<double>();
        if (!(m.norm_stats.std > 0))
            throw ConfigError("reward model norm_stats.std must be positive");
        return m;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError(std::string("malformed reward model: ") + e.what());
    }
}

} // namespace layoutloop
