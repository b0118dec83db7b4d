// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/image_io.hpp>
#include <layoutloop/reward.hpp>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <unistd.h>

namespace layoutloop
{

double HeuristicScorer::score_features(const FeatureVector& f) const
{
    return _weights[0] * f.char_f - _weights[1] * f.r_ali - _weights[2] * f.r_ove - _weights[3] * f.r_com_scaled
           + _weights[4] * f.in_canvas_fraction;
}

double HeuristicScorer::raw_score(const ScoringContext& ctx) const
{
    return score_features(ctx.analysis.features);
}

ServiceScorer::ServiceScorer(std::string base_url, std::chrono::milliseconds timeout):
    _baseUrl(std::move(base_url)), _timeout(timeout)
{
    while (!_baseUrl.empty() && _baseUrl.back() == '/')
        _baseUrl.pop_back();
}

double ServiceScorer::raw_score(const ScoringContext& ctx) const
{
    httplib::Client client(_baseUrl);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(_timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(_timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());

    const nlohmann::json body = {
        { "background_path", ctx.background_path },
        { "target_text", ctx.target_text },
        { "svg", ctx.svg },
    };
    const auto res = client.Post("/rm_score", body.dump(), "application/json");
    if (!res)
        throw Error("rm service unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw Error("rm service returned HTTP " + std::to_string(res->status));
    const auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("score") || !reply["score"].is_number())
        throw Error("rm service reply lacks a numeric 'score'");
    const double score = reply["score"].get<double>();
    if (!std::isfinite(score))
        throw Error("rm service returned a non-finite score");
    return score;
}

double normalize_rm(double raw, const NormStats& stats)
{
    if (!(stats.std > 0) || !std::isfinite(stats.std) || !std::isfinite(stats.mean))
        throw ConfigError("normalization std must be positive and finite");
    return (raw - stats.mean) / stats.std;
}

NormStats fit_norm_stats(std::span<const double> scores)
{
    if (scores.empty())
        throw InputError("cannot fit normalization statistics on an empty set");
    double mean = 0.0;
    for (double s: scores)
        mean += s;
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (double s: scores)
        var += (s - mean) * (s - mean);
    var /= static_cast<double>(scores.size());
    return { mean, std::max(std::sqrt(var), 1e-8) };
}

double compose_score(double r_layout_norm, double r_ocr, double r_svg, const RewardConfig& cfg)
{
    return r_layout_norm + cfg.alpha * (r_ocr + r_svg);
}

namespace
{

OcrOutput run_external_ocr(const RenderResult& rendered, const std::string& command, const OcrConfig& cfg)
{
    static std::atomic<unsigned> counter { 0 };
    const auto path = std::filesystem::temp_directory_path()
                      / ("layoutloop-ocr-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".png");
    save_png(rendered.raster, path);
    struct Cleanup
    {
        std::filesystem::path p;
        ~Cleanup()
        {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    } cleanup { path };
    return external_ocr(path, command, cfg.external_timeout);
}

} // namespace

RewardBreakdown score_layout(const LayoutDocument& doc, const LuminanceRaster& background,
                             std::string_view target_text, const LayoutScorer& provider, const ScoreOptions& options)
{
    return score_layout_full(doc, background, target_text, provider, options).breakdown;
}

ScoredLayout score_layout_full(const LayoutDocument& doc, const LuminanceRaster& background,
                               std::string_view target_text, const LayoutScorer& provider, const ScoreOptions& options)
{
    auto rendered = render(doc, background, options.advance);
    auto ocr = options.external_ocr_command ? run_external_ocr(rendered, *options.external_ocr_command, options.ocr)
                                            : pseudo_ocr(rendered, options.ocr);
    ScoredLayout out;
    out.analysis = analyze_layout(doc, background, target_text, options.ocr, options.advance, std::move(rendered),
                                  std::move(ocr));

    const auto& analysis = out.analysis;
    RewardBreakdown& b = out.breakdown;
    b.r_ocr = analysis.ocr_metrics.accuracy;
    b.r_svg = analysis.svg_metrics.accuracy;
    b.char_f = analysis.ocr_metrics.f_measure;
    b.graphic = analysis.graphic;
    b.r_format = 1.0;

    const std::string svg = options.svg.empty() ? serialize_svg(doc) : options.svg;
    const ScoringContext ctx { doc, svg, options.background_path, target_text, analysis };
    try
    {
        b.r_layout_raw = provider.raw_score(ctx);
    }
    catch (const std::exception& e)
    {
        b.r_layout_raw = std::nan("");
        b.r_layout = std::nan("");
        b.r_score = std::nan("");
        throw ProviderError(provider.name() + " scorer failed: " + e.what(), b);
    }
    b.r_layout = normalize_rm(b.r_layout_raw, options.reward.rm_stats);
    b.r_score = compose_score(b.r_layout, b.r_ocr, b.r_svg, options.reward);
    return out;
}

} // namespace layoutloop
