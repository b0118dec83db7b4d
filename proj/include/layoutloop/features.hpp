// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/metrics.hpp>
#include <layoutloop/ocr.hpp>

#include <array>
#include <string_view>

namespace layoutloop
{

/// Metric features a layout scorer consumes. r_com_scaled = r_com / 30.
struct FeatureVector
{
    static constexpr size_t size = 6;
    static constexpr std::array<std::string_view, size> names { "char_f",       "r_ali",
                                                                "r_ove",        "r_com_scaled",
                                                                "in_canvas_fraction", "text_coverage" };

    double char_f = 0;
    double r_ali = 0;
    double r_ove = 0;
    double r_com_scaled = 0;
    double in_canvas_fraction = 0;
    double text_coverage = 0;

    [[nodiscard]] std::array<double, size> values() const
    {
        return { char_f, r_ali, r_ove, r_com_scaled, in_canvas_fraction, text_coverage };
    }
    [[nodiscard]] static FeatureVector from_values(const std::array<double, size>& v)
    {
        return { v[0], v[1], v[2], v[3], v[4], v[5] };
    }

    bool operator==(const FeatureVector&) const = default;
};

inline constexpr double r_com_feature_scale = 30.0;

/// Everything a scorer may look at for one rendered layout.
struct LayoutAnalysis
{
    RenderResult render;
    OcrOutput ocr;
    GraphicMetrics graphic;
    CharMetrics ocr_metrics; // OCR text vs target
    CharMetrics svg_metrics; // SVG strings vs target
    FeatureVector features;
};

/// Renders, runs the oracle OCR and computes metrics and features against the target text.
[[nodiscard]] LayoutAnalysis analyze_layout(const LayoutDocument& doc, const LuminanceRaster& background,
                                            std::string_view target_text, const OcrConfig& ocr_cfg = {},
                                            const AdvanceModel& model = {});

/// Same, with OCR output supplied by the caller (e.g. an external engine).
[[nodiscard]] LayoutAnalysis analyze_layout(const LayoutDocument& doc, const LuminanceRaster& background,
                                            std::string_view target_text, const OcrConfig& ocr_cfg,
                                            const AdvanceModel& model, RenderResult render, OcrOutput ocr);

} // namespace layoutloop
