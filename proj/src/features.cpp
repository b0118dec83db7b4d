// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/features.hpp>

namespace layoutloop
{

LayoutAnalysis analyze_layout(const LayoutDocument& doc, const LuminanceRaster& background,
                              std::string_view target_text, const OcrConfig& ocr_cfg, const AdvanceModel& model)
{
    auto rendered = render(doc, background, model);
    auto ocr = pseudo_ocr(rendered, ocr_cfg);
    return analyze_layout(doc, background, target_text, ocr_cfg, model, std::move(rendered), std::move(ocr));
}

LayoutAnalysis analyze_layout(const LayoutDocument& doc, const LuminanceRaster& background,
                              std::string_view target_text, const OcrConfig& ocr_cfg, const AdvanceModel& model,
                              RenderResult rendered, OcrOutput ocr)
{
    LayoutAnalysis a;
    a.render = std::move(rendered);
    a.ocr = std::move(ocr);
    a.graphic = graphic_metrics(doc, a.render, background, model);
    a.ocr_metrics = char_metrics(a.ocr.joined(), target_text, ocr_cfg.strip_whitespace);

    std::string svgText;
    for (const auto& s: extract_text(doc))
        svgText += s;
    a.svg_metrics = char_metrics(svgText, target_text, ocr_cfg.strip_whitespace);

    a.features.char_f = a.ocr_metrics.f_measure;
    a.features.r_ali = a.graphic.r_ali;
    a.features.r_ove = a.graphic.r_ove;
    a.features.r_com_scaled = a.graphic.r_com / r_com_feature_scale;
    a.features.in_canvas_fraction = in_canvas_fraction(a.render);
    a.features.text_coverage = a.svg_metrics.recall;
    return a;
}

} // namespace layoutloop
