// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/geometry.hpp>
#include <layoutloop/layout_doc.hpp>

#include <map>
#include <string>
#include <vector>

namespace layoutloop
{

/// Row-major luminance image, values in [0, 1].
struct LuminanceRaster
{
    int width = 0;
    int height = 0;
    std::vector<double> values;

    LuminanceRaster() = default;
    LuminanceRaster(int w, int h, double fill = 0.0): width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    [[nodiscard]] double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }

    /// Nearest-neighbor resample to the given size.
    [[nodiscard]] LuminanceRaster resized(int w, int h) const;

    bool operator==(const LuminanceRaster&) const = default;
};

/// Font-independent advance widths as multiples of the font size.
struct AdvanceModel
{
    double latin = 0.6;  // Latin letters, digits, punctuation and anything unclassified
    double wide = 1.0;   // CJK ideographs, kana, hangul, fullwidth forms
    double space = 0.3;  // ASCII space and control whitespace

    [[nodiscard]] double factor(char32_t c) const noexcept;
    [[nodiscard]] double advance(char32_t c, double font_size) const noexcept { return factor(c) * font_size; }
};

[[nodiscard]] bool is_wide_character(char32_t c) noexcept;

struct GlyphBox
{
    char32_t character = 0;
    std::string element_id;
    int draw_index = 0;
    double font_size = 0;
    Rect bbox;
    double visible_fraction = 0;
    double occluded_fraction = 0;
    double clipped_fraction = 0;
    double contrast = 0;

    bool operator==(const GlyphBox&) const = default;
};

struct RenderResult
{
    LuminanceRaster raster;
    std::vector<GlyphBox> glyphs;
    std::map<std::string, Rect> element_bboxes; // text elements only
    std::vector<std::string> text_ids;          // text element ids in draw order
    std::vector<std::string> warnings;

    bool operator==(const RenderResult&) const = default;
};

/// Places glyph boxes for every text element; visibility and contrast are left at zero.
[[nodiscard]] std::vector<GlyphBox> layout_glyphs(const LayoutDocument& doc, const AdvanceModel& model = {});

/// Bounding box of one text run under the advance model.
[[nodiscard]] Rect text_bbox(const TextElement& text, const AdvanceModel& model = {});

/// Paints the document over the background in draw order and annotates glyph visibility and contrast.
/// A background of the wrong size is resampled (nearest neighbor) with a warning.
[[nodiscard]] RenderResult render(const LayoutDocument& doc, const LuminanceRaster& background,
                                  const AdvanceModel& model = {});

/// Fraction of total glyph area inside the canvas; 0 when there are no glyphs.
[[nodiscard]] double in_canvas_fraction(const RenderResult& result);

} // namespace layoutloop
