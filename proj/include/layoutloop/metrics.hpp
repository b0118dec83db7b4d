// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/raster.hpp>

#include <string>
#include <vector>

namespace layoutloop
{

/// Graphic quality metrics; lower is better for all three.
struct GraphicMetrics
{
    double r_ali = 0; // mean normalized distance to the nearest alignment line
    double r_ove = 0; // mean directed text-text overlap ratio
    double r_com = 0; // mean background Sobel magnitude under text, 0-255 scale
    std::vector<std::string> flags;
};

/// For each non-empty text box, the smallest of six edge/center offsets (left, x-center, right,
/// top, y-center, bottom) to any other text box, normalized by the canvas dimension; averaged.
/// Zero for fewer than two boxes.
[[nodiscard]] double r_ali(const LayoutDocument& doc, const AdvanceModel& model = {});

/// Mean over ordered pairs (i, j), i != j, of area(b_i ∩ b_j) / area(b_i).
/// A zero-area box contributes 0 and is reported through `flags`.
[[nodiscard]] double r_ove(const LayoutDocument& doc, const AdvanceModel& model = {},
                           std::vector<std::string>* flags = nullptr);

/// Mean Sobel gradient magnitude of the background (scaled to 0-255) over pixels whose centers
/// lie in the union of text boxes clipped to the canvas. Zero (flagged) if that region is empty.
[[nodiscard]] double r_com(const LayoutDocument& doc, const RenderResult& render, const LuminanceRaster& background,
                           std::vector<std::string>* flags = nullptr);

/// Per-pixel Sobel magnitude, 3x3 kernel normalized by 1/8, replicate border; same units as input.
[[nodiscard]] LuminanceRaster sobel_magnitude(const LuminanceRaster& raster);

[[nodiscard]] GraphicMetrics graphic_metrics(const LayoutDocument& doc, const RenderResult& render,
                                             const LuminanceRaster& background, const AdvanceModel& model = {});

} // namespace layoutloop
