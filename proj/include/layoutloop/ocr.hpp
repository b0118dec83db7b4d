// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/raster.hpp>

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace layoutloop
{

enum class OcrEngine
{
    Oracle,
    External,
};

struct OcrOutput
{
    std::vector<std::string> recognized;
    OcrEngine engine = OcrEngine::Oracle;

    /// Recognized strings concatenated in order.
    [[nodiscard]] std::string joined() const;
};

/// Legibility thresholds for the oracle and whitespace handling for the metrics.
struct OcrConfig
{
    double min_visible_fraction = 0.5;
    double min_contrast = 0.25;
    double min_font_size = 6.0;
    bool strip_whitespace = true;
    std::chrono::milliseconds external_timeout { 30'000 };
};

struct CharMetrics
{
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double precision = 0;
    double recall = 0;
    double f_measure = 0;
    double accuracy = 0;
};

/// Oracle OCR: a glyph is read iff it is visible enough, contrasted enough and large enough.
/// Output has one string per text element in draw order.
[[nodiscard]] OcrOutput pseudo_ocr(const RenderResult& result, const OcrConfig& cfg = {});

/// Character multiset matching: TP = sum over c of min(count_rec(c), count_ann(c)).
[[nodiscard]] CharMetrics char_metrics(std::string_view recognized, std::string_view annotation,
                                       bool strip_whitespace = true);

/// Runs an OCR command; `{input}` in the template is replaced by the shell-quoted image path.
/// Each stdout line is one recognized string.
[[nodiscard]] OcrOutput external_ocr(const std::filesystem::path& raster_path, const std::string& command_template,
                                     std::chrono::milliseconds timeout = std::chrono::seconds(30));

} // namespace layoutloop
