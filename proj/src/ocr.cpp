// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/error.hpp>
#include <layoutloop/ocr.hpp>
#include <layoutloop/subprocess.hpp>
#include <layoutloop/utf8.hpp>

#include <unordered_map>

namespace layoutloop
{

std::string OcrOutput::joined() const
{
    std::string out;
    for (const auto& s: recognized)
        out += s;
    return out;
}

OcrOutput pseudo_ocr(const RenderResult& result, const OcrConfig& cfg)
{
    OcrOutput out;
    out.engine = OcrEngine::Oracle;
    out.recognized.resize(result.text_ids.size());

    std::unordered_map<std::string_view, size_t> slot;
    for (size_t i = 0; i < result.text_ids.size(); ++i)
        slot.emplace(result.text_ids[i], i);

    for (const auto& g: result.glyphs)
    {
        if (g.visible_fraction < cfg.min_visible_fraction || g.contrast < cfg.min_contrast
            || g.font_size < cfg.min_font_size)
            continue;
        const auto it = slot.find(g.element_id);
        if (it != slot.end())
            out.recognized[it->second] += utf8::encode(g.character);
    }
    return out;
}

CharMetrics char_metrics(std::string_view recognized, std::string_view annotation, bool strip_whitespace)
{
    std::unordered_map<char32_t, long> annotated;
    long annotationSize = 0;
    for (char32_t c: utf8::decode(annotation))
    {
        if (strip_whitespace && utf8::is_whitespace(c))
            continue;
        ++annotated[c];
        ++annotationSize;
    }

    CharMetrics m;
    long recognizedSize = 0;
    for (char32_t c: utf8::decode(recognized))
    {
        if (strip_whitespace && utf8::is_whitespace(c))
            continue;
        ++recognizedSize;
        auto it = annotated.find(c);
        if (it != annotated.end() && it->second > 0)
        {
            --it->second;
            ++m.tp;
        }
    }
    m.fp = recognizedSize - m.tp;
    m.fn = annotationSize - m.tp;

    if (m.tp + m.fp > 0)
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    else
        m.precision = m.fn == 0 ? 1.0 : 0.0;
    if (m.tp + m.fn > 0)
        m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    else
        m.recall = m.fp == 0 ? 1.0 : 0.0;
    m.f_measure =
        m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    const long total = m.tp + m.fp + m.fn;
    m.accuracy = total > 0 ? static_cast<double>(m.tp) / static_cast<double>(total) : 1.0;
    return m;
}

OcrOutput external_ocr(const std::filesystem::path& raster_path, const std::string& command_template,
                       std::chrono::milliseconds timeout)
{
    const std::string placeholder = "{input}";
    const auto at = command_template.find(placeholder);
    if (at == std::string::npos)
        throw ConfigError("OCR command template lacks the {input} placeholder");

    std::string command = command_template;
    const std::string quoted = shell_quote(raster_path.string());
    for (auto pos = command.find(placeholder); pos != std::string::npos;
         pos = command.find(placeholder, pos + quoted.size()))
        command.replace(pos, placeholder.size(), quoted);

    const auto proc = run_shell(command, {}, timeout);
    if (proc.exit_code != 0)
        throw ExternalToolError("OCR command exited with status " + std::to_string(proc.exit_code) + ": "
                                + proc.err.substr(0, 500));

    OcrOutput out;
    out.engine = OcrEngine::External;
    size_t start = 0;
    while (start < proc.out.size())
    {
        auto end = proc.out.find('\n', start);
        if (end == std::string::npos)
            end = proc.out.size();
        auto line = proc.out.substr(start, end - start);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        out.recognized.push_back(utf8::encode(utf8::decode(line)));
        start = end + 1;
    }
    return out;
}

} // namespace layoutloop
