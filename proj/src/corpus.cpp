// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/corpus.hpp>
#include <layoutloop/error.hpp>
#include <layoutloop/image_io.hpp>
#include <layoutloop/rng.hpp>
#include <layoutloop/utf8.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace layoutloop
{

namespace
{

constexpr std::u32string_view cjk_pool = U"设计海报文字布局视觉反馈排版标题活动新品发布会夏日音乐节限时优惠开幕";
constexpr std::string_view syllables[] = { "la", "mo", "ri", "ta", "ven", "so", "kel", "dor", "an", "pre",
                                           "sta", "lu", "nex", "ga", "tor", "mi", "fa", "be", "cor", "ul" };

std::string make_id(int i)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "doc%04d", i);
    return buf;
}

std::u32string random_word(Rng& rng, bool cjk)
{
    std::u32string word;
    if (cjk)
    {
        const auto n = 2 + rng.below(3);
        for (std::uint64_t i = 0; i < n; ++i)
            word += cjk_pool[rng.below(cjk_pool.size())];
        return word;
    }
    const auto n = 1 + rng.below(3);
    for (std::uint64_t i = 0; i < n; ++i)
        word += utf8::decode(syllables[rng.below(std::size(syllables))]);
    if (rng.bernoulli(0.3))
        word[0] = static_cast<char32_t>(word[0] - 'a' + 'A');
    return word;
}

double width_units(std::u32string_view text, const AdvanceModel& model)
{
    double w = 0;
    for (char32_t c: text)
        w += model.factor(c);
    return w;
}

/// Words appended until the line is at least `units` font-size units wide.
std::u32string random_line(Rng& rng, double units, bool cjk, const AdvanceModel& model)
{
    std::u32string line;
    while (line.empty() || width_units(line, model) < units)
    {
        if (!line.empty() && !cjk)
            line += U' ';
        line += random_word(rng, cjk);
    }
    return line;
}

// Backgrounds are stored as 8-bit PGM; generating them on that grid keeps reloads exact.
double quantize(double v)
{
    return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

ImageElement background_element(const Canvas& canvas)
{
    ImageElement img;
    img.href = std::string(background_href);
    img.w = canvas.width;
    img.h = canvas.height;
    return img;
}

} // namespace

std::vector<CorpusDocument> synth_corpus(int count, std::uint64_t seed)
{
    const AdvanceModel model;
    std::vector<CorpusDocument> docs;
    docs.reserve(static_cast<size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i)
    {
        CorpusDocument d;
        d.id = make_id(i);
        Rng rng(derive_seed(seed, d.id));

        const Canvas canvas { 200 + 8 * static_cast<int>(rng.below(16)), 150 + 6 * static_cast<int>(rng.below(16)) };
        d.doc.canvas = canvas;
        const double split_x = std::round(canvas.width * rng.uniform(0.72, 0.8));
        const double band_y = std::round(canvas.height * rng.uniform(0.8, 0.86));

        // Light panel with a gentle vertical gradient; textured strip on the right; dark band below.
        LuminanceRaster bg(canvas.width, canvas.height);
        const double base = rng.uniform(0.8, 0.88);
        std::vector<double> blocks((canvas.width / 3 + 1) * (canvas.height / 3 + 1));
        for (auto& b: blocks)
            b = rng.uniform(0.0, 0.2);
        for (int y = 0; y < canvas.height; ++y)
            for (int x = 0; x < canvas.width; ++x)
            {
                double v;
                if (y >= band_y)
                    v = 0.12 + 0.06 * blocks[(y / 3) * (canvas.width / 3 + 1) + x / 3];
                else if (x >= split_x)
                    v = blocks[(y / 3) * (canvas.width / 3 + 1) + x / 3];
                else
                    v = base + 0.1 * y / canvas.height;
                bg.at(x, y) = quantize(v);
            }
        d.background = std::move(bg);
        d.doc.elements.emplace_back(background_element(canvas));

        // Text column: the longest line ends just short of the textured strip, the last baseline sits
        // just above the dark band.
        const double x0 = std::round(canvas.width * rng.uniform(0.05, 0.08));
        const double right = split_x - canvas.width * rng.uniform(0.0, 0.006);
        const int lines = 2 + static_cast<int>(rng.below(3));
        const int longest = static_cast<int>(rng.below(static_cast<std::uint64_t>(lines)));

        std::vector<TextElement> column;
        double baseline = band_y - canvas.height * rng.uniform(0.005, 0.02);
        for (int k = lines - 1; k >= 0; --k)
        {
            TextElement t;
            t.id = "t" + std::to_string(k);
            t.x = x0;
            t.fill = Color { 0, 0, 0 };
            const bool cjk = rng.bernoulli(0.25);
            const double fs = rng.uniform(12.0, 20.0);
            const double full = (right - x0) / fs;
            std::u32string line;
            // The longest line, and a third of the others, run right up to the panel edge.
            if (k == longest || rng.bernoulli(0.35))
            {
                line = random_line(rng, full, cjk, model);
                t.font_size = (right - x0) / width_units(line, model);
            }
            else
            {
                line = random_line(rng, full * rng.uniform(0.4, 0.75), cjk, model);
                t.font_size = std::min(fs, (right - x0) / width_units(line, model));
            }
            t.content = utf8::encode(line);
            t.y = baseline;
            if (baseline - t.font_size < canvas.height * 0.06)
                break; // column is full
            baseline -= t.font_size * 1.35;
            column.push_back(std::move(t));
        }
        std::reverse(column.begin(), column.end());
        std::string target;
        for (auto& t: column)
        {
            if (!target.empty())
                target += '\n';
            target += t.content;
            d.doc.elements.emplace_back(std::move(t));
        }
        d.doc.renumber();
        d.target_text = std::move(target);
        d.background_path = d.id + ".pgm";
        docs.push_back(std::move(d));
    }
    return docs;
}

std::vector<CorpusDocument> crafted_fixer_corpus(int count, std::uint64_t seed)
{
    const AdvanceModel model;
    std::vector<CorpusDocument> docs;
    docs.reserve(static_cast<size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i)
    {
        CorpusDocument d;
        d.id = "fix" + make_id(i).substr(3);
        Rng rng(derive_seed(seed, d.id));

        const Canvas canvas { 240 + 10 * static_cast<int>(rng.below(9)), 180 + 10 * static_cast<int>(rng.below(7)) };
        d.doc.canvas = canvas;
        LuminanceRaster bg(canvas.width, canvas.height);
        const double base = rng.uniform(0.82, 0.9);
        for (int y = 0; y < canvas.height; ++y)
            for (int x = 0; x < canvas.width; ++x)
                bg.at(x, y) = quantize(base + 0.08 * x / canvas.width);
        d.background = std::move(bg);
        d.doc.elements.emplace_back(background_element(canvas));

        const double x0 = std::round(canvas.width * 0.08);
        std::vector<TextElement> texts(3);
        const double fs_title = rng.uniform(18.0, 24.0);
        const double fs_body = rng.uniform(12.0, 16.0);

        // Title, comfortably inside.
        texts[0].content = utf8::encode(random_line(rng, canvas.width * 0.5 / fs_title, false, model));
        texts[0].font_size = fs_title;
        texts[0].x = x0;
        texts[0].y = std::round(canvas.height * 0.25);

        // Body line running off the right edge by 15-40% of its width.
        auto body = random_line(rng, canvas.width * 0.6 / fs_body, rng.bernoulli(0.3), model);
        const double body_w = width_units(body, model) * fs_body;
        texts[1].content = utf8::encode(body);
        texts[1].font_size = fs_body;
        texts[1].x = canvas.width - body_w * (1.0 - rng.uniform(0.15, 0.4));
        texts[1].y = std::round(canvas.height * 0.55);

        // Caption overlapping the title's lower half.
        texts[2].content = utf8::encode(random_line(rng, canvas.width * 0.35 / fs_body, false, model));
        texts[2].font_size = fs_body;
        texts[2].x = x0 + rng.uniform(0.0, canvas.width * 0.1);
        texts[2].y = texts[0].y + fs_body * rng.uniform(0.3, 0.7);

        std::string target;
        for (size_t k = 0; k < texts.size(); ++k)
        {
            texts[k].id = "t" + std::to_string(k);
            if (!target.empty())
                target += '\n';
            target += texts[k].content;
            d.doc.elements.emplace_back(std::move(texts[k]));
        }
        d.doc.renumber();
        d.target_text = std::move(target);
        d.background_path = d.id + ".pgm";
        docs.push_back(std::move(d));
    }
    return docs;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw IoError("write failed for '" + path.string() + "'");
}

void write_corpus(std::vector<CorpusDocument>& docs, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (auto& d: docs)
    {
        write_file(dir / (d.id + ".svg"), serialize_svg(d.doc));
        write_file(dir / (d.id + ".txt"), d.target_text);
        const auto bg = dir / (d.id + ".pgm");
        save_pgm(d.background, bg);
        d.background_path = bg.string();
    }
}

CorpusDocument load_document(const std::filesystem::path& svg_path)
{
    CorpusDocument d;
    d.id = svg_path.stem().string();
    d.doc = parse_svg(read_file(svg_path)).document;
    auto txt = svg_path;
    txt.replace_extension(".txt");
    if (std::filesystem::exists(txt))
        d.target_text = read_file(txt);
    else
    {
        for (const auto& s: extract_text(d.doc))
        {
            if (!d.target_text.empty())
                d.target_text += '\n';
            d.target_text += s;
        }
    }
    for (const char* ext: { ".png", ".pgm" })
    {
        auto bg = svg_path;
        bg.replace_extension(ext);
        if (std::filesystem::exists(bg))
        {
            d.background = load_image(bg);
            d.background_path = bg.string();
            break;
        }
    }
    if (d.background_path.empty())
        d.background = LuminanceRaster(d.doc.canvas.width, d.doc.canvas.height, 1.0);
    return d;
}

std::vector<CorpusDocument> load_corpus(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw IoError("'" + dir.string() + "' is not a directory");
    std::vector<std::filesystem::path> svgs;
    for (const auto& entry: std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".svg")
            svgs.push_back(entry.path());
    std::sort(svgs.begin(), svgs.end());
    std::vector<CorpusDocument> docs;
    docs.reserve(svgs.size());
    for (const auto& p: svgs)
        docs.push_back(load_document(p));
    return docs;
}

} // namespace layoutloop
