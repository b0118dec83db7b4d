// SPDX-License-Identifier: Apache-2.0
// Test helpers and brute-force reference implementations. The references deliberately avoid the
// library's own geometry and counting code.
#pragma once

#include <layoutloop/advantage.hpp>
#include <layoutloop/corpus.hpp>
#include <layoutloop/layout_doc.hpp>
#include <layoutloop/raster.hpp>
#include <layoutloop/rmlite.hpp>
#include <layoutloop/rng.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

namespace testing_support
{

namespace fs = std::filesystem;
using namespace layoutloop;

inline fs::path fixture(const std::string& name)
{
    return fs::path(LAYOUTLOOP_FIXTURES) / name;
}

inline std::string fixture_text(const std::string& name)
{
    return read_file(fixture(name));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
  public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        _path = fs::temp_directory_path()
                / ("layoutloop-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(_path);
        fs::create_directories(_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const fs::path& path() const { return _path; }
    [[nodiscard]] fs::path operator/(const std::string& name) const { return _path / name; }

  private:
    fs::path _path;
};

// ---------------------------------------------------------------------------------------------
// Character counting reference

/// Minimal UTF-8 decoder for well-formed input.
inline std::vector<std::uint32_t> decode_codepoints(const std::string& s)
{
    std::vector<std::uint32_t> out;
    for (size_t i = 0; i < s.size();)
    {
        const auto b = static_cast<unsigned char>(s[i]);
        int len = b < 0x80 ? 1 : b < 0xE0 ? 2 : b < 0xF0 ? 3 : 4;
        std::uint32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
        for (int k = 1; k < len; ++k)
            cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline bool reference_space(std::uint32_t c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0 || c == 0x3000;
}

struct ReferenceCounts
{
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double precision = 0;
    double recall = 0;
    double f_measure = 0;
    double accuracy = 0;
};

/// Greedy one-to-one matching: each recognized character consumes one unused equal annotation character.
inline ReferenceCounts reference_char_metrics(const std::string& recognized, const std::string& annotation,
                                              bool strip = true)
{
    auto rec = decode_codepoints(recognized);
    auto ann = decode_codepoints(annotation);
    if (strip)
    {
        std::erase_if(rec, reference_space);
        std::erase_if(ann, reference_space);
    }
    std::vector<bool> used(ann.size(), false);
    ReferenceCounts r;
    for (auto c: rec)
    {
        for (size_t j = 0; j < ann.size(); ++j)
        {
            if (!used[j] && ann[j] == c)
            {
                used[j] = true;
                ++r.tp;
                break;
            }
        }
    }
    r.fp = static_cast<long>(rec.size()) - r.tp;
    r.fn = static_cast<long>(ann.size()) - r.tp;
    r.precision = (r.tp + r.fp) == 0 ? (r.fn == 0 ? 1.0 : 0.0) : static_cast<double>(r.tp) / (r.tp + r.fp);
    r.recall = (r.tp + r.fn) == 0 ? (r.fp == 0 ? 1.0 : 0.0) : static_cast<double>(r.tp) / (r.tp + r.fn);
    r.f_measure = (r.precision + r.recall) == 0 ? 0.0 : 2 * r.precision * r.recall / (r.precision + r.recall);
    const long denom = r.tp + r.fp + r.fn;
    r.accuracy = denom == 0 ? 1.0 : static_cast<double>(r.tp) / denom;
    return r;
}

/// Up to `max_len` code points from a small mixed Latin/CJK alphabet (with spaces), so that
/// repeated characters are common.
inline std::string random_mixed_string(Rng& rng, int max_len = 40)
{
    static const char* alphabet[] = { "A", "B", "C", "a", "b", "z", "0", "7", ".", " ", "中", "文", "字", "日", "の", "한", "\u3000" };
    static constexpr size_t alphabet_size = sizeof(alphabet) / sizeof(alphabet[0]);
    const auto len = rng.below(static_cast<std::uint64_t>(max_len) + 1);
    std::string out;
    for (std::uint64_t i = 0; i < len; ++i)
        out += alphabet[rng.below(alphabet_size)];
    return out;
}

// ---------------------------------------------------------------------------------------------
// Geometry reference on a quarter-pixel lattice

struct Box
{
    double x0, y0, x1, y1;
};

inline double reference_factor(std::uint32_t c)
{
    if (c == ' ')
        return 0.3;
    if (c < 0x80)
        return 0.6;
    return 1.0; // only CJK ideographs are generated
}

inline Box reference_box(const TextElement& t)
{
    double w = 0;
    for (auto c: decode_codepoints(t.content))
        w += reference_factor(c) * t.font_size;
    double x = t.x;
    if (t.anchor == TextAnchor::Middle)
        x -= w / 2;
    else if (t.anchor == TextAnchor::End)
        x -= w;
    return { x, t.y - t.font_size, x + w, t.y };
}

/// Area of the intersection counted cell by cell on a 0.25 px lattice. Exact when every coordinate
/// is a multiple of 0.25, which the random documents below guarantee.
inline double lattice_overlap(const Box& a, const Box& b)
{
    const double lo_x = std::floor(std::min(a.x0, b.x0) * 4), hi_x = std::ceil(std::max(a.x1, b.x1) * 4);
    const double lo_y = std::floor(std::min(a.y0, b.y0) * 4), hi_y = std::ceil(std::max(a.y1, b.y1) * 4);
    long cells = 0;
    for (double gy = lo_y; gy < hi_y; ++gy)
    {
        const double cy = (gy + 0.5) / 4;
        if (!(cy > a.y0 && cy < a.y1 && cy > b.y0 && cy < b.y1))
            continue;
        for (double gx = lo_x; gx < hi_x; ++gx)
        {
            const double cx = (gx + 0.5) / 4;
            if (cx > a.x0 && cx < a.x1 && cx > b.x0 && cx < b.x1)
                ++cells;
        }
    }
    return cells / 16.0;
}

inline double lattice_area(const Box& a)
{
    return lattice_overlap(a, a);
}

inline std::vector<Box> reference_text_boxes(const LayoutDocument& doc, bool skip_empty)
{
    std::vector<Box> out;
    for (const auto& el: doc.elements)
        if (const auto* t = std::get_if<TextElement>(&el))
            if (!skip_empty || !t->content.empty())
                out.push_back(reference_box(*t));
    return out;
}

inline double reference_r_ove(const LayoutDocument& doc)
{
    const auto boxes = reference_text_boxes(doc, false);
    const size_t n = boxes.size();
    if (n < 2)
        return 0;
    double sum = 0;
    for (size_t i = 0; i < n; ++i)
    {
        const double ai = lattice_area(boxes[i]);
        if (ai == 0)
            continue;
        for (size_t j = 0; j < n; ++j)
            if (j != i)
                sum += lattice_overlap(boxes[i], boxes[j]) / ai;
    }
    return sum / static_cast<double>(n * (n - 1));
}

inline double reference_r_ali(const LayoutDocument& doc)
{
    const auto boxes = reference_text_boxes(doc, true);
    if (boxes.size() < 2)
        return 0;
    const double w = doc.canvas.width, h = doc.canvas.height;
    double sum = 0;
    for (size_t i = 0; i < boxes.size(); ++i)
    {
        const auto& a = boxes[i];
        const std::array<double, 3> ax { a.x0, (a.x0 + a.x1) / 2, a.x1 };
        const std::array<double, 3> ay { a.y0, (a.y0 + a.y1) / 2, a.y1 };
        double best = 1e300;
        for (size_t j = 0; j < boxes.size(); ++j)
        {
            if (j == i)
                continue;
            const auto& b = boxes[j];
            const std::array<double, 3> bx { b.x0, (b.x0 + b.x1) / 2, b.x1 };
            const std::array<double, 3> by { b.y0, (b.y0 + b.y1) / 2, b.y1 };
            for (int k = 0; k < 3; ++k)
            {
                best = std::min(best, std::fabs(ax[k] - bx[k]) / w);
                best = std::min(best, std::fabs(ay[k] - by[k]) / h);
            }
        }
        sum += best;
    }
    return sum / static_cast<double>(boxes.size());
}

/// Direct 3x3 convolution with explicit kernels, edge pixels replicated.
inline std::vector<double> reference_sobel(const LuminanceRaster& img)
{
    static constexpr int kx[3][3] = { { -1, 0, 1 }, { -2, 0, 2 }, { -1, 0, 1 } };
    static constexpr int ky[3][3] = { { -1, -2, -1 }, { 0, 0, 0 }, { 1, 2, 1 } };
    std::vector<double> out(img.values.size());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
        {
            double gx = 0, gy = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                {
                    const int sx = std::min(std::max(x + dx, 0), img.width - 1);
                    const int sy = std::min(std::max(y + dy, 0), img.height - 1);
                    const double v = img.values[sy * img.width + sx];
                    gx += kx[dy + 1][dx + 1] * v;
                    gy += ky[dy + 1][dx + 1] * v;
                }
            out[y * img.width + x] = std::hypot(gx / 8, gy / 8);
        }
    return out;
}

/// Mean of the Sobel magnitude (0-255) over pixels whose centers fall inside any text box.
inline double reference_r_com(const LayoutDocument& doc, const LuminanceRaster& background)
{
    const auto boxes = reference_text_boxes(doc, true);
    const auto grad = reference_sobel(background);
    double sum = 0;
    long count = 0;
    for (int y = 0; y < background.height; ++y)
        for (int x = 0; x < background.width; ++x)
        {
            const double cx = x + 0.5, cy = y + 0.5;
            const bool inside = std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) {
                return cx >= b.x0 && cx < b.x1 && cy >= b.y0 && cy < b.y1;
            });
            if (inside)
            {
                sum += grad[y * background.width + x];
                ++count;
            }
        }
    return count == 0 ? 0.0 : 255.0 * sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------------------------
// Synthetic preference pairs

/// Pairs labelled by a known linear scorer: the side with the larger w.x + N(0, noise) margin wins.
inline std::vector<PreferencePair> synthetic_pairs(Rng& rng, int count, const LinearScorer& truth, double noise)
{
    std::vector<PreferencePair> pairs;
    pairs.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
    {
        std::array<double, FeatureVector::size> a {}, b {};
        for (auto& v: a)
            v = rng.normal();
        for (auto& v: b)
            v = rng.normal();
        auto fa = FeatureVector::from_values(a);
        auto fb = FeatureVector::from_values(b);
        const double margin = truth.score(fa) - truth.score(fb) + rng.normal(0.0, noise);
        if (margin < 0)
            std::swap(fa, fb);
        PreferencePair p;
        p.query_id = "s" + std::to_string(i);
        p.better = fa;
        p.worse = fb;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

inline LinearScorer reference_truth()
{
    LinearScorer s;
    s.weights = { 1.5, -0.8, -1.2, -0.5, 0.9, 0.3 };
    return s;
}

// ---------------------------------------------------------------------------------------------
// Random small documents

struct SmallCase
{
    LayoutDocument doc;
    LuminanceRaster background;
};

/// Canvas up to 32x32, 0-5 texts with quarter-pixel-aligned boxes (font sizes multiples of 5 px,
/// integer anchors), some hanging off the canvas, some exactly aligned copies.
inline SmallCase random_small_case(Rng& rng)
{
    SmallCase c;
    const int w = 8 + static_cast<int>(rng.below(25));
    const int h = 8 + static_cast<int>(rng.below(25));
    c.doc.canvas = { w, h };
    c.background = LuminanceRaster(w, h);
    const bool flat = rng.bernoulli(0.1);
    for (auto& v: c.background.values)
        v = flat ? 0.5 : static_cast<double>(rng.below(256)) / 255.0;

    static const char* latin = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789.,!?";
    static const char* cjk[] = { "中", "文", "字", "海", "报", "夏", "日" };
    const int n = static_cast<int>(rng.below(6));
    for (int i = 0; i < n; ++i)
    {
        TextElement t;
        t.id = "t" + std::to_string(i);
        if (i > 0 && rng.bernoulli(0.15))
        {
            // exact copy shifted on one axis keeps an alignment line in common
            const auto& prev = std::get<TextElement>(c.doc.elements[rng.below(i)]);
            t = prev;
            t.id = "t" + std::to_string(i);
            if (rng.bernoulli(0.5))
                t.y += static_cast<double>(rng.below(10));
            else
                t.x += static_cast<double>(rng.below(10));
        }
        else
        {
            const int len = static_cast<int>(rng.below(6)); // empty runs included
            for (int k = 0; k < len; ++k)
            {
                const double u = rng.uniform();
                if (u < 0.15)
                    t.content += ' ';
                else if (u < 0.3)
                    t.content += cjk[rng.below(7)];
                else
                    t.content += latin[rng.below(66)];
            }
            t.font_size = 5.0 * static_cast<double>(1 + rng.below(3));
            t.x = static_cast<double>(static_cast<int>(rng.below(w + 10)) - 5);
            t.y = static_cast<double>(static_cast<int>(rng.below(h + 10)) - 2);
            const auto a = rng.below(3);
            t.anchor = a == 0 ? TextAnchor::Start : a == 1 ? TextAnchor::Middle : TextAnchor::End;
        }
        t.degenerate = t.content.empty();
        c.doc.elements.emplace_back(std::move(t));
    }
    c.doc.renumber();
    return c;
}

// ---------------------------------------------------------------------------------------------
// Rollout batches and advantage references

/// Groups of 1-8 rollouts with 1-5 rounds each; scores on a coarse grid so ties happen.
inline std::vector<RolloutGroup> random_groups(Rng& rng, int n_max = 4)
{
    std::vector<RolloutGroup> groups(1 + rng.below(4));
    for (size_t g = 0; g < groups.size(); ++g)
    {
        groups[g].query_id = "q" + std::to_string(g);
        groups[g].rollouts.resize(1 + rng.below(8));
        for (auto& r: groups[g].rollouts)
        {
            r.query_id = groups[g].query_id;
            r.rounds.resize(1 + rng.below(static_cast<std::uint64_t>(n_max) + 1));
            for (auto& round: r.rounds)
                round.r_score = static_cast<double>(static_cast<int>(rng.below(41)) - 20) / 8.0;
            r.final_r_score = r.rounds.back().r_score;
            r.tool_call_count = std::min(static_cast<int>(r.rounds.size()), n_max);
            r.r_format = rng.bernoulli(0.8) ? 1.0 : -1.0;
        }
    }
    return groups;
}

/// Outcome raw advantages written straight from the definition, group by group.
inline std::vector<double> reference_outcome_raw(const std::vector<RolloutGroup>& groups, double gamma)
{
    std::vector<double> out;
    for (const auto& g: groups)
    {
        double sum = 0;
        for (const auto& r: g.rollouts)
            sum += r.final_r_score;
        for (const auto& r: g.rollouts)
            out.push_back(r.final_r_score - sum / static_cast<double>(g.rollouts.size()) + gamma * r.r_format);
    }
    return out;
}

/// Per-round raw values: first round against the group's first-round mean, middle rounds against
/// the best strictly earlier round, last round 2 (answer + length).
inline std::vector<double> reference_process_raw(const std::vector<RolloutGroup>& groups, int n_max)
{
    std::vector<double> out;
    for (const auto& g: groups)
    {
        double first_sum = 0;
        double best_final = g.rollouts.front().rounds.back().r_score;
        for (const auto& r: g.rollouts)
        {
            first_sum += r.rounds.front().r_score;
            best_final = std::max(best_final, r.rounds.back().r_score);
        }
        const double first_mean = first_sum / static_cast<double>(g.rollouts.size());
        for (const auto& r: g.rollouts)
        {
            const size_t n = r.rounds.size();
            for (size_t i = 0; i < n; ++i)
            {
                const double x = r.rounds[i].r_score;
                double prior = 0;
                for (size_t k = 0; k < i; ++k)
                    prior = k == 0 ? r.rounds[k].r_score : std::max(prior, r.rounds[k].r_score);
                if (i == n - 1)
                {
                    const double answer = (i == 0 || x >= prior) ? 0.7 : x - prior;
                    const int remaining = n_max - r.tool_call_count > 0 ? n_max - r.tool_call_count : 0;
                    const double length = -2.0 * ((x - best_final) * remaining);
                    out.push_back(2.0 * (answer + length));
                }
                else if (i == 0)
                    out.push_back(x - first_mean);
                else
                    out.push_back(2.0 * (x - prior));
            }
        }
    }
    return out;
}

/// Two-pass mean and population standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& xs)
{
    double m = 0;
    for (double x: xs)
        m += x;
    m /= static_cast<double>(xs.size());
    double v = 0;
    for (double x: xs)
        v += (x - m) * (x - m);
    return { m, std::sqrt(v / static_cast<double>(xs.size())) };
}

} // namespace testing_support
