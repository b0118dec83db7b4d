// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <layoutloop/corpus.hpp>
#include <layoutloop/error.hpp>
#include <layoutloop/features.hpp>
#include <layoutloop/perturb.hpp>

#include <doctest.h>

#include <set>

using namespace layoutloop;
using namespace testing_support;

namespace
{

LayoutDocument one_text_at(double x, double y)
{
    LayoutDocument d;
    d.canvas = { 100, 100 };
    TextElement t;
    t.id = "t";
    t.content = "Hi";
    t.x = x;
    t.y = y;
    t.font_size = 12;
    d.elements.emplace_back(t);
    d.renumber();
    return d;
}

const TextElement& first_text(const LayoutDocument& d)
{
    return *d.texts().front();
}

std::map<QualityLevel, std::string> level_svgs(const LevelSet& levels)
{
    return { { QualityLevel::I, serialize_svg(levels[0]) },
             { QualityLevel::II, serialize_svg(levels[1]) },
             { QualityLevel::III, serialize_svg(levels[2]) },
             { QualityLevel::IV, serialize_svg(levels[3]) } };
}

} // namespace

TEST_CASE("zero offset range leaves the document unchanged")
{
    PerturbConfig cfg;
    cfg.l3_offset_frac = 0;
    const auto doc = parse_svg(fixture_text("poster.svg")).document;
    Rng rng(1);
    CHECK(perturb_level3(doc, rng, cfg) == doc);
}

TEST_CASE("level III replays the random stream")
{
    const auto doc = one_text_at(50, 50);
    Rng rng(99);
    const auto out = perturb_level3(doc, rng);

    // offsets are U(-10, 10) on a 100 px canvas, drawn x first
    Rng replay(99);
    const double dx = replay.uniform(-10, 10);
    const double dy = replay.uniform(-10, 10);
    CHECK(first_text(out).x == 50 + dx);
    CHECK(first_text(out).y == 50 + dy);
    CHECK(std::abs(dx) < 10);
    CHECK(std::abs(dy) < 10);

    // fonts and content stay as they were
    CHECK(first_text(out).font_size == 12);
    CHECK(first_text(out).content == "Hi");
}

TEST_CASE("level III only moves texts")
{
    const auto doc = parse_svg(fixture_text("poster.svg")).document;
    Rng rng(3);
    const auto out = perturb_level3(doc, rng);
    REQUIRE(out.elements.size() == doc.elements.size());
    for (size_t i = 0; i < doc.elements.size(); ++i)
    {
        if (const auto* a = std::get_if<TextElement>(&doc.elements[i]))
        {
            const auto& b = std::get<TextElement>(out.elements[i]);
            CHECK(b.content == a->content);
            CHECK(b.font_size == a->font_size);
            CHECK(std::abs(b.x - a->x) <= 0.1 * doc.canvas.width);
            CHECK(std::abs(b.y - a->y) <= 0.1 * doc.canvas.height);
        }
        else
        {
            CHECK(out.elements[i] == doc.elements[i]);
        }
    }
}

TEST_CASE("level II stays within its bounds")
{
    const auto doc = parse_svg(fixture_text("poster.svg")).document;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
    {
        Rng rng(seed);
        const auto out = perturb_level2(doc, rng);
        const auto before = doc.texts();
        const auto after = out.texts();
        REQUIRE(before.size() == after.size());
        for (size_t i = 0; i < before.size(); ++i)
        {
            CHECK(std::abs(after[i]->x - before[i]->x) <= 0.03 * doc.canvas.width);
            CHECK(std::abs(after[i]->y - before[i]->y) <= 0.03 * doc.canvas.height);
            CHECK(after[i]->font_size >= 0.9 * before[i]->font_size);
            CHECK(after[i]->font_size <= 1.1 * before[i]->font_size);
        }
    }
}

TEST_CASE("perturbations are deterministic under a fixed seed")
{
    const auto corpus = synth_corpus(10, 4);
    PerturbConfig cfg;
    cfg.seed = 77;
    for (const auto& c: corpus)
        CHECK(build_levels(c.doc, c.id, cfg) == build_levels(c.doc, c.id, cfg));

    // a different seed moves something
    PerturbConfig other = cfg;
    other.seed = 78;
    CHECK(build_levels(corpus[0].doc, corpus[0].id, cfg)[2] != build_levels(corpus[0].doc, corpus[0].id, other)[2]);
}

TEST_CASE("level I is the ground truth")
{
    const auto c = synth_corpus(1, 9).front();
    CHECK(build_levels(c.doc, c.id)[0] == c.doc);
}

TEST_CASE("level IV output is schema-valid")
{
    for (const auto& c: synth_corpus(40, 11))
    {
        const auto iv = build_levels(c.doc, c.id)[3];
        const auto text = serialize_svg(iv);
        const auto back = parse_svg(text).document;
        CHECK(back == iv);
        for (size_t i = 0; i < iv.elements.size(); ++i)
            std::visit([&](const auto& e) { CHECK(e.draw_index == static_cast<int>(i)); }, iv.elements[i]);
        for (const auto* t: iv.texts())
            CHECK(t->font_size > 0);
    }
}

TEST_CASE("level IV can delete everything")
{
    PerturbConfig cfg;
    cfg.l4_text_delete_p = 1.0;
    cfg.l4_image_drop_p = 1.0;
    const auto doc = parse_svg(fixture_text("poster.svg")).document;
    Rng rng(5);
    const auto out = perturb_level4(doc, rng, cfg);
    CHECK(out.elements.empty());
    CHECK(out.degenerate());
    CHECK(parse_svg(serialize_svg(out)).document == out);
}

TEST_CASE("level IV with neutral settings only scales and shifts")
{
    PerturbConfig cfg;
    cfg.l4_offset_frac = 0;
    cfg.l4_font_scale_min = cfg.l4_font_scale_max = 1.0;
    cfg.l4_global_scale_min = cfg.l4_global_scale_max = 2.0;
    cfg.l4_text_delete_p = 0;
    cfg.l4_image_drop_p = 0;
    const auto doc = one_text_at(60, 30);
    Rng rng(6);
    const auto out = perturb_level4(doc, rng, cfg);
    // scaled by 2 about (50, 50)
    CHECK(first_text(out).x == 70);
    CHECK(first_text(out).y == 10);
    CHECK(first_text(out).font_size == 24);
}

TEST_CASE("six pairs per prompt")
{
    const auto pairs = level_pairs();
    REQUIRE(pairs.size() == 6);
    std::set<std::pair<QualityLevel, QualityLevel>> unique(pairs.begin(), pairs.end());
    CHECK(unique.size() == 6);
    for (auto [better, worse]: pairs)
        CHECK(static_cast<int>(better) < static_cast<int>(worse));

    const auto c = synth_corpus(1, 2).front();
    const auto records = build_pair_records(c.id, level_svgs(build_levels(c.doc, c.id)), "bg.pgm", c.target_text);
    REQUIRE(records.size() == 6);
    CHECK(records[2].better_level == QualityLevel::I);
    CHECK(records[2].worse_level == QualityLevel::IV);
    CHECK(records[2].better_svg == serialize_svg(c.doc));
}

TEST_CASE("missing level is an input error")
{
    std::map<QualityLevel, FeatureVector> three { { QualityLevel::I, {} },
                                                  { QualityLevel::II, {} },
                                                  { QualityLevel::IV, {} } };
    CHECK_THROWS_AS((void)build_pairs("q", three), InputError);
    three[QualityLevel::III] = {};
    const auto pairs = build_pairs("q", three);
    CHECK(pairs.size() == 6);
    CHECK(pairs[5].query_id == "q");
}

TEST_CASE("pair records round-trip through JSONL")
{
    const auto c = synth_corpus(1, 3).front();
    for (const auto& r: build_pair_records(c.id, level_svgs(build_levels(c.doc, c.id)), "dir/bg 1.pgm", c.target_text))
    {
        const auto line = to_jsonl(r);
        CHECK(line.find('\n') == std::string::npos);
        CHECK(parse_pair_record(line) == r);
    }
    CHECK_THROWS_AS((void)parse_pair_record("[]"), InputError);
    CHECK_THROWS_AS((void)parse_pair_record(R"({"query_id":"q"})"), InputError);
    CHECK_THROWS_AS((void)parse_pair_record(
                        R"({"query_id":"q","level_pair":["III","II"],"better_svg":"","worse_svg":"","background_path":"","target_text":""})"),
                    InputError);
}

TEST_CASE("config validation")
{
    PerturbConfig ok;
    CHECK_NOTHROW(ok.validate());
    auto bad = ok;
    bad.l4_text_delete_p = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.l4_font_scale_min = 3.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.l3_offset_frac = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.l4_global_scale_min = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("quality degrades down the hierarchy on a synthetic corpus")
{
    const auto corpus = synth_corpus(100, 21);
    std::array<double, 4> char_f {}, r_ali {};
    for (const auto& c: corpus)
    {
        const auto levels = build_levels(c.doc, c.id);
        for (size_t l = 0; l < 4; ++l)
        {
            const auto a = analyze_layout(levels[l], c.background, c.target_text);
            char_f[l] += a.features.char_f / 100.0;
            r_ali[l] += a.features.r_ali / 100.0;
        }
    }
    CAPTURE(char_f);
    CAPTURE(r_ali);
    CHECK(char_f[0] >= char_f[1]);
    CHECK(char_f[1] > char_f[2]);
    CHECK(char_f[2] >= char_f[3]);
    CHECK(r_ali[0] <= r_ali[1]);
    CHECK(r_ali[1] <= r_ali[2]);
    CHECK(r_ali[2] <= r_ali[3]);
}
