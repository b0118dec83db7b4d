// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/perturb.hpp>

#include <json.hpp>

#include <cmath>

namespace layoutloop
{

void PerturbConfig::validate() const
{
    auto probability = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError(std::string(name) + " must be in [0, 1]");
    };
    auto magnitude = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(name) + " must be a finite non-negative number");
    };
    auto range = [](double lo, double hi, const char* name) {
        if (!(lo > 0.0 && lo <= hi) || !std::isfinite(hi))
            throw ConfigError(std::string(name) + " range must satisfy 0 < min <= max");
    };
    magnitude(l2_offset_frac, "l2_offset_frac");
    magnitude(l3_offset_frac, "l3_offset_frac");
    magnitude(l4_offset_frac, "l4_offset_frac");
    if (!(l2_font_jitter >= 0.0 && l2_font_jitter < 1.0))
        throw ConfigError("l2_font_jitter must be in [0, 1)");
    range(l4_font_scale_min, l4_font_scale_max, "l4_font_scale");
    range(l4_global_scale_min, l4_global_scale_max, "l4_global_scale");
    probability(l4_text_delete_p, "l4_text_delete_p");
    probability(l4_image_drop_p, "l4_image_drop_p");
}

namespace
{

void offset_texts(LayoutDocument& doc, Rng& rng, double frac)
{
    const double dx = frac * doc.canvas.width;
    const double dy = frac * doc.canvas.height;
    for (auto& element: doc.elements)
        if (auto* text = std::get_if<TextElement>(&element))
        {
            text->x += rng.uniform(-dx, dx);
            text->y += rng.uniform(-dy, dy);
        }
}

} // namespace

LayoutDocument perturb_level2(const LayoutDocument& doc, Rng& rng, const PerturbConfig& cfg)
{
    LayoutDocument out = doc;
    const double dx = cfg.l2_offset_frac * doc.canvas.width;
    const double dy = cfg.l2_offset_frac * doc.canvas.height;
    for (auto& element: out.elements)
        if (auto* text = std::get_if<TextElement>(&element))
        {
            text->x += rng.uniform(-dx, dx);
            text->y += rng.uniform(-dy, dy);
            text->font_size *= 1.0 + rng.uniform(-cfg.l2_font_jitter, cfg.l2_font_jitter);
        }
    return out;
}

LayoutDocument perturb_level3(const LayoutDocument& doc, Rng& rng, const PerturbConfig& cfg)
{
    LayoutDocument out = doc;
    offset_texts(out, rng, cfg.l3_offset_frac);
    return out;
}

LayoutDocument perturb_level4(const LayoutDocument& doc, Rng& rng, const PerturbConfig& cfg)
{
    LayoutDocument out = doc;

    const double s = rng.uniform(cfg.l4_global_scale_min, cfg.l4_global_scale_max);
    const double cx = doc.canvas.width / 2.0;
    const double cy = doc.canvas.height / 2.0;
    for (auto& element: out.elements)
    {
        if (auto* text = std::get_if<TextElement>(&element))
        {
            text->x = cx + (text->x - cx) * s;
            text->y = cy + (text->y - cy) * s;
            text->font_size *= s;
        }
        else if (auto* rect = std::get_if<RectElement>(&element))
        {
            rect->x = cx + (rect->x - cx) * s;
            rect->y = cy + (rect->y - cy) * s;
            rect->w *= s;
            rect->h *= s;
        }
    }

    offset_texts(out, rng, cfg.l4_offset_frac);

    for (auto& element: out.elements)
        if (auto* text = std::get_if<TextElement>(&element))
            text->font_size *= rng.uniform(cfg.l4_font_scale_min, cfg.l4_font_scale_max);

    std::vector<Element> kept;
    kept.reserve(out.elements.size());
    for (auto& element: out.elements)
    {
        const bool is_text = std::holds_alternative<TextElement>(element);
        if (is_text && rng.bernoulli(cfg.l4_text_delete_p))
            continue;
        if (std::holds_alternative<ImageElement>(element) && rng.bernoulli(cfg.l4_image_drop_p))
            continue;
        kept.push_back(std::move(element));
    }
    out.elements = std::move(kept);
    out.renumber();
    return out;
}

LevelSet build_levels(const LayoutDocument& ground_truth, std::string_view id, const PerturbConfig& cfg)
{
    const std::string key(id);
    Rng r2(derive_seed(cfg.seed, key + "#II"));
    Rng r3(derive_seed(cfg.seed, key + "#III"));
    Rng r4(derive_seed(cfg.seed, key + "#IV"));
    return { ground_truth, perturb_level2(ground_truth, r2, cfg), perturb_level3(ground_truth, r3, cfg),
             perturb_level4(ground_truth, r4, cfg) };
}

std::vector<std::pair<QualityLevel, QualityLevel>> level_pairs()
{
    using enum QualityLevel;
    return { { I, II }, { I, III }, { I, IV }, { II, III }, { II, IV }, { III, IV } };
}

std::vector<PreferencePair> build_pairs(const std::string& query_id,
                                        const std::map<QualityLevel, FeatureVector>& levels)
{
    return build_pairs(levels, [&](const FeatureVector& b, const FeatureVector& w, QualityLevel bl, QualityLevel wl) {
        return PreferencePair { query_id, b, w, bl, wl };
    });
}

std::vector<PairRecord> build_pair_records(const std::string& query_id, const std::map<QualityLevel, std::string>& svgs,
                                           const std::string& background_path, const std::string& target_text)
{
    return build_pairs(svgs, [&](const std::string& b, const std::string& w, QualityLevel bl, QualityLevel wl) {
        return PairRecord { query_id, bl, wl, b, w, background_path, target_text };
    });
}

std::string to_jsonl(const PairRecord& r)
{
    const nlohmann::ordered_json j = {
        { "query_id", r.query_id },
        { "level_pair", { to_string(r.better_level), to_string(r.worse_level) } },
        { "better_svg", r.better_svg },
        { "worse_svg", r.worse_svg },
        { "background_path", r.background_path },
        { "target_text", r.target_text },
    };
    return j.dump();
}

PairRecord parse_pair_record(std::string_view line)
{
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InputError("pair record is not a JSON object");
    try
    {
        PairRecord r;
        r.query_id = j.at("query_id").get<std::string>();
        const auto& lp = j.at("level_pair");
        if (!lp.is_array() || lp.size() != 2)
            throw InputError("level_pair must have two entries");
        r.better_level = parse_quality_level(lp[0].get<std::string>());
        r.worse_level = parse_quality_level(lp[1].get<std::string>());
        if (static_cast<int>(r.better_level) >= static_cast<int>(r.worse_level))
            throw InputError("level_pair must list the better level first");
        r.better_svg = j.at("better_svg").get<std::string>();
        r.worse_svg = j.at("worse_svg").get<std::string>();
        r.background_path = j.at("background_path").get<std::string>();
        r.target_text = j.at("target_text").get<std::string>();
        return r;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("malformed pair record: ") + e.what());
    }
}

} // namespace layoutloop
