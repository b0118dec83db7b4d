// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/error.hpp>
#include <layoutloop/json_io.hpp>

#include <cmath>

namespace layoutloop
{

Json number_or_null(double v)
{
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json to_json(const GraphicMetrics& m)
{
    return Json {
        { "r_ali", number_or_null(m.r_ali) },
        { "r_ove", number_or_null(m.r_ove) },
        { "r_com", number_or_null(m.r_com) },
        { "flags", m.flags },
    };
}

Json to_json(const CharMetrics& m)
{
    return Json {
        { "tp", m.tp },
        { "fp", m.fp },
        { "fn", m.fn },
        { "precision", m.precision },
        { "recall", m.recall },
        { "f_measure", m.f_measure },
        { "accuracy", m.accuracy },
    };
}

Json to_json(const FeatureVector& f)
{
    Json j = Json::object();
    const auto values = f.values();
    for (size_t i = 0; i < FeatureVector::size; ++i)
        j[std::string(FeatureVector::names[i])] = number_or_null(values[i]);
    return j;
}

Json to_json(const RewardBreakdown& b)
{
    return Json {
        { "r_layout", number_or_null(b.r_layout) },
        { "r_layout_raw", number_or_null(b.r_layout_raw) },
        { "r_ocr", number_or_null(b.r_ocr) },
        { "r_svg", number_or_null(b.r_svg) },
        { "r_format", number_or_null(b.r_format) },
        { "r_score", number_or_null(b.r_score) },
        { "char_f", number_or_null(b.char_f) },
        { "graphic", to_json(b.graphic) },
    };
}

Json to_json(const AdvantageRecord& r)
{
    return Json {
        { "query_id", r.query_id },
        { "rollout", r.rollout },
        { "round", r.round ? Json(*r.round) : Json(nullptr) },
        { "a_raw", r.a_raw },
        { "a", r.a },
    };
}

Rollout rollout_from_json(const nlohmann::json& j)
{
    return parse_rollout(j.dump());
}

RolloutGroup group_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw InputError("group must be an object");
    try
    {
        RolloutGroup g;
        g.query_id = j.at("query_id").get<std::string>();
        for (auto r: j.at("rollouts"))
        {
            if (r.is_object() && !r.contains("query_id"))
                r["query_id"] = g.query_id;
            g.rollouts.push_back(rollout_from_json(r));
        }
        return g;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("malformed group: ") + e.what());
    }
}

} // namespace layoutloop
