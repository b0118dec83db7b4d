// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/advantage.hpp>
#include <layoutloop/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace layoutloop
{

void Rollout::validate(int n_max) const
{
    if (rounds.empty())
        throw InputError("rollout for '" + query_id + "' has no rounds");
    if (tool_call_count < 0 || tool_call_count > n_max)
        throw InputError("rollout for '" + query_id + "' has tool_call_count " + std::to_string(tool_call_count)
                         + " outside [0, " + std::to_string(n_max) + "]");
    for (const auto& r: rounds)
        if (!std::isfinite(r.r_score))
            throw InputError("rollout for '" + query_id + "' has a non-finite round score");
    if (final_r_score != rounds.back().r_score)
        throw InputError("rollout for '" + query_id + "': final_r_score differs from the last round's score");
    if (r_format != 1.0 && r_format != -1.0)
        throw InputError("rollout for '" + query_id + "': r_format must be +1 or -1");
}

std::vector<RolloutGroup> group_rollouts(std::vector<Rollout> rollouts)
{
    std::vector<RolloutGroup> groups;
    std::map<std::string, size_t> index;
    for (auto& r: rollouts)
    {
        auto [it, fresh] = index.try_emplace(r.query_id, groups.size());
        if (fresh)
            groups.push_back({ r.query_id, {} });
        groups[it->second].rollouts.push_back(std::move(r));
    }
    return groups;
}

bool standardize(std::span<const double> raw, std::span<double> out)
{
    if (raw.empty())
        return true;
    double mean = 0.0;
    for (double v: raw)
        mean += v;
    mean /= static_cast<double>(raw.size());
    double var = 0.0;
    for (double v: raw)
        var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(raw.size()));
    if (!(sd > advantage_epsilon))
    {
        std::fill(out.begin(), out.end(), 0.0);
        return false;
    }
    for (size_t i = 0; i < raw.size(); ++i)
        out[i] = (raw[i] - mean) / sd;
    return true;
}

namespace
{

void finish(AdvantageResult& result)
{
    std::vector<double> raw;
    raw.reserve(result.records.size());
    for (const auto& r: result.records)
        raw.push_back(r.a_raw);
    std::vector<double> normed(raw.size());
    if (!standardize(raw, normed))
        result.flags.push_back("batch standard deviation is zero; all advantages set to 0");
    for (size_t i = 0; i < raw.size(); ++i)
        result.records[i].a = normed[i];
}

void check_groups(std::span<const RolloutGroup> groups)
{
    for (const auto& g: groups)
    {
        if (g.rollouts.empty())
            throw InputError("group '" + g.query_id + "' is empty");
        for (const auto& r: g.rollouts)
            if (r.query_id != g.query_id)
                throw InputError("rollout for '" + r.query_id + "' placed in group '" + g.query_id + "'");
    }
}

} // namespace

AdvantageResult outcome_advantages(std::span<const RolloutGroup> groups, double gamma)
{
    check_groups(groups);
    AdvantageResult result;
    for (const auto& g: groups)
    {
        double mean = 0.0;
        for (const auto& r: g.rollouts)
            mean += r.final_r_score;
        mean /= static_cast<double>(g.rollouts.size());
        if (g.rollouts.size() == 1)
            result.flags.push_back("group '" + g.query_id + "' has a single rollout; score baseline is its own score");
        for (size_t i = 0; i < g.rollouts.size(); ++i)
        {
            const auto& r = g.rollouts[i];
            result.records.push_back(
                { g.query_id, static_cast<int>(i), std::nullopt, r.final_r_score - mean + gamma * r.r_format, 0.0 });
        }
    }
    finish(result);
    return result;
}

AdvantageResult process_advantages(std::span<const RolloutGroup> groups, int n_max)
{
    check_groups(groups);
    AdvantageResult result;
    for (const auto& g: groups)
    {
        double first_mean = 0.0;
        double best_last = -std::numeric_limits<double>::infinity();
        for (const auto& r: g.rollouts)
        {
            if (r.rounds.empty())
                throw InputError("rollout for '" + g.query_id + "' has no rounds");
            first_mean += r.rounds.front().r_score;
            best_last = std::max(best_last, r.rounds.back().r_score);
        }
        first_mean /= static_cast<double>(g.rollouts.size());

        for (size_t k = 0; k < g.rollouts.size(); ++k)
        {
            const auto& r = g.rollouts[k];
            const size_t n = r.rounds.size();
            if (n == 1)
                result.flags.push_back("rollout " + std::to_string(k) + " of '" + g.query_id
                                       + "' has a single round; scored with the terminal branch only");
            double best_prior = -std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < n; ++i)
            {
                const double score = r.rounds[i].r_score;
                double a_raw = 0.0;
                if (i + 1 == n)
                {
                    const double r_answer = score >= best_prior ? answer_bonus : score - best_prior;
                    const double r_length = -2.0 * (score - best_last) * std::max(0, n_max - r.tool_call_count);
                    a_raw = 2.0 * (r_answer + r_length);
                }
                else if (i == 0)
                    a_raw = score - first_mean;
                else
                    a_raw = 2.0 * (score - best_prior);
                best_prior = std::max(best_prior, score);
                result.records.push_back({ g.query_id, static_cast<int>(k), static_cast<int>(i), a_raw, 0.0 });
            }
        }
    }
    finish(result);
    return result;
}

Rollout parse_rollout(std::string_view line)
{
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InputError("rollout line is not a JSON object");
    try
    {
        Rollout r;
        r.query_id = j.at("query_id").get<std::string>();
        for (const auto& round: j.at("rounds"))
            r.rounds.push_back({ round.at("r_score").get<double>(), round.at("format_ok").get<bool>() });
        r.tool_call_count = j.at("tool_call_count").get<int>();
        r.final_r_score = j.at("final_r_score").get<double>();
        r.r_format = j.at("r_format").get<double>();
        return r;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("malformed rollout: ") + e.what());
    }
}

std::string to_jsonl(const Rollout& r)
{
    nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
    for (const auto& round: r.rounds)
        rounds.push_back({ { "r_score", round.r_score }, { "format_ok", round.format_ok } });
    const nlohmann::ordered_json j = {
        { "query_id", r.query_id },
        { "rounds", rounds },
        { "tool_call_count", r.tool_call_count },
        { "final_r_score", r.final_r_score },
        { "r_format", r.r_format },
    };
    return j.dump();
}

std::string to_jsonl(const AdvantageRecord& r)
{
    nlohmann::ordered_json j = {
        { "query_id", r.query_id },
        { "rollout", r.rollout },
        { "round", nullptr },
        { "a_raw", r.a_raw },
        { "a", r.a },
    };
    if (r.round)
        j["round"] = *r.round;
    return j.dump();
}

} // namespace layoutloop
