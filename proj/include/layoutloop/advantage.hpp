// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace layoutloop
{

inline constexpr double advantage_epsilon = 1e-8;
inline constexpr double answer_bonus = 0.7;

struct RoundScore
{
    double r_score = 0;
    bool format_ok = true;

    bool operator==(const RoundScore&) const = default;
};

/// One sampled trajectory as seen by the advantage computation.
struct Rollout
{
    std::string query_id;
    std::vector<RoundScore> rounds;
    int tool_call_count = 0;
    double final_r_score = 0;
    double r_format = 1.0; // +1 or -1 for the whole trajectory

    /// Throws InputError when the record is inconsistent (no rounds, tool calls above the cap,
    /// final score not equal to the last round's, format reward not +-1, non-finite scores).
    void validate(int n_max) const;

    bool operator==(const Rollout&) const = default;
};

struct RolloutGroup
{
    std::string query_id;
    std::vector<Rollout> rollouts;
};

/// Groups rollouts by query id, keeping the order of first appearance.
[[nodiscard]] std::vector<RolloutGroup> group_rollouts(std::vector<Rollout> rollouts);

struct AdvantageRecord
{
    std::string query_id;
    int rollout = 0;          // index within the group
    std::optional<int> round; // empty for outcome advantages
    double a_raw = 0;
    double a = 0;

    bool operator==(const AdvantageRecord&) const = default;
};

struct AdvantageResult
{
    std::vector<AdvantageRecord> records; // ordered by (group, rollout, round)
    std::vector<std::string> flags;
};

/// (x - mean) / std over the whole batch, population std. A batch with std <= epsilon maps to
/// all zeros and returns false.
bool standardize(std::span<const double> raw, std::span<double> out);

/// A_raw = R - mean_group(R) + gamma * R_format, then batch standardization.
[[nodiscard]] AdvantageResult outcome_advantages(std::span<const RolloutGroup> groups, double gamma);

/// Per-round advantages: first round against the group mean of first-round scores, middle rounds
/// against the best earlier round, the last round from the answer bonus and the length term
/// (n_max is the tool-call cap). Then batch standardization over all rounds.
[[nodiscard]] AdvantageResult process_advantages(std::span<const RolloutGroup> groups, int n_max = 4);

/// Rollout JSONL: {query_id, rounds: [{r_score, format_ok}], tool_call_count, final_r_score, r_format}.
/// Extra keys are ignored. Throws InputError on malformed lines.
[[nodiscard]] Rollout parse_rollout(std::string_view line);
[[nodiscard]] std::string to_jsonl(const Rollout& rollout);
/// {query_id, rollout, round, a_raw, a}; round is null for outcome advantages.
[[nodiscard]] std::string to_jsonl(const AdvantageRecord& record);

} // namespace layoutloop
