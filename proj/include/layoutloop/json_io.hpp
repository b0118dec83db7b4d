// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/advantage.hpp>
#include <layoutloop/features.hpp>
#include <layoutloop/reward.hpp>

#include <json.hpp>

#include <span>

namespace layoutloop
{

using Json = nlohmann::ordered_json;

/// Non-finite values become null.
[[nodiscard]] Json number_or_null(double v);

[[nodiscard]] Json to_json(const GraphicMetrics& m);
[[nodiscard]] Json to_json(const CharMetrics& m);
[[nodiscard]] Json to_json(const FeatureVector& f);
[[nodiscard]] Json to_json(const RewardBreakdown& b);
[[nodiscard]] Json to_json(const AdvantageRecord& r);

/// {query_id, rollouts: [rollout records]}
[[nodiscard]] RolloutGroup group_from_json(const nlohmann::json& j);
[[nodiscard]] Rollout rollout_from_json(const nlohmann::json& j);

} // namespace layoutloop
