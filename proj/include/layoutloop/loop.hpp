// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/advantage.hpp>
#include <layoutloop/reward.hpp>
#include <layoutloop/rng.hpp>
#include <layoutloop/trajectory.hpp>

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace layoutloop
{

/// What the policy saw after one of its earlier rounds.
struct HistoryEntry
{
    ActionKind action = ActionKind::ToolCall;
    std::string svg;
    std::optional<LayoutDocument> doc;   // empty when the SVG did not parse
    std::optional<RenderResult> render;  // present for parsed SVG
    std::string error;                   // parse error message, if any
    double r_score = 0;
};

struct PolicyContext
{
    const Query& query;
    const LuminanceRaster& background;
    const std::vector<HistoryEntry>& history;
    int tool_calls_left = 0;
};

struct PolicyAction
{
    std::string think;
    ActionKind kind = ActionKind::ToolCall;
    std::string svg;
};

/// Stand-in for the layout model. step() must return an action for any history.
class Policy
{
  public:
    virtual ~Policy() = default;
    virtual PolicyAction step(const PolicyContext& ctx) = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

struct LoopOptions
{
    int n_max = 4;                    // cap on tool calls, the first render included
    double invalid_svg_score = -1.0;  // r_score of a round whose SVG does not parse
    ScoreOptions score;
    std::optional<std::filesystem::path> dump_dir; // per-round PNGs when set
};

struct LoopResult
{
    std::string final_svg;
    Trajectory trajectory;
    std::vector<RenderResult> renders; // indexed by Round::render_ref
    std::vector<std::optional<RewardBreakdown>> breakdowns; // per round; empty for unparsable SVG
    double r_format = 1.0;
};

/// Runs generate, render, reflect, refine until the policy answers or n_max tool calls have been
/// made. At the cap an answer round carrying the last valid SVG is appended.
[[nodiscard]] LoopResult run_loop(Policy& policy, const Query& query, const LuminanceRaster& background,
                                  const LayoutScorer& scorer, const LoopOptions& options = {});

/// Advantage-module view of a finished loop.
[[nodiscard]] Rollout to_rollout(const LoopResult& result);

/// One trajectory per line. Superset of the rollout record, so it can be fed to the advantage step.
[[nodiscard]] std::string to_jsonl(const Trajectory& t, double r_format);
[[nodiscard]] Trajectory parse_trajectory_jsonl(std::string_view line);

/// Emits the reference layout, then answers with it.
class OraclePolicy final: public Policy
{
  public:
    explicit OraclePolicy(LayoutDocument reference): _reference(std::move(reference)) {}
    PolicyAction step(const PolicyContext& ctx) override;
    [[nodiscard]] std::string name() const override { return "oracle"; }

  private:
    LayoutDocument _reference;
};

/// Never satisfied: nudges the first text element by one pixel every round.
class AlwaysReviserPolicy final: public Policy
{
  public:
    explicit AlwaysReviserPolicy(LayoutDocument start): _doc(std::move(start)) {}
    PolicyAction step(const PolicyContext& ctx) override;
    [[nodiscard]] std::string name() const override { return "always-reviser"; }

  private:
    LayoutDocument _doc;
};

/// Repairs geometry by rectangle arithmetic: shrinks fonts that cannot fit, clamps boxes into the
/// canvas and separates overlapping texts by the smaller vertical move. Answers once nothing changes.
class GreedyFixerPolicy final: public Policy
{
  public:
    explicit GreedyFixerPolicy(LayoutDocument draft, AdvanceModel model = {}): _draft(std::move(draft)), _model(model)
    {
    }
    PolicyAction step(const PolicyContext& ctx) override;
    [[nodiscard]] std::string name() const override { return "greedy-fixer"; }

    /// One repair pass; returns the document unchanged when it is already clean.
    [[nodiscard]] static LayoutDocument fix(const LayoutDocument& doc, const AdvanceModel& model,
                                            std::vector<std::string>* notes = nullptr);

  private:
    LayoutDocument _draft;
    AdvanceModel _model;
};

/// Random offsets each round; answers with probability p_answer after the first render.
class RandomPerturberPolicy final: public Policy
{
  public:
    RandomPerturberPolicy(LayoutDocument start, std::uint64_t seed, double offset_frac = 0.05, double p_answer = 0.3):
        _doc(std::move(start)), _rng(seed), _offsetFrac(offset_frac), _pAnswer(p_answer)
    {
    }
    PolicyAction step(const PolicyContext& ctx) override;
    [[nodiscard]] std::string name() const override { return "random-perturber"; }

  private:
    LayoutDocument _doc;
    Rng _rng;
    double _offsetFrac;
    double _pAnswer;
};

/// Runs a command per step. stdin: {query, history, tool_calls_left}; stdout:
/// {"think": str, "action": {"type": "tool_call" | "answer", "svg": str}}.
class ExternalPolicy final: public Policy
{
  public:
    explicit ExternalPolicy(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(120)):
        _command(std::move(command)), _timeout(timeout)
    {
    }
    PolicyAction step(const PolicyContext& ctx) override;
    [[nodiscard]] std::string name() const override { return "external"; }

  private:
    std::string _command;
    std::chrono::milliseconds _timeout;
};

} // namespace layoutloop
