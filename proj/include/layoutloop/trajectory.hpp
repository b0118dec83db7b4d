// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/layout_doc.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace layoutloop
{

enum class ActionKind
{
    ToolCall,
    Answer,
};

enum class Termination
{
    Satisfaction,
    MaxIterations,
};

[[nodiscard]] std::string_view to_string(ActionKind kind) noexcept;
[[nodiscard]] std::string_view to_string(Termination t) noexcept;

struct Query
{
    std::string id;
    std::string background_path;
    std::string target_text;
    Canvas canvas;

    bool operator==(const Query&) const = default;
};

struct Round
{
    std::string think;
    ActionKind action = ActionKind::ToolCall;
    std::string svg;
    std::optional<int> render_ref; // index of the render this round produced, if any
    double r_score = 0;
    bool format_ok = true;

    bool operator==(const Round&) const = default;
};

/// One generate-render-reflect-refine episode. All rounds but the last are tool calls;
/// the last one is the answer.
struct Trajectory
{
    Query query;
    std::vector<Round> rounds;
    Termination terminated_by = Termination::Satisfaction;

    [[nodiscard]] int tool_call_count() const;

    bool operator==(const Trajectory&) const = default;
};

/// Tagged text of a single round: <think> followed by <tool_call> or <answer>.
[[nodiscard]] std::string serialize_round(const Round& round);

/// Whole transcript: the tagged rounds separated by newlines.
[[nodiscard]] std::string serialize_trajectory(const Trajectory& t);

/// Parses a transcript back into rounds (think, action, svg). <tool_response> blocks between
/// rounds are skipped. Throws FormatError on tag nesting or ordering violations.
[[nodiscard]] Trajectory parse_trajectory(std::string_view text);

/// SVG payload of a tool_call/answer block: fenced ```svg block, plain fence, or bare <svg>...</svg>.
[[nodiscard]] std::optional<std::string> extract_svg(std::string_view payload);

/// +1.0 iff every intermediate round is exactly think+tool_call and the final round exactly
/// think+answer, each action carrying SVG that parses; -1.0 otherwise. Never throws.
[[nodiscard]] double check_format(std::span<const std::string> round_texts) noexcept;
[[nodiscard]] double check_format(const Trajectory& t) noexcept;

} // namespace layoutloop
