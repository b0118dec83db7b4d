// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/error.hpp>
#include <layoutloop/trajectory.hpp>

#include <array>

namespace layoutloop
{

namespace
{

enum class BlockKind
{
    Think,
    ToolCall,
    Answer,
    ToolResponse,
};

struct Block
{
    BlockKind kind;
    std::string_view body;
};

constexpr std::array<std::pair<BlockKind, std::string_view>, 4> block_tags { {
    { BlockKind::Think, "think" },
    { BlockKind::ToolCall, "tool_call" },
    { BlockKind::Answer, "answer" },
    { BlockKind::ToolResponse, "tool_response" },
} };

bool is_blank(std::string_view s)
{
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Splits a transcript into top-level tag blocks. Only whitespace may appear between blocks and
// none of the four tags may appear inside another block.
std::vector<Block> tokenize(std::string_view text)
{
    std::vector<Block> blocks;
    size_t pos = 0;
    while (true)
    {
        size_t nearest = std::string_view::npos;
        BlockKind kind {};
        std::string_view name;
        for (const auto& [k, tag]: block_tags)
        {
            const auto at = text.find("<" + std::string(tag) + ">", pos);
            if (at < nearest)
            {
                nearest = at;
                kind = k;
                name = tag;
            }
        }
        if (nearest == std::string_view::npos)
        {
            if (!is_blank(text.substr(pos)))
                throw FormatError("text outside of tag blocks");
            return blocks;
        }
        if (!is_blank(text.substr(pos, nearest - pos)))
            throw FormatError("text outside of tag blocks");

        const auto bodyStart = nearest + name.size() + 2;
        const std::string close = "</" + std::string(name) + ">";
        const auto end = text.find(close, bodyStart);
        if (end == std::string_view::npos)
            throw FormatError("unclosed <" + std::string(name) + "> block");
        const auto body = text.substr(bodyStart, end - bodyStart);
        for (const auto& [k, tag]: block_tags)
        {
            (void)k;
            if (body.find("<" + std::string(tag) + ">") != std::string_view::npos
                || body.find("</" + std::string(tag) + ">") != std::string_view::npos)
                throw FormatError("<" + std::string(tag) + "> nested inside <" + std::string(name) + ">");
        }
        blocks.push_back({ kind, body });
        pos = end + close.size();
    }
}

std::string strip_one_newline(std::string_view s)
{
    if (!s.empty() && s.front() == '\n')
        s.remove_prefix(1);
    if (!s.empty() && s.back() == '\n')
        s.remove_suffix(1);
    return std::string(s);
}

bool svg_parses(std::string_view payload)
{
    const auto svg = extract_svg(payload);
    if (!svg)
        return false;
    try
    {
        (void)parse_svg(*svg);
        return true;
    }
    catch (const Error&)
    {
        return false;
    }
}

} // namespace

std::string_view to_string(ActionKind kind) noexcept
{
    return kind == ActionKind::Answer ? "answer" : "tool_call";
}

std::string_view to_string(Termination t) noexcept
{
    return t == Termination::MaxIterations ? "max_iterations" : "satisfaction";
}

int Trajectory::tool_call_count() const
{
    int n = 0;
    for (const auto& r: rounds)
        if (r.action == ActionKind::ToolCall)
            ++n;
    return n;
}

std::optional<std::string> extract_svg(std::string_view payload)
{
    if (const auto fence = payload.find("```svg"); fence != std::string_view::npos)
    {
        auto start = payload.find('\n', fence);
        if (start == std::string_view::npos)
            return std::nullopt;
        ++start;
        auto end = payload.find("```", start);
        if (end == std::string_view::npos)
            return std::nullopt;
        if (end > start && payload[end - 1] == '\n')
            --end;
        return std::string(payload.substr(start, end - start));
    }
    if (const auto fence = payload.find("```"); fence != std::string_view::npos)
    {
        auto start = payload.find('\n', fence);
        const auto end = start == std::string_view::npos ? start : payload.find("```", start);
        if (end == std::string_view::npos)
            return std::nullopt;
        ++start;
        return std::string(trim(payload.substr(start, end - start)));
    }
    const auto open = payload.find("<svg");
    const auto close = payload.rfind("</svg>");
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        return std::nullopt;
    return std::string(payload.substr(open, close + 6 - open));
}

std::string serialize_round(const Round& round)
{
    std::string out = "<think>\n" + round.think + "\n</think>\n";
    if (round.action == ActionKind::ToolCall)
    {
        out += "<tool_call>\nTOOL: svg_to_image_tool\nPARAMS:\nsvg_code:\n```svg\n" + round.svg
               + "\n```\n</tool_call>";
    }
    else
    {
        out += "<answer>\n```svg\n" + round.svg + "\n```\n</answer>";
    }
    return out;
}

std::string serialize_trajectory(const Trajectory& t)
{
    std::string out;
    for (const auto& r: t.rounds)
        out += serialize_round(r) + "\n";
    return out;
}

Trajectory parse_trajectory(std::string_view text)
{
    Trajectory t;
    const auto blocks = tokenize(text);
    const Block* pendingThink = nullptr;
    for (const auto& b: blocks)
    {
        switch (b.kind)
        {
            case BlockKind::ToolResponse:
                if (pendingThink)
                    throw FormatError("<tool_response> between <think> and its action");
                break;
            case BlockKind::Think:
                if (pendingThink)
                    throw FormatError("two consecutive <think> blocks");
                if (!t.rounds.empty() && t.rounds.back().action == ActionKind::Answer)
                    throw FormatError("content after <answer>");
                pendingThink = &b;
                break;
            case BlockKind::ToolCall:
            case BlockKind::Answer:
            {
                if (!pendingThink)
                    throw FormatError("action without a preceding <think>");
                if (!t.rounds.empty() && t.rounds.back().action == ActionKind::Answer)
                    throw FormatError("content after <answer>");
                Round r;
                r.think = strip_one_newline(pendingThink->body);
                r.action = b.kind == BlockKind::Answer ? ActionKind::Answer : ActionKind::ToolCall;
                const auto svg = extract_svg(b.body);
                r.svg = svg.value_or(std::string {});
                r.format_ok = svg_parses(b.body);
                t.rounds.push_back(std::move(r));
                pendingThink = nullptr;
                break;
            }
        }
    }
    if (pendingThink)
        throw FormatError("<think> without a following action");
    if (t.rounds.empty())
        throw FormatError("transcript contains no rounds");
    t.terminated_by = Termination::Satisfaction;
    return t;
}

double check_format(std::span<const std::string> round_texts) noexcept
{
    try
    {
        if (round_texts.empty())
            return -1.0;
        for (size_t i = 0; i < round_texts.size(); ++i)
        {
            const auto blocks = tokenize(round_texts[i]);
            const bool last = i + 1 == round_texts.size();
            if (blocks.size() != 2 || blocks[0].kind != BlockKind::Think)
                return -1.0;
            if (blocks[1].kind != (last ? BlockKind::Answer : BlockKind::ToolCall))
                return -1.0;
            if (!svg_parses(blocks[1].body))
                return -1.0;
        }
        return 1.0;
    }
    catch (...)
    {
        return -1.0;
    }
}

double check_format(const Trajectory& t) noexcept
{
    try
    {
        std::vector<std::string> texts;
        texts.reserve(t.rounds.size());
        for (const auto& r: t.rounds)
            texts.push_back(serialize_round(r));
        return check_format(texts);
    }
    catch (...)
    {
        return -1.0;
    }
}

} // namespace layoutloop
