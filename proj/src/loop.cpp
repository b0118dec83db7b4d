// SPDX-License-Identifier: Apache-2.0
#include <layoutloop/error.hpp>
#include <layoutloop/image_io.hpp>
#include <layoutloop/loop.hpp>
#include <layoutloop/subprocess.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace layoutloop
{

namespace
{

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (const auto& p: parts)
    {
        if (!out.empty())
            out += sep;
        out += p;
    }
    return out;
}

} // namespace

LoopResult run_loop(Policy& policy, const Query& query, const LuminanceRaster& background, const LayoutScorer& scorer,
                    const LoopOptions& options)
{
    if (options.n_max < 1)
        throw InputError("n_max must be at least 1");

    LoopResult result;
    auto& traj = result.trajectory;
    traj.query = query;

    std::vector<HistoryEntry> history;
    std::optional<size_t> last_valid; // index into history
    int tool_calls = 0;

    while (true)
    {
        const PolicyContext ctx { query, background, history, options.n_max - tool_calls };
        PolicyAction action = policy.step(ctx);

        Round round;
        round.think = std::move(action.think);
        round.action = action.kind;
        round.svg = action.svg;

        HistoryEntry entry;
        entry.action = action.kind;
        entry.svg = std::move(action.svg);
        std::optional<RewardBreakdown> breakdown;
        try
        {
            auto doc = parse_svg(entry.svg).document;
            ScoreOptions so = options.score;
            so.svg = entry.svg;
            if (so.background_path.empty())
                so.background_path = query.background_path;
            auto scored = score_layout_full(doc, background, query.target_text, scorer, so);
            round.r_score = scored.breakdown.r_score;
            round.render_ref = static_cast<int>(result.renders.size());
            result.renders.push_back(scored.analysis.render);
            entry.render = std::move(scored.analysis.render);
            entry.doc = std::move(doc);
            breakdown = scored.breakdown;
        }
        catch (const ParseError& e)
        {
            entry.error = e.what();
        }
        catch (const SchemaError& e)
        {
            entry.error = e.what();
        }
        if (!entry.doc)
        {
            round.format_ok = false;
            round.r_score = options.invalid_svg_score;
        }
        entry.r_score = round.r_score;

        const bool answered = round.action == ActionKind::Answer;
        traj.rounds.push_back(std::move(round));
        result.breakdowns.push_back(breakdown);
        history.push_back(std::move(entry));

        if (answered)
        {
            traj.terminated_by = Termination::Satisfaction;
            if (history.back().doc)
                last_valid = history.size() - 1;
            break;
        }
        if (history.back().doc)
            last_valid = history.size() - 1;
        if (++tool_calls >= options.n_max)
        {
            Round closing;
            closing.think = "Tool-call budget used up; submitting the last rendered layout.";
            closing.action = ActionKind::Answer;
            if (last_valid)
            {
                closing.svg = history[*last_valid].svg;
                closing.r_score = history[*last_valid].r_score;
                closing.render_ref = traj.rounds[*last_valid].render_ref;
                result.breakdowns.push_back(result.breakdowns[*last_valid]);
            }
            else
            {
                closing.svg = history.back().svg;
                closing.r_score = options.invalid_svg_score;
                closing.format_ok = false;
                result.breakdowns.push_back(std::nullopt);
            }
            traj.rounds.push_back(std::move(closing));
            traj.terminated_by = Termination::MaxIterations;
            break;
        }
    }

    result.final_svg = last_valid ? history[*last_valid].svg : std::string();
    result.r_format = check_format(traj);

    if (options.dump_dir)
    {
        std::filesystem::create_directories(*options.dump_dir);
        for (size_t i = 0; i < result.renders.size(); ++i)
            save_png(result.renders[i].raster,
                     *options.dump_dir / (query.id + "_render" + std::to_string(i) + ".png"));
    }
    return result;
}

Rollout to_rollout(const LoopResult& result)
{
    Rollout r;
    r.query_id = result.trajectory.query.id;
    for (const auto& round: result.trajectory.rounds)
        r.rounds.push_back({ round.r_score, round.format_ok });
    r.tool_call_count = result.trajectory.tool_call_count();
    r.final_r_score = r.rounds.empty() ? 0.0 : r.rounds.back().r_score;
    r.r_format = result.r_format;
    return r;
}

std::string to_jsonl(const Trajectory& t, double r_format)
{
    nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
    for (const auto& r: t.rounds)
    {
        nlohmann::ordered_json jr = {
            { "think", r.think },
            { "action", to_string(r.action) },
            { "svg", r.svg },
            { "render_ref", nullptr },
            { "r_score", r.r_score },
            { "format_ok", r.format_ok },
        };
        if (r.render_ref)
            jr["render_ref"] = *r.render_ref;
        rounds.push_back(std::move(jr));
    }
    const nlohmann::ordered_json j = {
        { "query_id", t.query.id },
        { "query",
          { { "background_path", t.query.background_path },
            { "target_text", t.query.target_text },
            { "canvas", { { "width", t.query.canvas.width }, { "height", t.query.canvas.height } } } } },
        { "rounds", rounds },
        { "terminated_by", to_string(t.terminated_by) },
        { "tool_call_count", t.tool_call_count() },
        { "final_r_score", t.rounds.empty() ? 0.0 : t.rounds.back().r_score },
        { "r_format", r_format },
    };
    return j.dump();
}

Trajectory parse_trajectory_jsonl(std::string_view line)
{
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InputError("trajectory line is not a JSON object");
    try
    {
        Trajectory t;
        t.query.id = j.at("query_id").get<std::string>();
        const auto& q = j.at("query");
        t.query.background_path = q.at("background_path").get<std::string>();
        t.query.target_text = q.at("target_text").get<std::string>();
        t.query.canvas.width = q.at("canvas").at("width").get<int>();
        t.query.canvas.height = q.at("canvas").at("height").get<int>();
        for (const auto& jr: j.at("rounds"))
        {
            Round r;
            r.think = jr.at("think").get<std::string>();
            const auto action = jr.at("action").get<std::string>();
            if (action == to_string(ActionKind::ToolCall))
                r.action = ActionKind::ToolCall;
            else if (action == to_string(ActionKind::Answer))
                r.action = ActionKind::Answer;
            else
                throw InputError("unknown action '" + action + "'");
            r.svg = jr.at("svg").get<std::string>();
            if (!jr.at("render_ref").is_null())
                r.render_ref = jr.at("render_ref").get<int>();
            r.r_score = jr.at("r_score").get<double>();
            r.format_ok = jr.at("format_ok").get<bool>();
            t.rounds.push_back(std::move(r));
        }
        const auto term = j.at("terminated_by").get<std::string>();
        if (term == to_string(Termination::Satisfaction))
            t.terminated_by = Termination::Satisfaction;
        else if (term == to_string(Termination::MaxIterations))
            t.terminated_by = Termination::MaxIterations;
        else
            throw InputError("unknown termination '" + term + "'");
        return t;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("malformed trajectory: ") + e.what());
    }
}

PolicyAction OraclePolicy::step(const PolicyContext& ctx)
{
    if (ctx.history.empty())
        return { "Drafting the layout and rendering it to check placement.", ActionKind::ToolCall,
                 serialize_svg(_reference) };
    return { "The render matches the intended layout.", ActionKind::Answer, serialize_svg(_reference) };
}

PolicyAction AlwaysReviserPolicy::step(const PolicyContext&)
{
    for (auto& element: _doc.elements)
        if (auto* text = std::get_if<TextElement>(&element))
        {
            text->x += 1.0;
            break;
        }
    return { "Nudging the first line and rendering again.", ActionKind::ToolCall, serialize_svg(_doc) };
}

LayoutDocument GreedyFixerPolicy::fix(const LayoutDocument& doc, const AdvanceModel& model,
                                      std::vector<std::string>* notes)
{
    LayoutDocument out = doc;
    const double W = doc.canvas.width;
    const double H = doc.canvas.height;
    const double m = std::max(1.0, 0.02 * std::min(W, H));
    auto note = [&](std::string s) {
        if (notes)
            notes->push_back(std::move(s));
    };

    std::vector<TextElement*> texts;
    for (auto& element: out.elements)
        if (auto* t = std::get_if<TextElement>(&element); t && !t->content.empty())
            texts.push_back(t);

    auto clamp_into_canvas = [&](TextElement& t) {
        Rect box = text_bbox(t, model);
        if (box.width() > W - 2 * m)
        {
            t.font_size *= (W - 2 * m) / box.width();
            note(t.id + " is wider than the canvas; font reduced to " + format_number(t.font_size) + ".");
            box = text_bbox(t, model);
        }
        if (box.height() > H - 2 * m)
        {
            t.font_size *= (H - 2 * m) / box.height();
            note(t.id + " is taller than the canvas; font reduced to " + format_number(t.font_size) + ".");
            box = text_bbox(t, model);
        }
        double dx = 0;
        if (box.x0 < m)
            dx = m - box.x0;
        else if (box.x1 > W - m)
            dx = (W - m) - box.x1;
        double dy = 0;
        if (box.y0 < m)
            dy = m - box.y0;
        else if (box.y1 > H - m)
            dy = (H - m) - box.y1;
        if (dx != 0 || dy != 0)
        {
            t.x += dx;
            t.y += dy;
            note(t.id + " leaves the canvas; moved by (" + format_number(dx) + ", " + format_number(dy) + ").");
        }
    };
    for (auto* t: texts)
        clamp_into_canvas(*t);

    auto overlaps_any = [&](size_t j, const Rect& box) {
        for (size_t k = 0; k < texts.size(); ++k)
            if (k != j && intersect(box, text_bbox(*texts[k], model)).area() > 0)
                return true;
        return false;
    };

    for (int pass = 0; pass < 16; ++pass)
    {
        bool moved = false;
        for (size_t j = 1; j < texts.size(); ++j)
            for (size_t i = 0; i < j; ++i)
            {
                const Rect bi = text_bbox(*texts[i], model);
                const Rect bj = text_bbox(*texts[j], model);
                if (intersect(bi, bj).area() <= 0)
                    continue;
                const double gap = 1.0;
                std::array<double, 2> moves { bi.y1 + gap - bj.y0, bi.y0 - gap - bj.y1 };
                std::sort(moves.begin(), moves.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
                std::optional<double> chosen;
                for (double d: moves)
                {
                    const Rect cand = bj.translated(0, d);
                    if (cand.y0 < m || cand.y1 > H - m)
                        continue;
                    if (!overlaps_any(j, cand))
                    {
                        chosen = d;
                        break;
                    }
                    if (!chosen)
                        chosen = d;
                }
                if (chosen)
                {
                    texts[j]->y += *chosen;
                    note(texts[j]->id + " overlaps " + texts[i]->id + "; moved vertically by " + format_number(*chosen)
                         + ".");
                }
                else
                {
                    texts[j]->font_size *= 0.85;
                    note(texts[j]->id + " overlaps " + texts[i]->id + " with no room to move; font reduced to "
                         + format_number(texts[j]->font_size) + ".");
                    clamp_into_canvas(*texts[j]);
                }
                moved = true;
            }
        if (!moved)
            break;
    }
    return out;
}

PolicyAction GreedyFixerPolicy::step(const PolicyContext& ctx)
{
    if (ctx.history.empty())
        return { "Drafting the layout.", ActionKind::ToolCall, serialize_svg(_draft) };

    auto last = std::find_if(ctx.history.rbegin(), ctx.history.rend(), [](const auto& h) { return h.doc.has_value(); });
    if (last == ctx.history.rend())
        return { "The previous code did not parse; starting over from the draft.", ActionKind::ToolCall,
                 serialize_svg(_draft) };

    std::vector<std::string> notes;
    const auto fixed = fix(*last->doc, _model, &notes);
    if (fixed == *last->doc)
        return { "Every text box is inside the canvas and none overlap.", ActionKind::Answer, last->svg };
    return { join(notes, "\n"), ActionKind::ToolCall, serialize_svg(fixed) };
}

PolicyAction RandomPerturberPolicy::step(const PolicyContext& ctx)
{
    if (!ctx.history.empty() && _rng.bernoulli(_pAnswer))
        return { "Good enough.", ActionKind::Answer, ctx.history.back().svg };
    const double dx = _offsetFrac * _doc.canvas.width;
    const double dy = _offsetFrac * _doc.canvas.height;
    for (auto& element: _doc.elements)
        if (auto* text = std::get_if<TextElement>(&element))
        {
            text->x += _rng.uniform(-dx, dx);
            text->y += _rng.uniform(-dy, dy);
        }
    return { "Trying a shifted arrangement.", ActionKind::ToolCall, serialize_svg(_doc) };
}

PolicyAction ExternalPolicy::step(const PolicyContext& ctx)
{
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h: ctx.history)
    {
        nlohmann::json jh = {
            { "action", to_string(h.action) },
            { "svg", h.svg },
            { "r_score", h.r_score },
            { "valid", h.doc.has_value() },
            { "error", h.error },
        };
        if (h.render)
            jh["in_canvas_fraction"] = in_canvas_fraction(*h.render);
        history.push_back(std::move(jh));
    }
    const nlohmann::json request = {
        { "query",
          { { "id", ctx.query.id },
            { "background_path", ctx.query.background_path },
            { "target_text", ctx.query.target_text },
            { "canvas", { { "width", ctx.query.canvas.width }, { "height", ctx.query.canvas.height } } } } },
        { "history", history },
        { "tool_calls_left", ctx.tool_calls_left },
    };
    const auto out = run_shell(_command, request.dump() + "\n", _timeout);
    if (out.exit_code != 0)
        throw ExternalToolError("policy command exited with status " + std::to_string(out.exit_code) + ": " + out.err);
    const auto reply = nlohmann::json::parse(out.out, nullptr, false);
    if (reply.is_discarded() || !reply.is_object())
        throw ExternalToolError("policy command did not print a JSON object");
    try
    {
        PolicyAction action;
        action.think = reply.value("think", std::string());
        const auto& a = reply.at("action");
        const auto type = a.at("type").get<std::string>();
        if (type == "tool_call")
            action.kind = ActionKind::ToolCall;
        else if (type == "answer")
            action.kind = ActionKind::Answer;
        else
            throw ExternalToolError("policy action type '" + type + "' is neither tool_call nor answer");
        action.svg = a.at("svg").get<std::string>();
        return action;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ExternalToolError(std::string("malformed policy reply: ") + e.what());
    }
}

} // namespace layoutloop
