// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <layoutloop/corpus.hpp>
#include <layoutloop/error.hpp>
#include <layoutloop/image_io.hpp>
#include <layoutloop/loop.hpp>
#include <layoutloop/metrics.hpp>

#include <doctest.h>
#include <json.hpp>

using namespace layoutloop;
using namespace testing_support;

namespace
{

Query query_for(const CorpusDocument& c)
{
    return { c.id, c.background_path, c.target_text, c.doc.canvas };
}

struct Poster
{
    LayoutDocument doc = parse_svg(fixture_text("poster.svg")).document;
    LuminanceRaster background = load_image(fixture("poster.pgm"));
    Query query { "poster", fixture("poster.pgm").string(), fixture_text("poster.txt"), doc.canvas };
};

/// Emits scripted SVG strings, answering with the last one.
class ScriptedPolicy final: public Policy
{
  public:
    explicit ScriptedPolicy(std::vector<std::string> svgs): _svgs(std::move(svgs)) {}
    PolicyAction step(const PolicyContext& ctx) override
    {
        const size_t i = ctx.history.size();
        const bool last = i + 1 >= _svgs.size();
        return { "step " + std::to_string(i), last ? ActionKind::Answer : ActionKind::ToolCall,
                 _svgs[std::min(i, _svgs.size() - 1)] };
    }
    [[nodiscard]] std::string name() const override { return "scripted"; }

  private:
    std::vector<std::string> _svgs;
};

} // namespace

TEST_CASE("oracle policy renders once and answers")
{
    const Poster p;
    OraclePolicy policy(p.doc);
    const HeuristicScorer scorer;
    const auto result = run_loop(policy, p.query, p.background, scorer);
    const auto& t = result.trajectory;
    REQUIRE(t.rounds.size() == 2);
    CHECK(t.tool_call_count() == 1);
    CHECK(t.terminated_by == Termination::Satisfaction);
    CHECK(t.rounds.back().action == ActionKind::Answer);
    CHECK(result.r_format == 1.0);
    CHECK(result.final_svg == serialize_svg(p.doc));
    REQUIRE(t.rounds.back().render_ref.has_value());
    CHECK(result.renders[static_cast<size_t>(*t.rounds.back().render_ref)] == render(p.doc, p.background));
}

TEST_CASE("a policy that never answers stops at the cap")
{
    const Poster p;
    for (int n_max: { 1, 2, 4, 6 })
    {
        AlwaysReviserPolicy policy(p.doc);
        LoopOptions opts;
        opts.n_max = n_max;
        const auto result = run_loop(policy, p.query, p.background, HeuristicScorer {}, opts);
        const auto& t = result.trajectory;
        CHECK(t.terminated_by == Termination::MaxIterations);
        CHECK(t.tool_call_count() == n_max);
        CHECK(t.rounds.size() == static_cast<size_t>(n_max) + 1);
        CHECK(t.rounds.back().action == ActionKind::Answer);
        CHECK(t.rounds.back().svg == t.rounds[t.rounds.size() - 2].svg);
        CHECK(result.r_format == 1.0);
    }
    AlwaysReviserPolicy policy(p.doc);
    LoopOptions zero;
    zero.n_max = 0;
    CHECK_THROWS_AS((void)run_loop(policy, p.query, p.background, HeuristicScorer {}, zero), InputError);
}

TEST_CASE("greedy fixer repairs the overlap fixture")
{
    const auto doc = parse_svg(fixture_text("overlap_fixture.svg")).document;
    const LuminanceRaster white(200, 150, 1.0);
    CHECK(r_ove(doc) > 0);
    CHECK(in_canvas_fraction(render(doc, white)) < 1.0);

    GreedyFixerPolicy policy(doc);
    const Query q { "overlap", "", "Open House\nSaturday afternoon\nfree entry", doc.canvas };
    const auto result = run_loop(policy, q, white, HeuristicScorer {});
    const auto& t = result.trajectory;
    CHECK(t.terminated_by == Termination::Satisfaction);
    CHECK(t.tool_call_count() <= 4);
    CHECK(t.tool_call_count() - 1 <= 3); // revisions after the first render
    CHECK(result.r_format == 1.0);

    const auto fixed = parse_svg(result.final_svg).document;
    CHECK(r_ove(fixed) == 0);
    CHECK(in_canvas_fraction(render(fixed, white)) == 1.0);
    CHECK(t.rounds.back().r_score >= t.rounds.front().r_score);
    // nothing was deleted or rewritten
    CHECK(extract_text(fixed) == extract_text(doc));
}

TEST_CASE("greedy fixer leaves clean layouts alone")
{
    const Poster p;
    CHECK(GreedyFixerPolicy::fix(p.doc, {}) == p.doc);
    GreedyFixerPolicy policy(p.doc);
    const auto result = run_loop(policy, p.query, p.background, HeuristicScorer {});
    CHECK(result.trajectory.tool_call_count() == 1);
}

TEST_CASE("greedy fixer improves the crafted drafts")
{
    for (const auto& c: crafted_fixer_corpus(10, 3))
    {
        GreedyFixerPolicy policy(c.doc);
        const auto result = run_loop(policy, query_for(c), c.background, HeuristicScorer {});
        const auto& t = result.trajectory;
        CAPTURE(c.id);
        CHECK(t.tool_call_count() <= 4);
        CHECK(result.r_format == 1.0);
        CHECK(t.rounds.back().r_score >= t.rounds.front().r_score);
    }
}

TEST_CASE("unparsable SVG scores the fallback value and breaks the format")
{
    const Poster p;
    const auto good = serialize_svg(p.doc);
    ScriptedPolicy policy({ "<svg width='10'", good, good });
    const auto result = run_loop(policy, p.query, p.background, HeuristicScorer {});
    const auto& t = result.trajectory;
    REQUIRE(t.rounds.size() == 3);
    CHECK(t.rounds[0].r_score == -1.0);
    CHECK_FALSE(t.rounds[0].format_ok);
    CHECK_FALSE(t.rounds[0].render_ref.has_value());
    CHECK_FALSE(result.breakdowns[0].has_value());
    CHECK(result.r_format == -1.0);
    CHECK(result.final_svg == good);

    // every round invalid: the closing answer carries the last attempt
    ScriptedPolicy broken({ "x", "y", "z", "w", "v" });
    const auto bad = run_loop(broken, p.query, p.background, HeuristicScorer {});
    CHECK(bad.trajectory.rounds.size() == 5);
    CHECK(bad.final_svg.empty());
    CHECK(bad.trajectory.rounds.back().r_score == -1.0);
}

TEST_CASE("round count never exceeds the cap plus the answer")
{
    for (const auto& c: synth_corpus(10, 8))
    {
        RandomPerturberPolicy policy(c.doc, derive_seed(5, c.id));
        const auto result = run_loop(policy, query_for(c), c.background, HeuristicScorer {});
        CHECK(result.trajectory.rounds.size() <= 5);
        CHECK(result.trajectory.tool_call_count() <= 4);
        CHECK(result.r_format == 1.0);
        const auto r = to_rollout(result);
        CHECK_NOTHROW(r.validate(4));
    }
}

TEST_CASE("trajectory transcript and JSONL round-trip")
{
    const Poster p;
    GreedyFixerPolicy policy(parse_svg(fixture_text("overlap_fixture.svg")).document);
    const auto result = run_loop(policy, p.query, p.background, HeuristicScorer {});
    const auto& t = result.trajectory;

    const auto back = parse_trajectory_jsonl(to_jsonl(t, result.r_format));
    CHECK(back == t);

    const auto text = serialize_trajectory(t);
    const auto parsed = parse_trajectory(text);
    REQUIRE(parsed.rounds.size() == t.rounds.size());
    for (size_t i = 0; i < t.rounds.size(); ++i)
    {
        CHECK(parsed.rounds[i].think == t.rounds[i].think);
        CHECK(parsed.rounds[i].action == t.rounds[i].action);
        CHECK(parsed.rounds[i].svg == t.rounds[i].svg);
    }
    CHECK(serialize_trajectory(parsed) == text);
    CHECK(check_format(parsed) == 1.0);

    // the JSONL line doubles as a rollout record
    const auto rollout = parse_rollout(to_jsonl(t, result.r_format));
    CHECK(rollout == to_rollout(result));
}

TEST_CASE("external policy speaks JSON over stdin and stdout")
{
    TempDir dir("policy");
    const Poster p;
    const nlohmann::json reply = { { "think", "done" },
                                   { "action", { { "type", "answer" }, { "svg", serialize_svg(p.doc) } } } };
    write_file(dir / "reply.json", reply.dump());
    const std::string request_copy = (dir / "request.json").string();

    ExternalPolicy policy("cat > '" + request_copy + "'; cat '" + (dir / "reply.json").string() + "'");
    const auto result = run_loop(policy, p.query, p.background, HeuristicScorer {});
    CHECK(result.trajectory.rounds.size() == 1);
    CHECK(result.trajectory.tool_call_count() == 0);
    CHECK(result.final_svg == serialize_svg(p.doc));

    const auto request = nlohmann::json::parse(read_file(request_copy));
    CHECK(request["tool_calls_left"] == 4);
    CHECK(request["history"].empty());
    CHECK(request["query"]["id"] == "poster");

    ExternalPolicy failing("cat >/dev/null; exit 4");
    CHECK_THROWS_AS((void)run_loop(failing, p.query, p.background, HeuristicScorer {}), ExternalToolError);
    ExternalPolicy garbage("cat >/dev/null; echo nope");
    CHECK_THROWS_AS((void)run_loop(garbage, p.query, p.background, HeuristicScorer {}), ExternalToolError);
}

TEST_CASE("per-round renders are written when asked")
{
    TempDir dir("dump");
    const Poster p;
    OraclePolicy policy(p.doc);
    LoopOptions opts;
    opts.dump_dir = dir / "renders";
    const auto result = run_loop(policy, p.query, p.background, HeuristicScorer {}, opts);
    CHECK(load_image(dir / "renders" / "poster_render0.png") == result.renders[0].raster);
}
