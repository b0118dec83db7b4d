// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <layoutloop/advantage.hpp>
#include <layoutloop/cli.hpp>
#include <layoutloop/config.hpp>
#include <layoutloop/error.hpp>
#include <layoutloop/perturb.hpp>

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace layoutloop;
using namespace testing_support;

namespace
{

struct CliRun
{
    int code = -1;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args, std::vector<std::string> env = {})
{
    args.insert(args.begin(), "layoutloop");
    std::vector<const char*> argv;
    for (const auto& a: args)
        argv.push_back(a.c_str());
    std::vector<char*> envp;
    for (auto& e: env)
        envp.push_back(e.data());
    envp.push_back(nullptr);
    std::ostringstream out, err;
    CliRun r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), envp.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<nlohmann::json> json_lines(const std::string& text)
{
    std::vector<nlohmann::json> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            out.push_back(nlohmann::json::parse(line));
    return out;
}

size_t line_count(const std::string& text)
{
    return static_cast<size_t>(std::count(text.begin(), text.end(), '\n'));
}

/// Runs the whole file pipeline in `root` and returns every produced file keyed by relative path.
std::map<std::string, std::string> pipeline(const fs::path& root)
{
    const auto s = [](const fs::path& p) { return p.string(); };
    REQUIRE(cli({ "--seed", "5", "synth", "--out", s(root / "corpus"), "--count", "6" }).code == 0);
    REQUIRE(cli({ "--seed", "5", "perturb", "--corpus", s(root / "corpus"), "--out", s(root / "levels") }).code == 0);
    REQUIRE(cli({ "pairs", "--levels", s(root / "levels"), "--out", s(root / "pairs.jsonl") }).code == 0);
    REQUIRE(cli({ "--seed", "5", "rm-train", "--pairs", s(root / "pairs.jsonl"), "--out", s(root / "model.json"),
                  "--steps", "50" })
                .code
            == 0);
    REQUIRE(cli({ "--seed", "5", "simulate", "--policy", "random-perturber", "--corpus", s(root / "corpus"), "--out",
                  s(root / "traj.jsonl") })
                .code
            == 0);
    REQUIRE(cli({ "advantages", "--scheme", "process", "--in", s(root / "traj.jsonl"), "--out", s(root / "adv.jsonl") })
                .code
            == 0);
    REQUIRE(cli({ "eval", "--json", s(root / "corpus"), "--out", s(root / "eval.jsonl") }).code == 0);

    std::map<std::string, std::string> files;
    for (const auto& e: fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            files[fs::relative(e.path(), root).string()] = read_file(e.path());
    return files;
}

} // namespace

TEST_CASE("environment names map to config keys")
{
    CHECK(env_to_key("LAYOUTLOOP_REWARD_ALPHA") == "reward.alpha");
    CHECK(env_to_key("LAYOUTLOOP_SEED") == "seed");
    CHECK(env_to_key("LAYOUTLOOP_PERTURB_L4_TEXT_DELETE_P") == "perturb.l4_text_delete_p");
    CHECK(env_to_key("LAYOUTLOOP_N_MAX") == "n_max");
    CHECK_FALSE(env_to_key("HOME").has_value());
    CHECK_FALSE(env_to_key("layoutloop_seed").has_value());
}

TEST_CASE("config file, overrides and validation")
{
    TempDir dir("cfg");
    write_file(dir / "a.toml", "seed = 9 # comment\n[reward]\nalpha = 0.5\nscorer = \"heuristic\"\n[perturb]\nl3_offset_frac = 0.2\n");
    RunConfig cfg;
    apply_config_file(cfg, dir / "a.toml");
    CHECK(cfg.seed == 9);
    CHECK(cfg.perturb.seed == 9);
    CHECK(cfg.reward.alpha == 0.5);
    CHECK(cfg.perturb.l3_offset_frac == 0.2);
    CHECK_NOTHROW(cfg.validate());

    CHECK_THROWS_AS(cfg.set("reward.nope", "1"), ConfigError);
    CHECK_THROWS_AS(cfg.set("reward.alpha", "abc"), ConfigError);
    write_file(dir / "b.toml", "[reward]\nalpha = [1, 2]\n");
    CHECK_THROWS_AS(apply_config_file(cfg, dir / "b.toml"), ConfigError);

    RunConfig bad;
    bad.corpus_dir = dir / "missing";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = RunConfig {};
    bad.scorer = "learned";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("precedence: file, then --set, then flags, then environment")
{
    TempDir dir("prec");
    const auto rollouts = fixture("hand_rollouts.jsonl").string();
    write_file(dir / "c.toml", "[reward]\ngamma = 0.5\n[loop]\nn_max = 3\n");
    const std::string cfg = (dir / "c.toml").string();

    auto first_raw = [&](std::vector<std::string> args, std::vector<std::string> env = {}) {
        const auto r = cli(std::move(args), std::move(env));
        REQUIRE(r.code == 0);
        return json_lines(r.out).front()["a_raw"].get<double>();
    };
    // outcome: first rollout raw = 1 - 2 + gamma
    CHECK(first_raw({ "--config", cfg, "advantages", "--in", rollouts }) == doctest::Approx(-0.5));
    CHECK(first_raw({ "--config", cfg, "--set", "reward.gamma=0.3", "advantages", "--in", rollouts })
          == doctest::Approx(-0.7));
    CHECK(first_raw({ "--config", cfg, "--set", "reward.gamma=0.3", "advantages", "--in", rollouts },
                    { "LAYOUTLOOP_REWARD_GAMMA=0.2" })
          == doctest::Approx(-0.8));

    // process: first rollout raw = 2 (0.7 - 2 (1 - 3)(n_max - 1))
    auto process = [&](int n_max) { return 2 * (0.7 + 4.0 * (n_max - 1)); };
    CHECK(first_raw({ "--config", cfg, "advantages", "--scheme", "process", "--in", rollouts })
          == doctest::Approx(process(3)));
    CHECK(first_raw({ "--config", cfg, "--set", "loop.n_max=2", "--n-max", "5", "advantages", "--scheme", "process",
                      "--in", rollouts })
          == doctest::Approx(process(5)));
    CHECK(first_raw({ "--config", cfg, "--n-max", "5", "advantages", "--scheme", "process", "--in", rollouts },
                    { "LAYOUTLOOP_LOOP_N_MAX=6" })
          == doctest::Approx(process(6)));
}

TEST_CASE("eval on the no-text fixture")
{
    const auto r = cli({ "eval", "--json", fixture("notext.svg").string() });
    REQUIRE(r.code == 0);
    const auto rows = json_lines(r.out);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["breakdown"]["graphic"]["r_ove"] == 0.0);
    CHECK(rows[0]["breakdown"]["graphic"]["r_ali"] == 0.0);

    const auto table = cli({ "eval", fixture("notext.svg").string() });
    REQUIRE(table.code == 0);
    CHECK(table.out.find("notext") != std::string::npos);
    CHECK(line_count(table.out) == 2);
}

TEST_CASE("pairs over ten prompts gives sixty records")
{
    TempDir dir("pairs");
    const auto s = [](const fs::path& p) { return p.string(); };
    REQUIRE(cli({ "synth", "--out", s(dir / "c"), "--count", "10" }).code == 0);
    REQUIRE(cli({ "perturb", "--corpus", s(dir / "c"), "--out", s(dir / "l") }).code == 0);
    const auto r = cli({ "pairs", "--levels", s(dir / "l") });
    REQUIRE(r.code == 0);
    const auto lines = json_lines(r.out);
    CHECK(lines.size() == 60);
    std::map<std::string, int> per_prompt;
    for (const auto& j: lines)
    {
        const auto rec = parse_pair_record(j.dump());
        ++per_prompt[rec.query_id];
    }
    CHECK(per_prompt.size() == 10);
    for (const auto& [id, n]: per_prompt)
        CHECK(n == 6);

    // a level directory with one file missing is an input error
    fs::remove(dir / "l" / "III" / (per_prompt.begin()->first + ".svg"));
    CHECK(cli({ "pairs", "--levels", s(dir / "l") }).code == 2);
}

TEST_CASE("advantages from the CLI equal the library bit for bit")
{
    std::vector<Rollout> rollouts;
    std::ifstream in(fixture("hand_rollouts.jsonl"));
    for (std::string line; std::getline(in, line);)
        rollouts.push_back(parse_rollout(line));
    const auto expected = outcome_advantages(group_rollouts(rollouts), 0.1);

    const auto r = cli({ "advantages", "--scheme", "outcome", "--in", fixture("hand_rollouts.jsonl").string() });
    REQUIRE(r.code == 0);
    const auto rows = json_lines(r.out);
    REQUIRE(rows.size() == expected.records.size());
    for (size_t i = 0; i < rows.size(); ++i)
    {
        CHECK(rows[i]["a_raw"].get<double>() == expected.records[i].a_raw);
        CHECK(rows[i]["a"].get<double>() == expected.records[i].a);
        CHECK(rows[i]["round"].is_null());
    }
    std::string text;
    for (const auto& rec: expected.records)
        text += to_jsonl(rec) + "\n";
    CHECK(r.out == text);
}

TEST_CASE("fixed-seed pipeline runs are byte-identical")
{
    TempDir a("runa"), b("runb");
    const auto fa = pipeline(a.path());
    const auto fb = pipeline(b.path());
    CHECK(fa.size() == fb.size());
    for (const auto& [name, content]: fa)
    {
        CAPTURE(name);
        REQUIRE(fb.contains(name));
        if (name == "pairs.jsonl" || name == "eval.jsonl" || name == "traj.jsonl")
            continue; // these embed absolute paths that differ between the two directories
        CHECK(fb.at(name) == content);
    }
    // with the directory prefix removed the path-bearing files match too
    for (const auto* name: { "pairs.jsonl", "eval.jsonl", "traj.jsonl" })
    {
        auto x = fa.at(name), y = fb.at(name);
        for (auto* s: { &x, &y })
        {
            const std::string prefix = (s == &x ? a.path() : b.path()).string();
            for (size_t pos; (pos = s->find(prefix)) != std::string::npos;)
                s->erase(pos, prefix.size());
        }
        CHECK(x == y);
    }
}

TEST_CASE("exit codes")
{
    CHECK(cli({}).code == 2);
    CHECK(cli({ "frobnicate" }).code == 2);
    CHECK(cli({ "advantages", "--in", "/nonexistent.jsonl" }).code == 2);
    CHECK(cli({ "eval", "/nonexistent.svg" }).code == 2);
    CHECK(cli({ "--set", "bogus=1", "eval", fixture("poster.svg").string() }).code == 2);
    CHECK(cli({ "eval", fixture("poster.svg").string() }, { "LAYOUTLOOP_REWARD_ALPHA=oops" }).code == 2);
    CHECK(cli({ "--help" }).code == 0);

    TempDir dir("codes");
    write_file(dir / "bad.jsonl", "{\"query_id\": 1}\n");
    CHECK(cli({ "advantages", "--in", (dir / "bad.jsonl").string() }).code == 2);
    write_file(dir / "broken.svg", "<svg width=\"10\" height=\"10\"><text>");
    const auto r = cli({ "eval", (dir / "broken.svg").string() });
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("the installed binary behaves like the in-process entry point")
{
    TempDir dir("bin");
    const std::string bin = LAYOUTLOOP_CLI_PATH;
    const auto run = [&](const std::string& args) {
        const int status = std::system((bin + " " + args + " > " + (dir / "out.txt").string() + " 2>/dev/null").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    CHECK(run("advantages --in " + fixture("hand_rollouts.jsonl").string()) == 0);
    CHECK(read_file(dir / "out.txt") == cli({ "advantages", "--in", fixture("hand_rollouts.jsonl").string() }).out);
    CHECK(run("eval /nonexistent.svg") == 2);
    CHECK(run("no-such-command") == 2);
}
