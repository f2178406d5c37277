#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "discourse/pipeline.hpp"

using namespace discourse;
using namespace discourse::pipeline;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtureConfig = DISCOURSE_FIXTURE_CONFIG;

EnvLookup env_with(std::map<std::string, std::string> vars) {
    return [vars](const std::string& name) -> std::optional<std::string> {
        auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("discourse_pipeline_" + name);
    fs::remove_all(dir);
    return dir;
}

PipelineConfig fixture_config(const fs::path& out) {
    return load_config(kFixtureConfig, env_with({{"DISCOURSE_OUT", out.string()}}));
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text, "/base", env_with({})).validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

struct CliResult {
    int status = -1;
    std::string output;
};

CliResult run_cli(const std::string& args, const fs::path& out) {
    const std::string cmd = "DISCOURSE_OUT='" + out.string() + "' '" DISCOURSE_CLI_PATH "' " + args + " 2>&1";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (const auto n = fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::map<std::string, std::string> checksums(const std::vector<StageOutcome>& outcomes) {
    std::map<std::string, std::string> all;
    for (const auto& o : outcomes) all.insert(o.artifacts.begin(), o.artifacts.end());
    return all;
}

}  // namespace

TEST(PipelineConfig, DefaultsMatchStatedValues) {
    const auto c = parse_config("articles = a.jsonl\nbias_map = b.csv\n", "/base", env_with({}));
    EXPECT_DOUBLE_EQ(c.membership_threshold, 0.85);
    EXPECT_DOUBLE_EQ(c.unseen_threshold, 0.86);
    EXPECT_EQ(c.own_points, 5u);
    EXPECT_EQ(c.opposing_points, 3u);
    EXPECT_EQ(c.topk, 3u);
    EXPECT_EQ(c.negatives, 3u);
    EXPECT_EQ(c.articles, fs::path("/base/a.jsonl"));
    EXPECT_NO_THROW(c.validate());
}

TEST(PipelineConfig, ErrorsNameTheField) {
    const std::string base = "articles = a\nbias_map = b\n";
    EXPECT_EQ(config_error(base + "membership_threshold = 1.5").rfind("membership_threshold", 0), 0u);
    EXPECT_EQ(config_error(base + "unseen_threshold = -0.1").rfind("unseen_threshold", 0), 0u);
    EXPECT_EQ(config_error(base + "own_points = 0").rfind("own_points", 0), 0u);
    EXPECT_EQ(config_error(base + "topk = many").rfind("topk", 0), 0u);
    EXPECT_EQ(config_error(base + "colour = blue").rfind("colour", 0), 0u);
    EXPECT_EQ(config_error(base + "backend = live").rfind("chat_url", 0), 0u);
    EXPECT_EQ(config_error("bias_map = b").rfind("articles", 0), 0u);
    EXPECT_EQ(config_error(base + "eval_methods = direct, guess").rfind("eval_methods", 0), 0u);
    EXPECT_NE(config_error(base + "just words").find("line 3"), std::string::npos);
}

TEST(PipelineConfig, EnvironmentInterpolation) {
    const auto env = env_with({{"ROOT", "/data"}, {"KEY", "SECRET_VAR"}});
    const auto c = parse_config("articles = ${ROOT}/a.jsonl  # trailing comment\nbias_map = b\napi_key_env = ${KEY}\n",
                                "/base", env);
    EXPECT_EQ(c.articles, fs::path("/data/a.jsonl"));
    EXPECT_EQ(c.api_key_env, "SECRET_VAR");
    try {
        parse_config("output_dir = ${MISSING}\n", "/base", env);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("MISSING"), std::string::npos);
        EXPECT_EQ(std::string(e.what()).rfind("output_dir", 0), 0u);
    }
    EXPECT_THROW(parse_config("output_dir = ${OPEN\n", "/base", env), ConfigError);
}

TEST(PipelineConfig, DescribeRoundTrips) {
    const auto out = fresh_dir("describe");
    const auto c = fixture_config(out);
    const auto again = parse_config(describe(c), "/elsewhere", env_with({}));
    EXPECT_EQ(describe(again), describe(c));
}

TEST(PipelineStages, ExpandCommand) {
    EXPECT_EQ(expand_command("all").size(), 7u);
    EXPECT_EQ(expand_command("export-finetune"), std::vector<Stage>{Stage::export_finetune});
    EXPECT_THROW(expand_command("train"), ConfigError);
    for (auto s : kStageOrder) EXPECT_EQ(parse_stage(to_string(s)), s);
}

TEST(PipelineRunner, MissingPrerequisiteNamesTheFile) {
    const auto out = fresh_dir("missing");
    auto c = fixture_config(out);
    c.articles = out / "absent" / "articles.jsonl";
    Runner runner(c, make_backends(c));
    try {
        runner.run({Stage::extract});
        FAIL();
    } catch (const MissingPrerequisite& e) {
        EXPECT_NE(std::string(e.what()).find("articles.jsonl"), std::string::npos);
    }

    Runner fresh(fixture_config(out), make_backends(fixture_config(out)));
    try {
        fresh.run({Stage::cluster});
        FAIL();
    } catch (const MissingPrerequisite& e) {
        EXPECT_NE(std::string(e.what()).find("talking_points.jsonl"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("extract"), std::string::npos);
    }
    fs::remove_all(out);
}

TEST(PipelineRunner, RerunIsNoOpAndAllEqualsStageSequence) {
    const auto a = fresh_dir("all");
    const auto b = fresh_dir("manual");
    const auto ca = fixture_config(a);
    Runner all(ca, make_backends(ca));
    std::ostringstream summary;
    const auto first = all.run(expand_command("all"), &summary);
    EXPECT_EQ(first.size(), 1u + 6u * 2u);
    for (const auto& o : first) EXPECT_TRUE(o.ran) << to_string(o.stage) << " " << o.event;
    const auto lines = summary.str();
    EXPECT_EQ(static_cast<std::size_t>(std::count(lines.begin(), lines.end(), '\n')), first.size());

    Runner again(ca, make_backends(ca));
    const auto second = again.run(expand_command("all"));
    for (const auto& o : second) EXPECT_FALSE(o.ran) << to_string(o.stage) << " " << o.event;
    EXPECT_EQ(checksums(first), checksums(second));

    const auto cb = fixture_config(b);
    std::vector<StageOutcome> manual;
    for (auto stage : kStageOrder) {
        Runner r(cb, make_backends(cb));
        for (auto& o : r.run({stage})) manual.push_back(o);
    }
    EXPECT_EQ(checksums(first), checksums(manual));

    // Touching one artifact forces only its stage to rerun.
    std::ofstream(b / "border-bill" / "snapshot.svg", std::ios::app) << " ";
    Runner touched(cb, make_backends(cb));
    for (const auto& o : touched.run(expand_command("all")))
        EXPECT_EQ(o.ran, o.stage == Stage::snapshot && o.event == "border-bill") << to_string(o.stage) << " " << o.event;
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(PipelineRunner, EventAndIssueFilters) {
    const auto out = fresh_dir("filters");
    auto c = fixture_config(out);
    c.event = "climate-summit";
    Runner r(c, make_backends(c));
    EXPECT_EQ(r.selected_events(), std::vector<std::string>{"climate-summit"});
    c.event = "no-such-event";
    Runner bad(c, make_backends(c));
    EXPECT_THROW(bad.selected_events(), ConfigError);
    fs::remove_all(out);
}

TEST(PipelineCli, ExitCodes) {
    const auto out = fresh_dir("cli_codes");
    EXPECT_EQ(run_cli("cluster --config '" + kFixtureConfig.string() + "'", out).status, 3);
    const auto bad = run_cli("extract --config '" + kFixtureConfig.string() + "' --set membership_threshold=2", out);
    EXPECT_EQ(bad.status, 2);
    EXPECT_NE(bad.output.find("membership_threshold"), std::string::npos);
    EXPECT_NE(run_cli("train --config x", out).status, 0);
    EXPECT_EQ(run_cli("ingest --config '" + kFixtureConfig.string() + "'", out).status, 0);
    fs::remove_all(out);
}

TEST(PipelineCli, MissingArticlesExitsNonZeroNamingTheFile) {
    const auto dir = fresh_dir("cli_missing");
    fs::create_directories(dir);
    std::ofstream(dir / "run.conf") << "articles = articles.jsonl\nbias_map = bias.csv\noutput_dir = out\n";
    const auto r = run_cli("extract --config '" + (dir / "run.conf").string() + "'", dir / "out");
    EXPECT_EQ(r.status, 3);
    EXPECT_NE(r.output.find("articles.jsonl"), std::string::npos) << r.output;
    fs::remove_all(dir);
}

TEST(PipelineCli, MembershipThresholdOverride) {
    const auto out = fresh_dir("cli_threshold");
    const auto cfg = "--config '" + kFixtureConfig.string() + "' --event border-bill";
    ASSERT_EQ(run_cli("ingest " + cfg, out).status, 0);
    ASSERT_EQ(run_cli("extract " + cfg, out).status, 0);
    const auto r = run_cli("cluster " + cfg + " --membership-threshold 0.76", out);
    ASSERT_EQ(r.status, 0) << r.output;
    std::ifstream in(out / "border-bill" / "ptps.json");
    const auto j = nlohmann::json::parse(in);
    EXPECT_DOUBLE_EQ(j.at("membership_threshold").get<double>(), 0.76);
    const auto rerun = run_cli("cluster " + cfg + " --membership-threshold 0.76", out);
    EXPECT_NE(rerun.output.find("up-to-date"), std::string::npos);
    const auto changed = run_cli("cluster " + cfg, out);
    EXPECT_NE(changed.output.find("\"ran\""), std::string::npos);
    fs::remove_all(out);
}
