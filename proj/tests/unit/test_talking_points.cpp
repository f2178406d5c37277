#include <gtest/gtest.h>

#include <filesystem>

#include "discourse/gateway/gateway.hpp"
#include "discourse/gateway/mock.hpp"
#include "discourse/hashing.hpp"
#include "discourse/talking_points.hpp"

using namespace discourse;

namespace {

const std::string kCanonical = R"({"talking_points": [
  {"summary": "Senate passes the climate bill", "entities": ["Senate", "climate bill"], "activities": [
    {"description": "passed", "actor": "Senate", "target": "climate bill", "sentiment": "positive", "frame": "Political"},
    {"description": "criticized", "actor": "Critics", "target": "Senate", "sentiment": "negative", "frame": "Economic"}]},
  {"summary": "Costs will rise for families", "entities": ["families"], "activities": [
    {"description": "warned", "actor": "Analysts", "target": "families", "sentiment": "negative", "frame": "Quality of Life"}]}
]})";

const std::string kPoint0 =
    R"({"summary": "Senate passes the climate bill", "entities": ["Senate", "climate bill"], "activities": [
    {"description": "passed", "actor": "Senate", "target": "climate bill", "sentiment": "positive", "frame": "Political"},
    {"description": "criticized", "actor": "Critics", "target": "Senate", "sentiment": "negative", "frame": "Economic"}]})";
const std::string kPoint1 = R"({"summary": "Costs will rise for families", "entities": ["families"], "activities": [
    {"description": "warned", "actor": "Analysts", "target": "families", "sentiment": "negative", "frame": "Quality of Life"}]})";

std::string replace_first(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    if (pos == std::string::npos) throw std::logic_error("mutation anchor not found: " + from);
    return s.replace(pos, from.size(), to);
}

std::string replace_every(std::string s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string unquote_keys(std::string s) {
    for (const char* k : {"talking_points", "summary", "entities", "activities", "description", "actor", "target",
                          "sentiment", "frame"})
        s = replace_every(s, std::string("\"") + k + "\":", std::string(k) + ":");
    return s;
}

struct Mutation {
    std::string name;
    std::string payload;
    int points;      // -1: nothing recoverable, the article is skipped
    int activities;  // total across kept points
};

std::vector<Mutation> mutations() {
    const auto& c = kCanonical;
    const std::string body = c.substr(c.find('['), c.rfind(']') - c.find('[') + 1);
    const std::string wrapped = "{\"talking_points\": [" + kPoint0 + ", " + kPoint1 + ", " + kPoint0 + ", " + kPoint1 +
                                ", " + kPoint0 + ", " + kPoint1 + "]}";
    return {
        {"identity", c, 2, 3},
        {"trailing comma after last point", replace_first(c, "]}\n]}", "]},\n]}"), 2, 3},
        {"trailing comma inside activity", replace_first(c, "\"Political\"}", "\"Political\",}"), 2, 3},
        {"unquoted keys", unquote_keys(c), 2, 3},
        {"single quotes", replace_every(c, "\"", "'"), 2, 3},
        {"code fence", "```json\n" + c + "\n```", 2, 3},
        {"prose around", "Here are the points:\n" + c + "\nHope this helps!", 2, 3},
        {"smart quotes", replace_every(c, "\"", "\xE2\x80\x9C"), 2, 3},
        {"missing closers", c.substr(0, c.size() - 3), 2, 3},
        {"truncated inside second point", c.substr(0, c.find("\"entities\": [\"families\"]")), 2, 2},
        {"bare array", body, 2, 3},
        {"alternate list key", replace_first(c, "talking_points", "points"), 2, 3},
        {"camel case list key", replace_first(c, "talking_points", "talkingPoints"), 2, 3},
        {"single point object", kPoint0, 1, 2},
        {"activity missing actor", replace_first(c, "\"actor\": \"Senate\", ", ""), 2, 2},
        {"activity missing target", replace_first(c, ", \"target\": \"families\"", ""), 2, 2},
        {"empty actor", replace_first(c, "\"actor\": \"Critics\"", "\"actor\": \"  \""), 2, 2},
        {"sentiment capitalized", replace_first(c, "\"positive\"", "\"Positive\""), 2, 3},
        {"sentiment neutral", replace_first(c, "\"positive\"", "\"neutral\""), 2, 2},
        {"sentiment numeric positive", replace_first(c, "\"positive\"", "1"), 2, 3},
        {"sentiment numeric zero", replace_first(c, "\"positive\"", "0"), 2, 2},
        {"sentiment missing", replace_first(c, ", \"sentiment\": \"positive\"", ""), 2, 2},
        {"frame alias", replace_first(c, "\"Economic\"", "\"economics\""), 2, 3},
        {"frame unknown", replace_first(c, "\"Economic\"", "\"Banana\""), 2, 3},
        {"frame missing", replace_first(c, ", \"frame\": \"Political\"", ""), 2, 3},
        {"frame ampersand", replace_first(c, "\"Economic\"", "\"Security & Defense\""), 2, 3},
        {"frame typo", replace_first(c, "\"Economic\"", "\"Economc\""), 2, 3},
        {"summary missing", replace_first(c, "\"summary\": \"Senate passes the climate bill\", ", ""), 1, 1},
        {"summary empty", replace_first(c, "\"Senate passes the climate bill\"", "\"\""), 1, 1},
        {"summary null", replace_first(c, "\"Senate passes the climate bill\"", "null"), 1, 1},
        {"summary numeric", replace_first(c, "\"Senate passes the climate bill\"", "42"), 2, 3},
        {"entities as string", replace_first(c, "[\"Senate\", \"climate bill\"]", "\"Senate, climate bill\""), 2, 3},
        {"entities missing", replace_first(c, "\"entities\": [\"families\"], ", ""), 2, 3},
        {"activities single object",
         replace_first(replace_first(c, "\"activities\": [\n    {\"description\": \"warned\"", "\"activities\": {\"description\": \"warned\""),
                       "\"Quality of Life\"}]}", "\"Quality of Life\"}}"),
         2, 3},
        {"activities string", replace_first(c, "\"activities\": [\n    {\"description\": \"warned\", \"actor\": \"Analysts\", "
                                               "\"target\": \"families\", \"sentiment\": \"negative\", \"frame\": \"Quality of Life\"}]",
                                            "\"activities\": \"none\""),
         2, 2},
        {"activities null",
         replace_first(c, "\"activities\": [\n    {\"description\": \"passed\"", "\"activities\": null, \"x\": [\n    {\"description\": \"passed\""),
         2, 1},
        {"point is a string", "{\"talking_points\": [" + kPoint0 + ", \"just some text\"]}", 1, 2},
        {"six points capped at four", wrapped, 4, 6},
        {"empty list", "{\"talking_points\": []}", 0, 0},
        {"empty list with prose", "No useful information here.\n{\"talking_points\": []}", 0, 0},
        {"plain refusal", "No useful information.", -1, 0},
        {"empty reply", "", -1, 0},
        {"binary noise", std::string("\x00\xff\xfe\x01garbage", 11), -1, 0},
        {"lone brace", "{", -1, 0},
        {"object without list", "{\"result\": \"ok\"}", -1, 0},
        {"json inside a string", nlohmann::json(c).dump(), -1, 0},
        {"line comments", replace_first(c, "[\n", "[ // points follow\n"), -1, 0},
        {"missing comma between points", replace_first(c, "]},\n  {\"summary\": \"Costs", "]}\n  {\"summary\": \"Costs"), -1, 0},
        {"python literals", replace_first(c, "\"positive\"", "None"), 2, 2},
        {"utf8 bom", "\xEF\xBB\xBF" + c, 2, 3},
        {"crlf line endings", replace_every(c, "\n", "\r\n"), 2, 3},
        {"unicode text", replace_first(c, "Costs will rise", "Co\xC3\xBBts will rise \xE2\x80\x94"), 2, 3},
        {"escaped quotes", replace_first(c, "Costs will rise", "\\\"Costs\\\" will rise"), 2, 3},
        {"unknown extra fields", replace_first(c, "\"summary\": \"Costs", "\"confidence\": 0.9, \"summary\": \"Costs"), 2, 3},
    };
}

}  // namespace

TEST(MediaFrames, ClosedSetWithCanonicalNames) {
    ASSERT_EQ(kMediaFrames.size(), 15u);
    for (auto f : kMediaFrames) EXPECT_EQ(parse_media_frame(to_string(f)), f) << to_string(f);
    EXPECT_EQ(to_string(MediaFrame::legality), "Legality, Constitutionality, Jurisprudence");
    EXPECT_NE(media_frame_menu().find("Quality of Life; Cultural Identity"), std::string::npos);
}

TEST(MediaFrames, AliasesAndCaseFolding) {
    EXPECT_EQ(parse_media_frame("economics"), MediaFrame::economic);
    EXPECT_EQ(parse_media_frame("ECONOMIC"), MediaFrame::economic);
    EXPECT_EQ(parse_media_frame("Crime & Punishment"), MediaFrame::crime_and_punishment);
    EXPECT_EQ(parse_media_frame("legal"), MediaFrame::legality);
    EXPECT_EQ(parse_media_frame("Healt and Safety"), MediaFrame::health_and_safety);
    EXPECT_FALSE(parse_media_frame("banana bread"));
    EXPECT_FALSE(parse_media_frame(""));
}

TEST(TalkingPointParse, CanonicalPayloadRoundTrips) {
    const auto out = parse_talking_point_response(kCanonical, "a1", Ideology::right);
    ASSERT_TRUE(out.points);
    ASSERT_EQ(out.points->size(), 2u);
    EXPECT_TRUE(out.diagnostics.empty());
    const auto& p = (*out.points)[0];
    EXPECT_EQ(p.id, "a1#0");
    EXPECT_EQ(p.ideology, Ideology::right);
    EXPECT_EQ(p.activities[1].frame, MediaFrame::economic);
    EXPECT_EQ(p.activities[0].sentiment, Sentiment::positive);
    EXPECT_EQ(p.entities, (std::vector<std::string>{"Senate", "climate bill", "Critics"}));  // actor closed in
    EXPECT_EQ((*out.points)[1].activities[0].frame, MediaFrame::quality_of_life);

    const nlohmann::json j = *out.points;
    EXPECT_EQ(j.get<std::vector<TalkingPoint>>(), *out.points);
}

TEST(TalkingPointParse, UnknownFrameBecomesOtherWithDiagnostic) {
    const auto out = parse_talking_point_response(replace_first(kCanonical, "\"Economic\"", "\"Banana\""), "a", Ideology::left);
    EXPECT_EQ((*out.points)[0].activities[1].frame, MediaFrame::other);
    ASSERT_EQ(out.diagnostics.size(), 1u);
    EXPECT_NE(out.diagnostics[0].message.find("Banana"), std::string::npos);
}

TEST(TalkingPointParse, DroppedActivityIsItemized) {
    const auto out =
        parse_talking_point_response(replace_first(kCanonical, "\"actor\": \"Senate\", ", ""), "a", Ideology::left);
    ASSERT_EQ(out.points->size(), 2u);
    EXPECT_EQ((*out.points)[0].activities.size(), 1u);
    ASSERT_EQ(out.diagnostics.size(), 1u);
    EXPECT_NE(out.diagnostics[0].message.find("actor"), std::string::npos);
    EXPECT_NE(out.diagnostics[0].where.find("point 0"), std::string::npos);
}

TEST(TalkingPointParse, MutationCorpusOutcomes) {
    const auto cases = mutations();
    ASSERT_GE(cases.size(), 50u);
    for (const auto& m : cases) {
        SCOPED_TRACE(m.name);
        const auto out = parse_talking_point_response(m.payload, "art", Ideology::left);
        if (m.points < 0) {
            EXPECT_FALSE(out.points.has_value());
            EXPECT_FALSE(out.diagnostics.empty());
            continue;
        }
        ASSERT_TRUE(out.points.has_value());
        EXPECT_EQ(static_cast<int>(out.points->size()), m.points);
        int activities = 0;
        for (const auto& p : *out.points) {
            activities += static_cast<int>(p.activities.size());
            EXPECT_TRUE(validate(p).empty());
        }
        EXPECT_EQ(activities, m.activities);
    }
}

TEST(TalkingPointParse, NeverThrowsOnRandomBytes) {
    SplitMix64 rng(2024);
    const auto cases = mutations();
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        if (i % 2 == 0) {
            s.resize(rng.below(200));
            for (auto& ch : s) ch = static_cast<char>(rng.below(256));
        } else {
            s = cases[rng.below(cases.size())].payload;
            for (int e = 0, n = 1 + static_cast<int>(rng.below(6)); e < n && !s.empty(); ++e) {
                const auto pos = rng.below(s.size());
                switch (rng.below(3)) {
                    case 0: s.erase(pos, 1 + rng.below(4)); break;
                    case 1: s.insert(pos, 1, "{}[],:\"'"[rng.below(8)]); break;
                    default: s[pos] = static_cast<char>(rng.below(256));
                }
            }
        }
        ParseOutcome out;
        ASSERT_NO_THROW(out = parse_talking_point_response(s, "fz", Ideology::right));
        if (out.points) {
            EXPECT_LE(out.points->size(), kMaxPointsPerArticle);
            for (const auto& p : *out.points) EXPECT_TRUE(validate(p).empty());
        }
    }
}

TEST(TalkingPointValidate, ReportsEveryBrokenInvariant) {
    TalkingPoint p;
    p.id = "a#0";
    p.article_id = "a";
    p.summary = "s";
    p.activities.push_back({"d", "Actor", "", Sentiment::positive, MediaFrame::other});
    const auto problems = validate(p);
    EXPECT_EQ(problems.size(), 2u);  // empty target, actor missing from entities
    close_entities(p);
    EXPECT_EQ(validate(p).size(), 1u);
    Article a;
    a.id = "a";
    a.bias = Ideology::right;
    p.activities[0].target = "T";
    close_entities(p);
    EXPECT_EQ(validate(p).size(), 0u);
    EXPECT_EQ(validate(p, &a).size(), 1u);  // ideology mismatch
}

namespace {

Article article(const std::string& id, Ideology bias) {
    Article a;
    a.id = id;
    a.event_id = "e";
    a.title = "Title " + id;
    a.body = "Body of " + id;
    a.source = "S";
    a.bias = bias;
    return a;
}

std::unique_ptr<gateway::ModelGateway> scripted(std::shared_ptr<gateway::ScriptedChatBackend> chat) {
    gateway::GatewayOptions o;
    o.retry.max_attempts = 1;
    o.max_in_flight = 1;
    return std::make_unique<gateway::ModelGateway>(chat, std::make_shared<gateway::HashEmbeddingBackend>(8), o);
}

}  // namespace

TEST(TalkingPointExtract, InheritsIdeologyFromArticle) {
    auto chat = std::make_shared<gateway::ScriptedChatBackend>(std::vector<std::string>{kCanonical});
    auto gw = scripted(chat);
    const auto a = article("x", Ideology::right);
    const auto r = extract_talking_points(a, *gw);
    ASSERT_EQ(r.points.size(), 2u);
    for (const auto& p : r.points) EXPECT_TRUE(validate(p, &a).empty());
    EXPECT_EQ(chat->requests()[0].template_id, "extract_talking_points");
}

TEST(TalkingPointExtract, RepairRoundTripThenSkip) {
    auto chat = std::make_shared<gateway::ScriptedChatBackend>(std::vector<std::string>{"sorry", kCanonical});
    auto gw = scripted(chat);
    const auto r = extract_talking_points(article("x", Ideology::left), *gw);
    EXPECT_EQ(r.points.size(), 2u);
    EXPECT_FALSE(r.skipped);
    EXPECT_EQ(chat->requests()[1].template_id, "repair_json");
    EXPECT_NE(chat->requests()[1].rendered_prompt.find("sorry"), std::string::npos);

    chat->push("nope");
    chat->push("still nope");
    const auto skipped = extract_talking_points(article("y", Ideology::left), *gw);
    EXPECT_TRUE(skipped.skipped);
    EXPECT_TRUE(skipped.points.empty());
    EXPECT_FALSE(skipped.diagnostics.empty());
}

TEST(TalkingPointExtract, SixPointsTruncatedToFour) {
    std::string six = "[";
    for (int i = 0; i < 6; ++i) six += (i ? "," : "") + std::string("{\"summary\": \"p") + std::to_string(i) + "\"}";
    six += "]";
    auto chat = std::make_shared<gateway::ScriptedChatBackend>(std::vector<std::string>{six});
    auto gw = scripted(chat);
    const auto r = extract_talking_points(article("x", Ideology::left), *gw);
    ASSERT_EQ(r.points.size(), 4u);
    EXPECT_EQ(r.points[3].summary, "p3");
    EXPECT_EQ(r.diagnostics.size(), 1u);
}

TEST(TalkingPointExtract, BatchIsOrderedAndSurvivesFailures) {
    auto chat = std::make_shared<gateway::ScriptedChatBackend>([](const gateway::ChatRequest& r) -> std::string {
        if (r.template_id == "repair_json") return "still broken";
        const auto& title = r.variables.at("title");
        if (title == "Title b") throw gateway::ContentError("filtered");
        if (title == "Title c") return "garbage";
        return "[{\"summary\": \"about " + title + "\"}]";
    });
    gateway::GatewayOptions o;
    o.retry.max_attempts = 1;
    o.max_in_flight = 4;
    gateway::ModelGateway gw(chat, std::make_shared<gateway::HashEmbeddingBackend>(8), o);
    const auto d = article("d", Ideology::right), a = article("a", Ideology::left), b = article("b", Ideology::left),
               c = article("c", Ideology::left);
    const auto batch = extract_all({&d, &c, &b, &a}, gw);
    ASSERT_EQ(batch.points.size(), 2u);
    EXPECT_EQ(batch.points[0].id, "a#0");
    EXPECT_EQ(batch.points[1].id, "d#0");
    EXPECT_EQ(batch.points[1].ideology, Ideology::right);
    EXPECT_EQ(batch.articles_skipped, 2u);
}

TEST(TalkingPointFiles, JsonlRoundTripKeepsEmbeddings) {
    auto out = parse_talking_point_response(kCanonical, "a1", Ideology::left);
    auto points = *out.points;
    points[0].embedding = EmbeddingVector({0.6, 0.8});
    const auto path = std::filesystem::temp_directory_path() / "discourse_tp_roundtrip.jsonl";
    write_talking_points(path, points);
    EXPECT_EQ(read_talking_points(path), points);
    std::filesystem::remove(path);
}
