#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "discourse/corpus.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace discourse;
namespace dt = discourse::testing;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("discourse_corpus_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path write(const std::string& name, const std::string& content) const {
        std::ofstream(path_ / name) << content;
        return path_ / name;
    }

private:
    fs::path path_;
};

std::string record(const std::string& id, const std::string& event, const std::string& source,
                   const std::string& date = "2024-01-10", const std::string& body = "Some body text.") {
    nlohmann::json j = {{"id", id}, {"event_id", event}, {"title", "T " + id}, {"source", source}, {"published_at", date}};
    if (!body.empty()) j["body"] = body;
    return j.dump() + "\n";
}

const char* kBias = "source,bias\nLeft Wire,left\nRight Wire,right\n\"Comma, Inc\",right\n";

Article dated(const std::string& id, const std::string& date) {
    Article a;
    a.id = id;
    a.event_id = "cand";
    a.body = "b";
    a.source = "Left Wire";
    a.published_at = *parse_iso_date(date);
    return a;
}

/// Unit vector at exactly `cosine` to e0 in the (e0, e1) plane.
EmbeddingVector at_cosine(double cosine, std::size_t dim = 4) {
    std::vector<double> v(dim, 0.0);
    v[0] = cosine;
    v[1] = std::sqrt(1.0 - cosine * cosine);
    return EmbeddingVector(v);
}

}  // namespace

TEST(CorpusDates, ParsesDatesAndTimestamps) {
    EXPECT_EQ(format_iso_date(*parse_iso_date("2024-02-29")), "2024-02-29");
    EXPECT_EQ(format_iso_date(*parse_iso_date("2024-02-29T23:59:00Z")), "2024-02-29");
    EXPECT_FALSE(parse_iso_date("2023-02-29"));
    EXPECT_FALSE(parse_iso_date("yesterday"));
    EXPECT_FALSE(parse_iso_date(""));
}

TEST(CorpusIdeology, LowercaseRoundTrip) {
    EXPECT_EQ(nlohmann::json(Ideology::left), "left");
    EXPECT_EQ(nlohmann::json("right").get<Ideology>(), Ideology::right);
    EXPECT_EQ(parse_ideology("  LEFT "), Ideology::left);
    EXPECT_FALSE(parse_ideology("center"));
    EXPECT_THROW(nlohmann::json("center").get<Ideology>(), std::exception);
}

TEST(CorpusLoad, EmptyFileGivesEmptyCorpus) {
    TempDir t;
    const auto r = load_corpus(t.write("a.jsonl", ""), t.write("b.csv", kBias));
    EXPECT_TRUE(r.corpus.events().empty());
    EXPECT_TRUE(r.corpus.articles().empty());
    EXPECT_TRUE(r.corpus.stats().empty());
    EXPECT_TRUE(r.report.malformed.empty());
}

TEST(CorpusLoad, MissingBodyBecomesOneDiagnostic) {
    TempDir t;
    const auto path = t.write("a.jsonl", record("a1", "e", "Left Wire") + record("a2", "e", "Right Wire", "2024-01-11", "") +
                                             record("a3", "e", "Right Wire"));
    const auto r = load_corpus(path, t.write("b.csv", kBias));
    EXPECT_EQ(r.corpus.articles().size(), 2u);
    ASSERT_EQ(r.report.malformed.size(), 1u);
    EXPECT_EQ(r.report.malformed[0].where, "a.jsonl:2");
    EXPECT_NE(r.report.malformed[0].message.find("body"), std::string::npos);
}

TEST(CorpusLoad, StrictModeThrowsWithLineNumber) {
    TempDir t;
    const auto path = t.write("a.jsonl", record("a1", "e", "Left Wire") + "{not json\n");
    LoadOptions o;
    o.strict = true;
    try {
        load_corpus(path, t.write("b.csv", kBias), o);
        FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
    }
}

TEST(CorpusLoad, UnknownOutletsAreDroppedAndCounted) {
    TempDir t;
    const auto path = t.write("a.jsonl", record("a1", "e", "Left Wire") + record("a2", "e", "Mystery Gazette") +
                                             record("a3", "e", "Mystery Gazette") + record("a4", "e", "Comma, Inc"));
    const auto r = load_corpus(path, t.write("b.csv", kBias));
    EXPECT_EQ(r.corpus.articles().size(), 2u);
    EXPECT_EQ(r.report.dropped_unknown_outlet, 2u);
    EXPECT_EQ(r.report.unknown_outlets.at("Mystery Gazette"), 2u);
    EXPECT_EQ(r.corpus.article("a4").bias, Ideology::right);
}

TEST(CorpusLoad, DuplicateIdIsAnError) {
    TempDir t;
    const auto path = t.write("a.jsonl", record("a1", "e", "Left Wire") + record("a1", "f", "Right Wire"));
    EXPECT_THROW(load_corpus(path, t.write("b.csv", kBias)), CorpusError);
}

TEST(CorpusLoad, UnreadableFileIsAnError) {
    TempDir t;
    EXPECT_THROW(load_corpus("/nonexistent/articles.jsonl", t.write("b.csv", kBias)), CorpusError);
}

TEST(CorpusLoad, BadBiasValueIsAnError) {
    TempDir t;
    EXPECT_THROW(load_bias_map(t.write("b.csv", "source,bias\nX,center\n")), CorpusError);
    EXPECT_THROW(load_bias_map(t.write("c.csv", "outlet,lean\nX,left\n")), CorpusError);
}

TEST(CorpusLoad, FieldMappingRenamesColumns) {
    TempDir t;
    const std::string line =
        R"({"id":"a1","event_id":"e","headline":"H","content":"Body","outlet":"Left Wire","published_at":"2024-01-01"})";
    LoadOptions o;
    o.fields.columns = {{"body", "content"}, {"title", "headline"}, {"source", "outlet"}};
    const auto r = load_corpus(t.write("a.jsonl", line + "\n"), t.write("b.csv", kBias), o);
    ASSERT_EQ(r.corpus.articles().size(), 1u);
    EXPECT_EQ(r.corpus.article("a1").body, "Body");
    EXPECT_EQ(r.corpus.article("a1").title, "H");
}

TEST(CorpusLoad, PartitionAndStatsProperties) {
    const auto r = load_corpus(DISCOURSE_SOURCE_DIR "/data/fixture/articles.jsonl",
                               DISCOURSE_SOURCE_DIR "/data/fixture/bias_map.csv",
                               {.events_path = DISCOURSE_SOURCE_DIR "/data/fixture/events.jsonl"});
    std::size_t total = 0;
    for (const auto& e : r.corpus.events()) {
        EXPECT_FALSE(e.article_ids.empty());
        EXPECT_FALSE(e.title.empty());
        total += e.article_ids.size();
        for (const auto& id : e.article_ids) EXPECT_EQ(r.corpus.article(id).event_id, e.id);
    }
    EXPECT_EQ(total, r.corpus.articles().size());
    EXPECT_EQ(r.corpus.stats(), r.corpus.recompute_stats());
    EXPECT_EQ(r.corpus.stats().at("climate"), (IssueStats{30, 1}));
}

TEST(CorpusConstruct, RejectsBrokenMembership) {
    std::map<std::string, Article> articles = {{"a", dated("a", "2024-01-01")}, {"b", dated("b", "2024-01-01")}};
    EXPECT_THROW(EventCorpus({Event{.id = "e", .article_ids = {"a"}}}, articles), CorpusError);  // b orphaned
    EXPECT_THROW(EventCorpus({Event{.id = "e", .article_ids = {"a", "b", "c"}}}, articles), CorpusError);
    EXPECT_THROW(EventCorpus({Event{.id = "e", .article_ids = {"a", "b"}}, Event{.id = "f", .article_ids = {"a"}}},
                             articles),
                 CorpusError);
    EXPECT_NO_THROW(EventCorpus({Event{.id = "e", .article_ids = {"a", "b"}}}, articles));
}

TEST(CorpusCentroid, SingleArticleCentroidIsItsEmbedding) {
    std::map<std::string, Article> articles = {{"a", dated("a", "2024-01-01")}};
    EventCorpus corpus({Event{.id = "e", .article_ids = {"a"}}}, articles);
    const EmbeddingVector raw({3.0, 4.0});
    corpus.attach_centroids({{"a", raw}});
    const auto& c = *corpus.events()[0].centroid;
    EXPECT_TRUE(c.is_unit());
    EXPECT_NEAR(c[0], 0.6, 1e-12);
    EXPECT_NEAR(c[1], 0.8, 1e-12);
    EventCorpus missing({Event{.id = "e", .article_ids = {"a"}}}, articles);
    EXPECT_THROW(missing.attach_centroids({}), CorpusError);
}

class UnseenSelection : public ::testing::Test {
protected:
    void SetUp() override {
        std::map<std::string, Article> articles = {{"m1", dated("m1", "2024-03-10")}, {"m2", dated("m2", "2024-03-12")}};
        corpus = EventCorpus({Event{.id = "e", .article_ids = {"m1", "m2"}}}, articles);
        event = corpus.events()[0];
        event.centroid = at_cosine(1.0);
    }
    Candidate candidate(const std::string& id, const std::string& date, double cosine) const {
        return {dated(id, date), at_cosine(cosine)};
    }
    EventCorpus corpus;
    Event event;
};

TEST_F(UnseenSelection, DefaultThresholdSeparatesExamples) {
    const auto out = select_unseen_articles(corpus, {candidate("in", "2024-03-11", 0.90), candidate("out", "2024-03-11", 0.85)}, event);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].article.id, "in");
    EXPECT_NEAR(out[0].similarity, 0.90, 1e-12);
}

TEST_F(UnseenSelection, WindowExtendsSpanOnBothSides) {
    const std::vector<Candidate> pool = {candidate("early-ok", "2024-03-03", 0.95), candidate("early-no", "2024-03-02", 0.95),
                                         candidate("late-ok", "2024-03-19", 0.95), candidate("late-no", "2024-03-20", 0.95)};
    const auto out = select_unseen_articles(corpus, pool, event, 7, 0.86);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].article.id, "early-ok");  // tie on similarity, id order
    EXPECT_EQ(out[1].article.id, "late-ok");
}

TEST_F(UnseenSelection, MembersAreExcluded) {
    const auto out = select_unseen_articles(corpus, {candidate("m1", "2024-03-10", 1.0)}, event);
    EXPECT_TRUE(out.empty());
}

TEST_F(UnseenSelection, PreconditionsAreChecked) {
    Event no_centroid = corpus.events()[0];
    EXPECT_THROW(select_unseen_articles(corpus, {}, no_centroid), CorpusError);
    Candidate bare{dated("x", "2024-03-10"), std::nullopt};
    EXPECT_THROW(select_unseen_articles(corpus, {bare}, event), CorpusError);
}

TEST_F(UnseenSelection, MatchesBruteForceFilter) {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Candidate> pool;
        for (int i = 0; i < 20; ++i) {
            const int day = static_cast<int>(rng.below(40));
            const auto date = format_iso_date(*parse_iso_date("2024-02-20") + std::chrono::days{day});
            const double cosine = std::round((0.7 + 0.3 * rng.uniform()) * 100.0) / 100.0;  // frequent ties
            pool.push_back(candidate("c" + std::to_string(rng.below(100)) + "_" + std::to_string(i), date, cosine));
        }
        pool.push_back(candidate("m2", "2024-03-12", 0.99));
        const int window = static_cast<int>(rng.below(10));
        const double threshold = 0.7 + 0.3 * rng.uniform();

        // Brute force: evaluate each predicate independently, then order.
        std::vector<std::pair<double, std::string>> expected;
        const auto lo = *parse_iso_date("2024-03-10") - std::chrono::days{window};
        const auto hi = *parse_iso_date("2024-03-12") + std::chrono::days{window};
        for (const auto& c : pool) {
            if (c.article.id == "m1" || c.article.id == "m2") continue;
            if (c.article.published_at < lo || hi < c.article.published_at) continue;
            double d = 0;
            for (std::size_t k = 0; k < c.embedding->dim(); ++k) d += (*c.embedding)[k] * (*event.centroid)[k];
            if (d >= threshold) expected.emplace_back(-d, c.article.id);
        }
        std::sort(expected.begin(), expected.end());

        const auto out = select_unseen_articles(corpus, pool, event, window, threshold);
        ASSERT_EQ(out.size(), expected.size());
        for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].article.id, expected[i].second);
        EXPECT_EQ(out.size(), select_unseen_articles(corpus, pool, event, window, threshold).size());
    }
}
