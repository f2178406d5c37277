#include <gtest/gtest.h>

#include <cmath>

#include "digest_fixtures.hpp"
#include "discourse/gateway/gateway.hpp"
#include "discourse/gateway/mock.hpp"
#include "discourse/perspectives.hpp"
#include "planted.hpp"

using namespace discourse;
namespace dt = discourse::testing;

namespace {

/// A PTP over `left` left-leaning and `right` right-leaning articles, one
/// point each; point i sits at angle i*0.1 from the label direction.
struct World {
    EventCorpus corpus;
    std::vector<TalkingPoint> points;
    PointIndex index;
    PTPCluster ptp;
};

World make_world(std::size_t left, std::size_t right) {
    World w;
    std::map<std::string, Article> articles;
    Event event{.id = "e"};
    w.ptp.id = 7;
    w.ptp.label.aspect = "Grid Upgrade";
    w.ptp.label.description = "Upgrading the power grid";
    w.ptp.label.embedding = EmbeddingVector({1.0, 0.0});
    for (std::size_t i = 0; i < left + right; ++i) {
        const bool is_left = i < left;
        Article a;
        a.id = (is_left ? "L" : "R") + std::to_string(i);
        a.event_id = "e";
        a.title = "Title " + a.id;
        a.body = "Body " + a.id;
        a.source = "s";
        a.bias = is_left ? Ideology::left : Ideology::right;
        event.article_ids.push_back(a.id);
        TalkingPoint p;
        p.article_id = a.id;
        p.id = talking_point_id(a.id, 0);
        p.summary = "summary " + a.id;
        p.ideology = a.bias;
        p.embedding = EmbeddingVector({std::cos(0.1 * static_cast<double>(i)), std::sin(0.1 * static_cast<double>(i))});
        p.activities.push_back({"d", "Actor" + a.id, "Grid", is_left ? Sentiment::positive : Sentiment::negative,
                                MediaFrame::economic});
        close_entities(p);
        w.ptp.member_ids.push_back(p.id);
        (is_left ? w.ptp.left_member_ids : w.ptp.right_member_ids).push_back(p.id);
        w.points.push_back(p);
        articles.emplace(a.id, a);
    }
    w.corpus = EventCorpus({event}, articles);
    w.index = index_points(w.points);
    return w;
}

std::string viewpoint_json(const std::string& title, int bullets) {
    nlohmann::json b = nlohmann::json::array();
    for (int i = 0; i < bullets; ++i) b.push_back("bullet " + std::to_string(i));
    return nlohmann::json{{"title", title}, {"bullets", b}}.dump();
}

std::shared_ptr<gateway::ScriptedChatBackend> viewpoint_backend(int bullets) {
    return std::make_shared<gateway::ScriptedChatBackend>([bullets](const gateway::ChatRequest& r) -> std::string {
        if (r.template_id == "conditioned_summary") return "summary of " + r.variables.at("title");
        if (r.template_id == "generate_viewpoint") return viewpoint_json(r.variables.at("ideology") + " view", bullets);
        return "{}";
    });
}

std::unique_ptr<gateway::ModelGateway> gateway_for(std::shared_ptr<gateway::ChatBackend> chat,
                                                   std::shared_ptr<gateway::EmbeddingBackend> emb = nullptr) {
    gateway::GatewayOptions o;
    o.retry.max_attempts = 1;
    if (!emb) emb = std::make_shared<gateway::HashEmbeddingBackend>(8);
    return std::make_unique<gateway::ModelGateway>(std::move(chat), std::move(emb), o);
}

}  // namespace

TEST(PerspectiveDigest, MatchesIndependentOracleOnFrozenFixtures) {
    const auto fixtures = dt::load_digest_fixtures();
    ASSERT_EQ(fixtures.size(), 50u);
    for (const auto& f : fixtures) {
        const auto index = index_points(f.points);
        const auto d = aggregate_metadata(f.ptp, Ideology::left, index);
        EXPECT_EQ(dt::digest_mismatch(f, d), "") << f.name;
    }
}

TEST(PerspectiveDigest, EmptySideThrows) {
    const auto w = make_world(3, 0);
    EXPECT_THROW(aggregate_metadata(w.ptp, Ideology::right, w.index), std::invalid_argument);
}

TEST(PerspectiveDigest, UsesTheMoreSimilarHalf) {
    auto w = make_world(5, 0);
    // Points 3 and 4 fall outside the top ceil(5/2) = 3; give them a target that would otherwise win.
    for (auto& p : w.points)
        if (p.id == "L3#0" || p.id == "L4#0")
            for (int k = 0; k < 3; ++k) p.activities.push_back({"d", "X", "Decoy", Sentiment::positive, MediaFrame::other});
    for (auto& p : w.points) close_entities(p);
    w.index = index_points(w.points);
    const auto d = aggregate_metadata(w.ptp, Ideology::left, w.index);
    ASSERT_EQ(d.positive_targets.size(), 1u);
    EXPECT_EQ(d.positive_targets[0].target, "Grid");
    EXPECT_EQ(d.positive_targets[0].count, 3u);
    EXPECT_EQ(d.positive_targets[0].actor, "ActorL0");  // three actors tied at 1, smallest name
    EXPECT_NE(d.text().find("positive toward Grid (by ActorL0, Economic, 3x)"), std::string::npos);
}

TEST(PerspectiveTop, RanksBySimilarityAndTruncates) {
    const auto w = make_world(5, 3);
    const auto top = top_partition_points(w.ptp, Ideology::left, w.index, 3);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0]->id, "L0#0");
    EXPECT_EQ(top[2]->id, "L2#0");
    EXPECT_EQ(top_partition_points(w.ptp, Ideology::right, w.index, 10).size(), 3u);
}

TEST(PerspectiveViewpoint, PromptCarriesBothSidesAndSummaries) {
    const auto w = make_world(6, 4);
    auto chat = viewpoint_backend(2);
    auto gw = gateway_for(chat);
    Diagnostics d;
    const auto v = generate_viewpoint(w.ptp, Ideology::right, w.index, w.corpus, *gw, d);
    ASSERT_TRUE(v);
    EXPECT_EQ(v->title, "right view");
    EXPECT_EQ(v->ptp_id, 7);
    EXPECT_EQ(v->ideology, Ideology::right);
    EXPECT_EQ(v->supporting_point_ids.size(), 4u);  // K = 5 capped by the side size
    EXPECT_EQ(v->text(), "right view\n- bullet 0\n- bullet 1");
    const auto reqs = chat->requests();
    const auto gen = std::find_if(reqs.begin(), reqs.end(), [](const auto& r) { return r.template_id == "generate_viewpoint"; });
    ASSERT_NE(gen, reqs.end());
    const auto& opposing = gen->variables.at("opposing_points");
    EXPECT_EQ(std::count(opposing.begin(), opposing.end(), '\n'), 3);  // M = 3
    EXPECT_NE(gen->variables.at("summaries").find("summary of Title R6"), std::string::npos);
    std::size_t summaries = 0;
    for (const auto& r : reqs)
        if (r.template_id == "conditioned_summary") {
            ++summaries;
            EXPECT_EQ(r.variables.at("ideology"), "right");
        }
    EXPECT_EQ(summaries, 4u);
}

TEST(PerspectiveViewpoint, ExtraBulletsAreTruncatedWithDiagnostic) {
    const auto w = make_world(2, 2);
    auto gw = gateway_for(viewpoint_backend(5));
    Diagnostics d;
    const auto v = generate_viewpoint(w.ptp, Ideology::left, w.index, w.corpus, *gw, d);
    ASSERT_TRUE(v);
    EXPECT_EQ(v->bullets.size(), 3u);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_NE(d[0].message.find("5 bullets"), std::string::npos);
}

TEST(PerspectiveViewpoint, UnusableReplyGetsOneRepairThenOmitted) {
    const auto w = make_world(2, 2);
    auto chat = std::make_shared<gateway::ScriptedChatBackend>([](const gateway::ChatRequest& r) -> std::string {
        if (r.template_id == "generate_viewpoint") return R"({"title": "", "bullets": []})";
        if (r.template_id == "repair_json") return "still not it";
        return "s";
    });
    auto gw = gateway_for(chat);
    Diagnostics d;
    EXPECT_FALSE(generate_viewpoint(w.ptp, Ideology::left, w.index, w.corpus, *gw, d));
    EXPECT_FALSE(d.empty());
    std::size_t repairs = 0;
    for (const auto& r : chat->requests()) repairs += r.template_id == "repair_json";
    EXPECT_EQ(repairs, 1u);
}

TEST(PerspectiveBuild, OneSidedPtpGetsOnlyOneViewpoint) {
    const auto w = make_world(3, 0);
    auto gw = gateway_for(viewpoint_backend(2));
    const auto run = build_perspectives({w.ptp}, w.index, w.corpus, *gw);
    ASSERT_EQ(run.perspectives.size(), 1u);
    const auto& pp = run.perspectives[0];
    EXPECT_TRUE(pp.one_sided());
    EXPECT_EQ(pp.sidedness(), "left_only");
    EXPECT_TRUE(pp.left);
    EXPECT_FALSE(pp.right);
    EXPECT_TRUE(pp.left_digest);
    EXPECT_FALSE(pp.right_digest);
    ASSERT_EQ(run.diagnostics.size(), 1u);

    const nlohmann::json j = pp;
    EXPECT_EQ(j["sidedness"], "left_only");
    EXPECT_TRUE(j["right"].is_null());
    const auto back = j.get<PartisanPerspective>();
    EXPECT_EQ(back.left->text(), pp.left->text());
    EXPECT_TRUE(back.right_partition_empty);
    EXPECT_EQ(back.left_digest->positive_targets, pp.left_digest->positive_targets);
}

TEST(PerspectiveExport, KeepsTopQuarterRoundedUpPerSide) {
    const auto w = make_world(5, 3);
    auto gw = gateway_for(viewpoint_backend(2));
    const auto run = build_perspectives({w.ptp}, w.index, w.corpus, *gw);
    const auto pairs = export_finetune_pairs({w.ptp}, run.perspectives, w.index, w.corpus, *gw);
    std::size_t left = 0, right = 0;
    for (const auto& p : pairs) {
        const bool is_left = p.article_id[0] == 'L';
        (is_left ? left : right)++;
        EXPECT_EQ(p.chosen, (is_left ? run.perspectives[0].left : run.perspectives[0].right)->text());
        EXPECT_EQ(p.rejected, (is_left ? run.perspectives[0].right : run.perspectives[0].left)->text());
        EXPECT_NE(p.prompt_text.find("Body " + p.article_id), std::string::npos);
        EXPECT_EQ(p.ptp_id, 7);
    }
    EXPECT_EQ(left, 2u);   // ceil(5 / 4)
    EXPECT_EQ(right, 1u);  // ceil(3 / 4)
}

TEST(PerspectiveExport, RanksArticlesBySimilarityToOwnViewpoint) {
    const auto w = make_world(4, 1);
    std::map<std::string, EmbeddingVector> table = {
        {"left view\n- bullet 0", EmbeddingVector({1.0, 0.0})},
        {"right view\n- bullet 0", EmbeddingVector({0.0, 1.0})},
        {"Title L0\n\nBody L0", EmbeddingVector({0.0, 1.0})},
        {"Title L1\n\nBody L1", EmbeddingVector({0.2, 1.0})},
        {"Title L2\n\nBody L2", EmbeddingVector({1.0, 0.1})},  // most similar to the left view
        {"Title L3\n\nBody L3", EmbeddingVector({0.5, 1.0})},
    };
    auto emb = std::make_shared<dt::TableEmbeddingBackend>(table, 2);
    auto gw = gateway_for(viewpoint_backend(1), emb);
    const auto run = build_perspectives({w.ptp}, w.index, w.corpus, *gw);
    ASSERT_EQ(w.corpus.article("L2").full_text(), "Title L2\n\nBody L2");
    const auto pairs = export_finetune_pairs({w.ptp}, run.perspectives, w.index, w.corpus, *gw);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].article_id, "L2");
    EXPECT_EQ(pairs[1].article_id, "R4");
}

TEST(PerspectiveExport, SkipsOneSidedPtps) {
    const auto w = make_world(4, 0);
    auto gw = gateway_for(viewpoint_backend(1));
    const auto run = build_perspectives({w.ptp}, w.index, w.corpus, *gw);
    EXPECT_TRUE(export_finetune_pairs({w.ptp}, run.perspectives, w.index, w.corpus, *gw).empty());
}
