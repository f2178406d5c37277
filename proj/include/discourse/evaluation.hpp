#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/corpus.hpp"
#include "discourse/diagnostics.hpp"
#include "discourse/gateway/gateway.hpp"
#include "discourse/perspectives.hpp"
#include "discourse/ptp.hpp"

namespace discourse {

/// Names the harness that produced a record.
namespace method {
inline constexpr const char* kDirect = "direct";
inline constexpr const char* kTopK = "topk";
inline constexpr const char* kTopKMetadata = "topk+metadata";
inline constexpr const char* kTrp = "trp";
inline constexpr const char* kPartisan = "partisan";
inline constexpr const char* kPartisanMetadata = "partisan+metadata";
}  // namespace method

struct ClassificationRecord {
    std::string article_id;
    Ideology true_label = Ideology::left;
    std::optional<Ideology> predicted;   // nullopt = abstain
    std::string method;
    std::optional<Ideology> summary1;    // ideology shown under "summary1"; nullopt for direct
    std::optional<int> ptp_id;
    std::string issue;
    bool applicable = true;
    std::string raw_reply;

    bool abstained() const { return applicable && !predicted; }
};

/// Which ideology is shown as summary1 for an article; a seeded coin flip.
Ideology summary1_side(std::uint64_t seed, const std::string& article_id);

/// "summary1"/"summary2" from a model reply; nullopt when absent or both.
std::optional<int> parse_summary_choice(const std::string& reply);

/// Viewpoints of an event with their embeddings, per ideology.
struct ViewpointIndex {
    struct Entry {
        const Viewpoint* viewpoint = nullptr;
        const MetadataDigest* digest = nullptr;
        EmbeddingVector embedding;
    };
    std::vector<Entry> left;
    std::vector<Entry> right;
    const std::vector<Entry>& side(Ideology s) const { return s == Ideology::left ? left : right; }
};

ViewpointIndex index_viewpoints(const std::vector<PartisanPerspective>& perspectives, gateway::ModelGateway& gw);

struct IdeologyOptions {
    std::size_t k = 3;
    bool with_metadata = false;
    std::uint64_t seed = 0;
};

/// Text standing in for one ideology: its k viewpoints nearest the article,
/// plus their digests when requested.
std::string ideology_summary(const ViewpointIndex& index, Ideology side, const EmbeddingVector& article_embedding,
                             const IdeologyOptions& options);

/// Request for classifying one unseen article against the event's
/// viewpoints. The returned record has everything but the prediction.
std::pair<gateway::ChatRequest, ClassificationRecord> ideology_request(const Article& article,
                                                                       const EmbeddingVector& article_embedding,
                                                                       const ViewpointIndex& index,
                                                                       const gateway::ModelGateway& gw,
                                                                       const IdeologyOptions& options);

ClassificationRecord classify_ideology(const Article& article, const ViewpointIndex& index,
                                       gateway::ModelGateway& gw, const IdeologyOptions& options);

std::vector<ClassificationRecord> classify_ideology_all(const std::vector<const Article*>& articles,
                                                        const ViewpointIndex& index, gateway::ModelGateway& gw,
                                                        const IdeologyOptions& options, Diagnostics& diagnostics);

/// Asks for the label outright. Its prompt names the ideologies, so it is
/// exempt from placeholder masking.
std::vector<ClassificationRecord> classify_direct_all(const std::vector<const Article*>& articles,
                                                      gateway::ModelGateway& gw, Diagnostics& diagnostics);

/// The two candidate texts of a partisan task, per ideology.
struct PartisanTexts {
    std::string left;
    std::string right;
    bool degenerate = false;  // both sides read the same
    const std::string& side(Ideology s) const { return s == Ideology::left ? left : right; }
};

/// Each side's top-3 point summaries nearest the label. nullopt when a
/// partition is empty.
std::optional<PartisanTexts> trp_baseline(const PTPCluster& ptp, const PointIndex& points, std::size_t top = 3);

/// Viewpoint texts of a two-sided perspective, optionally with digests.
std::optional<PartisanTexts> perspective_texts(const PartisanPerspective& perspective, bool with_metadata);

struct PartisanOptions {
    std::uint64_t seed = 0;
    std::string method = method::kPartisan;
};

std::pair<gateway::ChatRequest, ClassificationRecord> partisan_request(const Article& article, const PTPCluster& ptp,
                                                                       const PartisanTexts& texts,
                                                                       const gateway::ModelGateway& gw,
                                                                       const PartisanOptions& options);

/// nullopt texts give a not-applicable record without calling the backend.
ClassificationRecord classify_partisan(const Article& article, const PTPCluster& ptp,
                                       const std::optional<PartisanTexts>& texts, gateway::ModelGateway& gw,
                                       const PartisanOptions& options);

/// Every distinct member article of every PTP, classified between that
/// PTP's two texts. `texts_for` yields the candidate texts per PTP.
std::vector<ClassificationRecord> classify_partisan_all(
    const std::vector<PTPCluster>& ptps, const std::map<int, std::optional<PartisanTexts>>& texts,
    const PointIndex& points, const EventCorpus& corpus, gateway::ModelGateway& gw, const PartisanOptions& options,
    Diagnostics& diagnostics);

struct TopicTrial {
    std::string point_id;
    int ptp_id = 0;
    int quartile = 0;                 // 0..3, 0 = closest to the label
    std::vector<int> option_ptp_ids;  // in the order shown
    std::size_t correct_option = 0;   // index into option_ptp_ids
    std::optional<std::size_t> chosen;
    bool correct() const { return chosen && *chosen == correct_option; }
};

struct TopicDiversityResult {
    std::vector<TopicTrial> trials;
    std::array<std::size_t, 4> total{};
    std::array<std::size_t, 4> hits{};
    std::array<double, 4> accuracy{};
    double overall = 0.0;
};

struct TopicOptions {
    std::size_t negatives = 3;
    std::uint64_t seed = 0;
};

/// Quartile boundaries of a ranked list of n: [floor(q*n/4), floor((q+1)*n/4)).
std::array<std::size_t, 5> quartile_bounds(std::size_t n);

/// Trials before asking the backend; deterministic in the seed.
std::vector<TopicTrial> plan_topic_trials(const std::vector<PTPCluster>& ptps, const PointIndex& points,
                                          const TopicOptions& options);

TopicDiversityResult topic_diversity_task(const std::vector<PTPCluster>& ptps, const PointIndex& points,
                                          gateway::ModelGateway& gw, const TopicOptions& options,
                                          Diagnostics& diagnostics);

TopicDiversityResult summarize_topic_trials(std::vector<TopicTrial> trials);

/// Assigned points over all points. Throws std::invalid_argument when empty.
double coverage(const std::vector<TalkingPoint>& points, const std::map<std::string, int>& assignment);

inline constexpr std::array<const char*, 4> kEvidenceQuestions = {
    "Is the summary discussing the same topic as the news article?",
    "In the summary and the news article, are there any entities in common that are viewed negatively from the "
    "same perspective?",
    "In the summary and the news article, are there any entities in common that are viewed positively from the "
    "same perspective?",
    "Does the news article cover the views presented in the summary from the same angle?",
};

struct EvidenceAnswer {
    int question = 0;  // 1..4
    std::optional<bool> answer;
    std::vector<std::string> quotes;
    bool supported = false;  // at least one quote and every quote occurs verbatim in the body
};

struct EvidenceReport {
    std::string article_id;
    int ptp_id = 0;
    Ideology ideology = Ideology::left;
    std::array<EvidenceAnswer, 4> answers;
    Diagnostics diagnostics;
};

/// Fills answers from a reply; never throws. Quotes are checked against `body`.
EvidenceReport parse_evidence_reply(const std::string& reply, const std::string& body);

/// Throws gateway::GatewayError when the backend fails.
EvidenceReport extract_evidence(const Article& article, const Viewpoint& viewpoint, gateway::ModelGateway& gw);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct EvalReport {
    std::map<Ideology, ClassMetrics> per_class;
    ClassMetrics macro;  // support = all applicable records
    std::size_t records = 0;
    std::size_t abstentions = 0;
    std::size_t not_applicable = 0;
    std::map<std::string, EvalReport> per_issue;
};

/// Per-class and macro metrics; an abstention counts against its true class.
/// Throws std::invalid_argument when no applicable record has a prediction.
EvalReport score_report(const std::vector<ClassificationRecord>& records);

void to_json(nlohmann::json& j, const ClassificationRecord& r);
void from_json(const nlohmann::json& j, ClassificationRecord& r);
void to_json(nlohmann::json& j, const ClassMetrics& m);
void to_json(nlohmann::json& j, const EvalReport& r);
void to_json(nlohmann::json& j, const TopicTrial& t);
void to_json(nlohmann::json& j, const TopicDiversityResult& r);
void to_json(nlohmann::json& j, const EvidenceAnswer& a);
void to_json(nlohmann::json& j, const EvidenceReport& r);

}  // namespace discourse
