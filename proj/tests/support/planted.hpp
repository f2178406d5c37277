#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "discourse/gateway/gateway.hpp"
#include "discourse/gateway/mock.hpp"
#include "discourse/ptp.hpp"
#include "discourse/talking_points.hpp"

namespace discourse::testing {

/// Embedding backend answering from a fixed text -> vector table; unknown
/// texts fall back to a hashed direction.
class TableEmbeddingBackend : public gateway::EmbeddingBackend {
public:
    TableEmbeddingBackend(std::map<std::string, EmbeddingVector> table, std::size_t dim)
        : table_(std::move(table)), dim_(dim) {}
    std::string id() const override { return "test-table"; }
    std::string model() const override { return "table-" + std::to_string(dim_); }
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    std::map<std::string, EmbeddingVector> table_;
    std::size_t dim_;
};

/// Talking points whose embeddings sit in k planted groups. Point summaries
/// read "theme g<group> point <i>"; noise points use group -1.
struct PlantedCorpus {
    std::vector<TalkingPoint> points;
    std::vector<int> truth;
    std::vector<EmbeddingVector> centers;
    std::size_t n_articles = 0;
    std::size_t dim = 0;
};

PlantedCorpus planted_corpus(std::uint64_t seed, std::size_t k, std::size_t per_group, std::size_t dim = 32,
                             double sigma = 0.05, std::size_t noise = 0);

std::string planted_aspect(int group);

/// Labels a cluster by the majority "g<group>" token among its exemplars,
/// merges equal aspects, and keeps every cluster.
std::shared_ptr<gateway::ScriptedChatBackend> planted_label_backend();

/// Gateway with the planted labeler and a table mapping each aspect to its
/// group center.
std::unique_ptr<gateway::ModelGateway> planted_gateway(const PlantedCorpus& corpus);

struct Recovery {
    std::size_t ptps = 0;
    double accuracy = 0.0;  // points whose PTP's majority group equals their own
    double coverage = 0.0;
};

Recovery score_recovery(const PlantedCorpus& corpus, const PtpRun& run);

}  // namespace discourse::testing

namespace discourse::testing {

/// A randomized identify_ptps input: embeddings from several regimes
/// (uniform noise, planted groups, duplicates) and a backend whose replies
/// are a pure function of (seed, prompt), including garbage and failures.
struct PtpFuzzCase {
    std::vector<TalkingPoint> points;
    std::size_t n_articles = 0;
    std::unique_ptr<gateway::ModelGateway> gateway;
    std::string regime;
};

PtpFuzzCase random_ptp_case(std::uint64_t seed);

/// ceil(|points| / max(1, fewest points assigned in any iteration)) + 1.
std::size_t termination_bound(std::size_t points, const PtpRun& run);

}  // namespace discourse::testing
