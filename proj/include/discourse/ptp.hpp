#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/clustering/hdbscan.hpp"
#include "discourse/diagnostics.hpp"
#include "discourse/embedding.hpp"
#include "discourse/talking_points.hpp"

namespace discourse {

namespace gateway {
class ModelGateway;
}

struct PTPLabel {
    std::string aspect;
    std::string description;
    EmbeddingVector embedding;  // of text()

    /// "aspect: description", the string that gets embedded.
    std::string text() const;
};

struct PTPCluster {
    int id = 0;
    PTPLabel label;
    std::vector<std::string> member_ids;
    std::vector<std::string> left_member_ids;
    std::vector<std::string> right_member_ids;

    std::size_t frequency() const { return member_ids.size(); }
    const std::vector<std::string>& members(Ideology side) const {
        return side == Ideology::left ? left_member_ids : right_member_ids;
    }
};

/// A labeled candidate cluster while the pipeline is still refining it.
struct LabeledCluster {
    PTPLabel label;
    std::vector<std::string> member_ids;
};

struct PtpOptions {
    double membership_threshold = 0.85;
    std::size_t label_exemplars = 5;     // members shown when labeling
    std::size_t merge_neighbors = 7;     // nearest labels paired per label
    std::size_t merge_iterations = 2;
    std::size_t coherence_exemplars = 3;  // members checked against the label
    double pool_fraction = 0.1;           // loop while pool > fraction * articles
    std::size_t max_iterations = 1000;
    /// Per-iteration checkpoints are written (and resumed from) here when set.
    std::optional<std::filesystem::path> checkpoint_dir;
};

inline constexpr double kMembershipThresholdPreset = 0.76;

/// Point lookup by id; every pipeline step needs embeddings.
using PointIndex = std::map<std::string, const TalkingPoint*>;
PointIndex index_points(const std::vector<TalkingPoint>& points);

/// Indices of the `k` members most similar to `target`, most similar first,
/// ties by point id.
std::vector<std::size_t> nearest_members(const std::vector<const TalkingPoint*>& members,
                                         const EmbeddingVector& target, std::size_t k);

/// Labels one cluster from its members nearest the centroid. nullopt (with a
/// diagnostic) when the reply stays unparseable after one repair.
std::optional<PTPLabel> label_cluster(const std::vector<const TalkingPoint*>& members, const EmbeddingVector& centroid,
                                      gateway::ModelGateway& gateway, Diagnostics& diagnostics,
                                      std::size_t exemplars = 5);

/// Labels many clusters at once; element i is nullopt when cluster i could
/// not be labeled.
std::vector<std::optional<PTPLabel>> label_clusters(const std::vector<std::vector<const TalkingPoint*>>& clusters,
                                                    gateway::ModelGateway& gateway, Diagnostics& diagnostics,
                                                    std::size_t exemplars = 5);

struct MergeStep {
    std::size_t iteration = 0;
    std::string survivor;
    std::string absorbed;
    double similarity = 0.0;
};

/// Greedy merge of labels that name the same aspect. Candidate pairs join
/// each label to its nearest labels; pairs are decided in order of
/// descending similarity and a merge retires every other pair touching
/// either label. The larger cluster's label survives (ties: smaller aspect,
/// then earlier position).
std::vector<LabeledCluster> merge_redundant_labels(std::vector<LabeledCluster> clusters,
                                                   gateway::ModelGateway& gateway, Diagnostics& diagnostics,
                                                   const PtpOptions& options = {},
                                                   std::vector<MergeStep>* trace = nullptr);

struct PruneResult {
    std::vector<LabeledCluster> kept;
    std::vector<std::string> returned_to_pool;
};

/// Drops clusters whose members nearest the label do not discuss its aspect.
/// A failed or unparseable check keeps the cluster.
PruneResult prune_incoherent_clusters(std::vector<LabeledCluster> clusters, const PointIndex& points,
                                      gateway::ModelGateway& gateway, Diagnostics& diagnostics,
                                      const PtpOptions& options = {});

/// For each point, the index of the most similar label when that similarity
/// reaches `threshold` (ties to the lower index), otherwise nullopt.
std::vector<std::optional<std::size_t>> assign_membership(const std::vector<const TalkingPoint*>& points,
                                                          const std::vector<PTPLabel>& labels, double threshold);

struct PtpIteration {
    std::size_t iteration = 0;
    std::size_t pool_before = 0;
    clustering::ClusteringParams params;
    double validity = 0.0;
    std::size_t candidate_clusters = 0;
    std::size_t labeled = 0;
    std::size_t after_merge = 0;
    std::size_t after_prune = 0;
    std::size_t new_ptps = 0;
    std::size_t assigned = 0;
    std::size_t pool_after = 0;
};

struct PtpRun {
    std::vector<PTPCluster> clusters;
    std::vector<PtpIteration> iterations;
    std::map<std::string, int> assignment;  // point id -> PTP id, assigned points only
    std::size_t total_points = 0;
    std::string halt_reason;
    Diagnostics diagnostics;

    double coverage() const;
};

/// The iterative cluster / label / merge / prune / assign loop. Halts when the
/// pool is no larger than pool_fraction * n_articles, when clustering finds
/// nothing, or when an iteration assigns no point.
PtpRun identify_ptps(const std::vector<TalkingPoint>& points, std::size_t n_articles, gateway::ModelGateway& gateway,
                     const PtpOptions& options = {});

void to_json(nlohmann::json& j, const PTPCluster& c);
void from_json(const nlohmann::json& j, PTPCluster& c);
void to_json(nlohmann::json& j, const PtpIteration& it);

}  // namespace discourse
