#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/embedding.hpp"

namespace discourse::clustering {

class ClusteringError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ClusteringParams {
    std::size_t min_cluster_size = 5;
    /// Neighbors counted for the core distance, the point itself included.
    /// 0 means "same as min_cluster_size".
    std::size_t min_samples = 0;

    std::size_t effective_min_samples() const { return min_samples == 0 ? min_cluster_size : min_samples; }
    /// True when min_samples exceeds min_cluster_size, which is allowed but unusual.
    bool unusual() const { return effective_min_samples() > min_cluster_size; }

    friend bool operator==(const ClusteringParams&, const ClusteringParams&) = default;
};

inline constexpr int kNoise = -1;

struct ClusterAssignment {
    std::vector<int> labels;  // per point; kNoise or 0..n_clusters-1
    std::size_t n_clusters = 0;
    std::vector<std::vector<std::size_t>> members;  // per cluster, ascending point indices

    std::size_t noise_count() const;
    /// Rebuilds n_clusters and members from labels.
    static ClusterAssignment from_labels(std::vector<int> labels);
};

/// Dense symmetric matrix, row-major.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        data_[i * n_ + j] = v;
        data_[j * n_ + i] = v;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

struct MstEdge {
    std::size_t a = 0;
    std::size_t b = 0;
    double weight = 0.0;
};

/// One row of the condensed tree: `child` (a point or a cluster) leaves
/// `parent` at density level `lambda` = 1 / distance.
struct CondensedEntry {
    std::size_t parent = 0;
    std::size_t child = 0;
    bool child_is_cluster = false;
    double lambda = 0.0;
    std::size_t child_size = 1;
};

struct CondensedCluster {
    std::size_t id = 0;
    std::size_t parent = 0;  // the root is its own parent
    double birth_lambda = 0.0;
    std::size_t size = 0;
    double stability = 0.0;
    bool selected = false;
};

struct HdbscanResult {
    ClusterAssignment assignment;
    std::vector<double> core_distances;
    std::vector<MstEdge> mst;
    std::vector<CondensedCluster> clusters;  // index = cluster id; 0 is the root
    std::vector<CondensedEntry> condensed;
};

/// Euclidean distances. Throws DimensionMismatch or ClusteringError for
/// non-finite input.
DistanceMatrix pairwise_distances(const std::vector<EmbeddingVector>& points);

/// Distance to the k-th nearest point counting the point itself (k is
/// clamped to n).
std::vector<double> core_distances(const DistanceMatrix& distances, std::size_t k);

/// max(core a, core b, d(a, b)) for a != b, 0 on the diagonal.
DistanceMatrix mutual_reachability(const DistanceMatrix& distances, const std::vector<double>& core);

/// Prim's algorithm over a dense graph, n - 1 edges. Ties go to the lower
/// vertex index.
std::vector<MstEdge> minimum_spanning_tree(const DistanceMatrix& weights);

double total_weight(const std::vector<MstEdge>& edges);

/// Condensed tree of the MST at `min_cluster_size`. Equal-weight edges are
/// removed together, so the tree does not depend on which of several tied
/// MSTs was built.
void condense(std::size_t n_points, const std::vector<MstEdge>& mst, std::size_t min_cluster_size,
              HdbscanResult& result);

/// Excess-of-mass selection over result.clusters; fills result.assignment.
void select_clusters(std::size_t n_points, std::size_t min_cluster_size, HdbscanResult& result);

/// Full pipeline with every intermediate kept.
HdbscanResult hdbscan_detailed(const std::vector<EmbeddingVector>& points, const ClusteringParams& params);

ClusterAssignment hdbscan(const std::vector<EmbeddingVector>& points, const ClusteringParams& params);

/// The condensed tree and selection as JSON, for inspection.
nlohmann::json condensed_tree_json(const HdbscanResult& result);

}  // namespace discourse::clustering
