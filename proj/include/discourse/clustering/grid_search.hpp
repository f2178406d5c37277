#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "discourse/clustering/hdbscan.hpp"

namespace discourse::clustering {

/// No grid cell produced a scorable clustering.
class NoClusteringFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kGridMinSamples = 5;

/// {5, 7, 9, ceil(1%), ceil(2%), ceil(3%), ceil(4%) of n}, ascending, without
/// duplicates or values below 2.
std::vector<std::size_t> candidate_grid(std::size_t n);

struct GridCell {
    ClusteringParams params;
    std::size_t n_clusters = 0;
    std::optional<double> score;  // nullopt when the cell failed
    std::string note;
};

struct GridSearchResult {
    ClusteringParams best;
    double best_score = 0.0;
    ClusterAssignment assignment;  // the clustering produced by `best`
    std::vector<GridCell> cells;
};

/// Sweeps min_cluster_size over the candidate grid with min_samples fixed,
/// keeping the highest DBCV (ties to the smaller size). Needs at least 10
/// points; throws NoClusteringFound when every cell fails.
GridSearchResult grid_search(const std::vector<EmbeddingVector>& points);

ClusteringParams select_hyperparameters(const std::vector<EmbeddingVector>& points);

}  // namespace discourse::clustering
