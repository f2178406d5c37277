#include "discourse/clustering/grid_search.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "discourse/clustering/dbcv.hpp"

namespace discourse::clustering {

std::vector<std::size_t> candidate_grid(std::size_t n) {
    std::set<std::size_t> grid = {5, 7, 9};
    for (int percent = 1; percent <= 4; ++percent) {
        // Integer ceiling of n * percent / 100.
        const std::size_t v = (n * static_cast<std::size_t>(percent) + 99) / 100;
        if (v >= 2) grid.insert(v);
    }
    return {grid.begin(), grid.end()};
}

GridSearchResult grid_search(const std::vector<EmbeddingVector>& points) {
    if (points.size() < 10) throw std::invalid_argument("hyperparameter search needs at least 10 points");
    GridSearchResult result;
    bool found = false;
    for (auto size : candidate_grid(points.size())) {
        GridCell cell;
        cell.params = {size, kGridMinSamples};
        if (size > points.size()) {
            cell.note = "min_cluster_size exceeds the number of points";
            result.cells.push_back(cell);
            continue;
        }
        try {
            auto assignment = hdbscan(points, cell.params);
            cell.n_clusters = assignment.n_clusters;
            if (assignment.n_clusters == 0) {
                cell.note = "all points are noise";
            } else {
                const double score = dbcv(points, assignment);
                if (std::isnan(score)) {
                    cell.note = "validity is not a number";
                } else {
                    cell.score = score;
                    // Ascending sizes, so strict improvement keeps the smaller size on ties.
                    if (!found || score > result.best_score) {
                        found = true;
                        result.best = cell.params;
                        result.best_score = score;
                        result.assignment = std::move(assignment);
                    }
                }
            }
        } catch (const ClusteringError& e) {
            cell.note = e.what();
        }
        if (cell.params.unusual() && cell.note.empty()) cell.note = "min_samples exceeds min_cluster_size";
        result.cells.push_back(cell);
    }
    if (!found) throw NoClusteringFound("no grid cell produced a cluster");
    return result;
}

ClusteringParams select_hyperparameters(const std::vector<EmbeddingVector>& points) {
    return grid_search(points).best;
}

}  // namespace discourse::clustering
