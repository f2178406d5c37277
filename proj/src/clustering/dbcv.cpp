#include "discourse/clustering/dbcv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace discourse::clustering {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ((1/(m-1)) * sum_j (1/d_j)^dim)^(-1/dim), evaluated in log space. Zero
// distances make the sum infinite, i.e. a core distance of 0.
double all_points_core_distance(const std::vector<double>& others, double dim) {
    if (others.empty()) return 0.0;
    double max_term = -kInf;
    std::vector<double> logs;
    logs.reserve(others.size());
    for (double d : others) {
        if (d == 0.0) return 0.0;
        logs.push_back(-dim * std::log(d));
        max_term = std::max(max_term, logs.back());
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - max_term);
    const double log_mean = max_term + std::log(acc) - std::log(static_cast<double>(others.size()));
    return std::exp(-log_mean / dim);
}

}  // namespace

ClusterValidity dbcv_detailed(const std::vector<EmbeddingVector>& points, const ClusterAssignment& assignment) {
    if (assignment.labels.size() != points.size())
        throw std::invalid_argument("assignment and point count differ");
    if (assignment.n_clusters == 0 || assignment.noise_count() == points.size())
        throw ClusteringError("validity is undefined when every point is noise");
    for (const auto& m : assignment.members)
        if (m.size() < 2) throw ClusteringError("validity is undefined for a single-member cluster");

    const auto distances = pairwise_distances(points);
    const double dim = static_cast<double>(points.front().dim());
    const std::size_t k = assignment.n_clusters;

    std::vector<double> core(points.size(), 0.0);
    for (const auto& members : assignment.members)
        for (auto i : members) {
            std::vector<double> others;
            others.reserve(members.size() - 1);
            for (auto j : members)
                if (j != i) others.push_back(distances(i, j));
            core[i] = all_points_core_distance(others, dim);
        }
    auto mreach = [&](std::size_t i, std::size_t j) { return std::max({core[i], core[j], distances(i, j)}); };

    ClusterValidity out;
    out.per_cluster.assign(k, 0.0);
    out.density_sparseness.assign(k, 0.0);
    out.density_separation.assign(k, 0.0);

    std::vector<std::vector<std::size_t>> internal(k);
    for (std::size_t c = 0; c < k; ++c) {
        const auto& members = assignment.members[c];
        const std::size_t m = members.size();
        DistanceMatrix local(m);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b) local.set(a, b, mreach(members[a], members[b]));
        const auto mst = minimum_spanning_tree(local);

        std::vector<std::size_t> degree(m, 0);
        for (const auto& e : mst) {
            ++degree[e.a];
            ++degree[e.b];
        }
        std::vector<bool> is_internal(m, false);
        bool any_internal = false;
        for (std::size_t a = 0; a < m; ++a)
            if (degree[a] > 1) is_internal[a] = any_internal = true;
        if (!any_internal) std::fill(is_internal.begin(), is_internal.end(), true);

        double sparseness = -kInf;
        for (const auto& e : mst)
            if (is_internal[e.a] && is_internal[e.b]) sparseness = std::max(sparseness, e.weight);
        if (sparseness == -kInf)
            for (const auto& e : mst) sparseness = std::max(sparseness, e.weight);
        out.density_sparseness[c] = sparseness;

        for (std::size_t a = 0; a < m; ++a)
            if (is_internal[a]) internal[c].push_back(members[a]);
    }

    for (std::size_t c = 0; c < k; ++c) {
        double separation = kInf;
        for (std::size_t o = 0; o < k; ++o) {
            if (o == c) continue;
            for (auto i : internal[c])
                for (auto j : internal[o]) separation = std::min(separation, mreach(i, j));
        }
        // A lone cluster has nothing to be separated from.
        if (k == 1) separation = 0.0;
        out.density_separation[c] = separation;

        const double sparseness = out.density_sparseness[c];
        const double denom = std::max(separation, sparseness);
        out.per_cluster[c] = denom == 0.0 ? 0.0 : (separation - sparseness) / denom;
        out.score += static_cast<double>(assignment.members[c].size()) / static_cast<double>(points.size()) *
                     out.per_cluster[c];
    }
    return out;
}

double dbcv(const std::vector<EmbeddingVector>& points, const ClusterAssignment& assignment) {
    return dbcv_detailed(points, assignment).score;
}

}  // namespace discourse::clustering
