#include "discourse/clustering/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace discourse::clustering {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double level_lambda(double weight) { return weight > 0.0 ? 1.0 / weight : kInf; }

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

struct Pending {
    std::size_t cluster;
    std::vector<std::size_t> points;  // ascending
    std::vector<MstEdge> edges;
};

}  // namespace

std::size_t ClusterAssignment::noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

ClusterAssignment ClusterAssignment::from_labels(std::vector<int> labels) {
    // Renumber clusters by their smallest member index.
    std::map<int, int> renumber;
    for (int l : labels)
        if (l != kNoise && !renumber.count(l)) {
            const int next = static_cast<int>(renumber.size());
            renumber[l] = next;
        }
    ClusterAssignment out;
    out.n_clusters = renumber.size();
    out.members.resize(out.n_clusters);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kNoise) continue;
        labels[i] = renumber[labels[i]];
        out.members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    out.labels = std::move(labels);
    return out;
}

DistanceMatrix pairwise_distances(const std::vector<EmbeddingVector>& points) {
    const std::size_t n = points.size();
    for (const auto& p : points) {
        if (p.dim() != points.front().dim()) throw DimensionMismatch("points have different dimensions");
        if (!p.all_finite()) throw ClusteringError("point has a non-finite coordinate");
    }
    DistanceMatrix d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, euclidean_distance(points[i], points[j]));
    return d;
}

std::vector<double> core_distances(const DistanceMatrix& distances, std::size_t k) {
    const std::size_t n = distances.size();
    std::vector<double> core(n, 0.0);
    if (n == 0) return core;
    k = std::clamp<std::size_t>(k, 1, n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row[j] = distances(i, j);
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
        core[i] = row[k - 1];
    }
    return core;
}

DistanceMatrix mutual_reachability(const DistanceMatrix& distances, const std::vector<double>& core) {
    const std::size_t n = distances.size();
    DistanceMatrix mr(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) mr.set(i, j, std::max({core[i], core[j], distances(i, j)}));
    return mr;
}

std::vector<MstEdge> minimum_spanning_tree(const DistanceMatrix& w) {
    const std::size_t n = w.size();
    std::vector<MstEdge> edges;
    if (n == 0) return edges;
    edges.reserve(n - 1);
    std::vector<bool> in_tree(n, false);
    std::vector<double> key(n, kInf);
    std::vector<std::size_t> via(n, 0);
    key[0] = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!in_tree[v] && (u == n || key[v] < key[u])) u = v;
        in_tree[u] = true;
        if (step > 0) edges.push_back({std::min(via[u], u), std::max(via[u], u), key[u]});
        for (std::size_t v = 0; v < n; ++v)
            if (!in_tree[v] && w(u, v) < key[v]) {
                key[v] = w(u, v);
                via[v] = u;
            }
    }
    return edges;
}

double total_weight(const std::vector<MstEdge>& edges) {
    double total = 0.0;
    for (const auto& e : edges) total += e.weight;
    return total;
}

void condense(std::size_t n, const std::vector<MstEdge>& mst, std::size_t min_cluster_size, HdbscanResult& result) {
    result.clusters.clear();
    result.condensed.clear();
    result.clusters.push_back({0, 0, 0.0, n, 0.0, false});

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<Pending> stack;
    stack.push_back({0, std::move(all), mst});

    std::vector<std::size_t> local(n);
    while (!stack.empty()) {
        Pending item = std::move(stack.back());
        stack.pop_back();
        const std::size_t c = item.cluster;

        auto fall_out = [&](const std::vector<std::size_t>& pts, double lambda) {
            for (auto p : pts) result.condensed.push_back({c, p, false, lambda, 1});
        };
        if (item.edges.empty()) {
            fall_out(item.points, kInf);
            continue;
        }

        double wmax = 0.0;
        for (const auto& e : item.edges) wmax = std::max(wmax, e.weight);
        const double lambda = level_lambda(wmax);

        for (std::size_t i = 0; i < item.points.size(); ++i) local[item.points[i]] = i;
        UnionFind uf(item.points.size());
        for (const auto& e : item.edges)
            if (e.weight < wmax) uf.unite(local[e.a], local[e.b]);

        // Components keyed by their root, which is the smallest local index,
        // so iteration follows the smallest point index.
        std::map<std::size_t, Pending> comps;
        for (std::size_t i = 0; i < item.points.size(); ++i) comps[uf.find(i)].points.push_back(item.points[i]);
        for (const auto& e : item.edges)
            if (e.weight < wmax) comps[uf.find(local[e.a])].edges.push_back(e);

        std::size_t large = 0;
        for (const auto& [root, comp] : comps) large += comp.points.size() >= min_cluster_size;

        std::vector<Pending> next;
        for (auto& [root, comp] : comps) {
            if (comp.points.size() < min_cluster_size) {
                fall_out(comp.points, lambda);
            } else if (large == 1) {
                comp.cluster = c;
                next.push_back(std::move(comp));
            } else {
                const std::size_t id = result.clusters.size();
                result.clusters.push_back({id, c, lambda, comp.points.size(), 0.0, false});
                result.condensed.push_back({c, id, true, lambda, comp.points.size()});
                comp.cluster = id;
                next.push_back(std::move(comp));
            }
        }
        // Reverse so the smallest component is expanded first.
        for (auto it = next.rbegin(); it != next.rend(); ++it) stack.push_back(std::move(*it));
    }

    for (const auto& e : result.condensed) {
        auto& parent = result.clusters[e.parent];
        parent.stability += (e.lambda - parent.birth_lambda) * static_cast<double>(e.child_size);
    }
}

void select_clusters(std::size_t n, std::size_t min_cluster_size, HdbscanResult& result) {
    auto& clusters = result.clusters;
    const std::size_t k = clusters.size();
    std::vector<std::vector<std::size_t>> children(k);
    for (std::size_t c = 1; c < k; ++c) children[clusters[c].parent].push_back(c);

    std::vector<double> value(k, 0.0);
    auto deselect_below = [&](std::size_t c) {
        std::vector<std::size_t> todo(children[c]);
        while (!todo.empty()) {
            auto x = todo.back();
            todo.pop_back();
            clusters[x].selected = false;
            todo.insert(todo.end(), children[x].begin(), children[x].end());
        }
    };
    for (std::size_t c = k; c-- > 1;) {
        if (children[c].empty()) {
            clusters[c].selected = true;
            value[c] = clusters[c].stability;
            continue;
        }
        double sum = 0.0;
        for (auto ch : children[c]) sum += value[ch];
        if (sum > clusters[c].stability) {
            clusters[c].selected = false;
            value[c] = sum;
        } else {
            clusters[c].selected = true;
            value[c] = clusters[c].stability;
            deselect_below(c);
        }
    }

    std::vector<std::size_t> fell_from(n, 0);
    std::vector<double> fell_at(n, 0.0);
    for (const auto& e : result.condensed)
        if (!e.child_is_cluster) {
            fell_from[e.child] = e.parent;
            fell_at[e.child] = e.lambda;
        }

    std::vector<int> labels(n, kNoise);
    if (children[0].empty()) {
        // Only the root exists: it counts as one cluster when enough points
        // stay together until the densest level.
        double top = -1.0;
        for (std::size_t p = 0; p < n; ++p) top = std::max(top, fell_at[p]);
        std::size_t at_top = 0;
        for (std::size_t p = 0; p < n; ++p) at_top += fell_at[p] == top;
        if (n > 0 && at_top >= min_cluster_size) {
            clusters[0].selected = true;
            for (std::size_t p = 0; p < n; ++p)
                if (fell_at[p] == top) labels[p] = 0;
        }
    } else {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t c = fell_from[p]; c != 0; c = clusters[c].parent)
                if (clusters[c].selected) {
                    labels[p] = static_cast<int>(c);
                    break;
                }
        }
    }
    result.assignment = ClusterAssignment::from_labels(std::move(labels));
}

HdbscanResult hdbscan_detailed(const std::vector<EmbeddingVector>& points, const ClusteringParams& params) {
    if (params.min_cluster_size < 2) throw ClusteringError("min_cluster_size must be at least 2");
    if (points.size() < params.min_cluster_size)
        throw ClusteringError("too few points: " + std::to_string(points.size()) + " < min_cluster_size " +
                              std::to_string(params.min_cluster_size));
    for (const auto& p : points) {
        if (!p.all_finite()) throw ClusteringError("point has a non-finite coordinate");
        if (!p.is_unit()) throw ClusteringError("points must be unit-normalized");
    }
    HdbscanResult result;
    const auto distances = pairwise_distances(points);
    result.core_distances = core_distances(distances, params.effective_min_samples());
    result.mst = minimum_spanning_tree(mutual_reachability(distances, result.core_distances));
    condense(points.size(), result.mst, params.min_cluster_size, result);
    select_clusters(points.size(), params.min_cluster_size, result);
    return result;
}

ClusterAssignment hdbscan(const std::vector<EmbeddingVector>& points, const ClusteringParams& params) {
    return hdbscan_detailed(points, params).assignment;
}

nlohmann::json condensed_tree_json(const HdbscanResult& result) {
    using nlohmann::json;
    auto num = [](double x) { return std::isinf(x) ? json("inf") : json(x); };
    json clusters = json::array();
    for (const auto& c : result.clusters)
        clusters.push_back({{"id", c.id},
                            {"parent", c.parent},
                            {"birth_lambda", num(c.birth_lambda)},
                            {"size", c.size},
                            {"stability", num(c.stability)},
                            {"selected", c.selected}});
    json entries = json::array();
    for (const auto& e : result.condensed)
        entries.push_back({{"parent", e.parent},
                           {"child", e.child},
                           {"child_is_cluster", e.child_is_cluster},
                           {"lambda", num(e.lambda)},
                           {"child_size", e.child_size}});
    return json{{"clusters", clusters}, {"entries", entries}, {"labels", result.assignment.labels}};
}

}  // namespace discourse::clustering
