#include "fixtures.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace discourse::testing {

double gaussian(SplitMix64& rng) {
    double u1 = rng.uniform();
    while (u1 <= 0.0) u1 = rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

EmbeddingVector random_unit_vector(SplitMix64& rng, std::size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) x = gaussian(rng);
    return EmbeddingVector(std::move(v)).normalized();
}

std::vector<EmbeddingVector> random_unit_vectors(SplitMix64& rng, std::size_t n, std::size_t dim) {
    std::vector<EmbeddingVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_unit_vector(rng, dim));
    return out;
}

EmbeddingVector jitter(SplitMix64& rng, const EmbeddingVector& center, double sigma) {
    std::vector<double> v = center.values();
    for (auto& x : v) x += sigma * gaussian(rng);
    return EmbeddingVector(std::move(v)).normalized();
}

std::vector<EmbeddingVector> orthogonal_centers(std::size_t k, std::size_t dim) {
    std::vector<EmbeddingVector> out;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> v(dim, 0.0);
        v[i % dim] = 1.0;
        out.emplace_back(std::move(v));
    }
    return out;
}

PlantedGroups planted_groups(std::uint64_t seed, std::size_t k, std::size_t per_group, std::size_t dim,
                             double sigma, std::size_t noise) {
    SplitMix64 rng(seed);
    PlantedGroups out;
    out.centers = orthogonal_centers(k, dim);
    for (std::size_t g = 0; g < k; ++g)
        for (std::size_t i = 0; i < per_group; ++i) {
            out.points.push_back(jitter(rng, out.centers[g], sigma));
            out.truth.push_back(static_cast<int>(g));
        }
    for (std::size_t i = 0; i < noise; ++i) {
        out.points.push_back(random_unit_vector(rng, dim));
        out.truth.push_back(-1);
    }
    return out;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] < 0) != (b[i] < 0)) return false;
        if (a[i] < 0) continue;
        auto [it1, new1] = ab.emplace(a[i], b[i]);
        auto [it2, new2] = ba.emplace(b[i], a[i]);
        if (it1->second != b[i] || it2->second != a[i]) return false;
    }
    return true;
}

std::string data_path(const std::string& name) { return std::string(DISCOURSE_TEST_DATA_DIR) + "/" + name; }

}  // namespace discourse::testing

namespace discourse::testing {

HdbscanInstance random_hdbscan_instance(std::uint64_t seed) {
    SplitMix64 rng(seed);
    HdbscanInstance inst;
    const std::size_t dim = 2 + rng.below(7);
    const std::size_t n = 8 + rng.below(33);
    inst.min_cluster_size = 2 + rng.below(4);
    inst.min_samples = 1 + rng.below(inst.min_cluster_size + 1);
    const std::size_t blobs = 1 + rng.below(4);
    std::vector<EmbeddingVector> centers = random_unit_vectors(rng, blobs, dim);
    const double sigma = 0.02 + 0.2 * rng.uniform();
    const bool duplicates = rng.below(4) == 0;
    while (inst.points.size() < n) {
        const auto roll = rng.below(10);
        if (duplicates && roll == 0 && !inst.points.empty()) {
            inst.points.push_back(inst.points[rng.below(inst.points.size())]);
        } else if (roll < 2) {
            inst.points.push_back(random_unit_vector(rng, dim));
        } else {
            inst.points.push_back(jitter(rng, centers[rng.below(blobs)], sigma));
        }
    }
    return inst;
}

std::vector<std::vector<double>> raw_values(const std::vector<EmbeddingVector>& points) {
    std::vector<std::vector<double>> out;
    for (const auto& p : points) out.push_back(p.values());
    return out;
}

}  // namespace discourse::testing
