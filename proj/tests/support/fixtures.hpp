#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "discourse/embedding.hpp"
#include "discourse/hashing.hpp"

namespace discourse::testing {

/// Standard normal via Box-Muller over SplitMix64, so fixtures are identical
/// on every platform.
double gaussian(SplitMix64& rng);

EmbeddingVector random_unit_vector(SplitMix64& rng, std::size_t dim);
std::vector<EmbeddingVector> random_unit_vectors(SplitMix64& rng, std::size_t n, std::size_t dim);

/// Unit vector near `center`: center + sigma * N(0, I), renormalized.
EmbeddingVector jitter(SplitMix64& rng, const EmbeddingVector& center, double sigma);

/// Mutually orthogonal unit vectors e_0..e_{k-1} in `dim` dimensions.
std::vector<EmbeddingVector> orthogonal_centers(std::size_t k, std::size_t dim);

struct PlantedGroups {
    std::vector<EmbeddingVector> centers;
    std::vector<EmbeddingVector> points;
    std::vector<int> truth;  // group per point, -1 for background noise
};

/// `k` tight groups of `per_group` points around orthogonal centers, plus
/// `noise` uniformly random unit vectors.
PlantedGroups planted_groups(std::uint64_t seed, std::size_t k, std::size_t per_group, std::size_t dim,
                             double sigma, std::size_t noise = 0);

/// True when the two labelings define the same partition (noise must match
/// exactly; cluster ids may be permuted).
bool same_partition(const std::vector<int>& a, const std::vector<int>& b);

std::string data_path(const std::string& name);

}  // namespace discourse::testing

namespace discourse::testing {

struct HdbscanInstance {
    std::vector<EmbeddingVector> points;
    std::size_t min_cluster_size = 2;
    std::size_t min_samples = 2;
};

/// Small random clustering problem (n <= 40, dim <= 8): a few jittered blobs,
/// some uniform noise, and occasionally exact duplicates so tied distances
/// are exercised.
HdbscanInstance random_hdbscan_instance(std::uint64_t seed);

std::vector<std::vector<double>> raw_values(const std::vector<EmbeddingVector>& points);

}  // namespace discourse::testing
