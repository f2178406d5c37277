#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace discourse {

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fixed-dimension real vector produced by an embedding backend. Vectors
/// coming out of the gateway are unit-normalized.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t dim() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double norm() const;
    bool all_finite() const;
    bool is_unit(double tol = 1e-6) const;

    /// Copy scaled to unit length. Throws std::domain_error for the zero
    /// vector or non-finite entries.
    EmbeddingVector normalized() const;

    EmbeddingVector operator-() const;

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<double> values_;
};

/// Dot product of the normalized inputs, clamped to [-1, 1].
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

double dot(const EmbeddingVector& a, const EmbeddingVector& b);

double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b);

/// Normalized mean of the inputs (the centroid direction).
EmbeddingVector mean_direction(std::span<const EmbeddingVector> vectors);

/// Indices of `scores` ordered by score descending, ties by `keys` ascending.
template <class Key>
std::vector<std::size_t> rank_descending(const std::vector<double>& scores, const std::vector<Key>& keys) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return keys[a] < keys[b];
    });
    return order;
}

void to_json(nlohmann::json& j, const EmbeddingVector& v);
void from_json(const nlohmann::json& j, EmbeddingVector& v);

}  // namespace discourse
