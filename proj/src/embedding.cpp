#include "discourse/embedding.hpp"

#include <cmath>
#include <string>

namespace discourse {

double EmbeddingVector::norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

bool EmbeddingVector::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool EmbeddingVector::is_unit(double tol) const { return std::abs(norm() - 1.0) <= tol; }

EmbeddingVector EmbeddingVector::normalized() const {
    if (!all_finite()) throw std::domain_error("embedding has non-finite entries");
    const double n = norm();
    if (n == 0.0) throw std::domain_error("cannot normalize a zero vector");
    std::vector<double> out(values_);
    for (double& v : out) v /= n;
    return EmbeddingVector(std::move(out));
}

EmbeddingVector EmbeddingVector::operator-() const {
    std::vector<double> out(values_);
    for (double& v : out) v = -v;
    return EmbeddingVector(std::move(out));
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    const double d = dot(a, b);
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw std::domain_error("cosine similarity of a zero vector");
    return std::clamp(d / (na * nb), -1.0, 1.0);
}

double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("dimension mismatch in euclidean_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

EmbeddingVector mean_direction(std::span<const EmbeddingVector> vectors) {
    if (vectors.empty()) throw std::invalid_argument("mean_direction of an empty set");
    std::vector<double> sum(vectors.front().dim(), 0.0);
    for (const auto& v : vectors) {
        if (v.dim() != sum.size()) throw DimensionMismatch("dimension mismatch in mean_direction");
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
    }
    for (double& s : sum) s /= static_cast<double>(vectors.size());
    return EmbeddingVector(std::move(sum)).normalized();
}

void to_json(nlohmann::json& j, const EmbeddingVector& v) { j = v.values(); }

void from_json(const nlohmann::json& j, EmbeddingVector& v) { v = EmbeddingVector(j.get<std::vector<double>>()); }

}  // namespace discourse
