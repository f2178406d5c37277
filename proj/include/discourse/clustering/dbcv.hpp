#pragma once

#include <vector>

#include "discourse/clustering/hdbscan.hpp"

namespace discourse::clustering {

struct ClusterValidity {
    double score = 0.0;
    std::vector<double> per_cluster;        // validity of each cluster
    std::vector<double> density_sparseness;  // DSC of each cluster
    std::vector<double> density_separation;  // min DSPC of each cluster to any other
};

/// Density-based clustering validation (DBCV) with dimension-weighted
/// all-points core distances. Noise counts in the size weighting only.
/// Throws ClusteringError when every point is noise or a cluster has a single
/// member.
ClusterValidity dbcv_detailed(const std::vector<EmbeddingVector>& points, const ClusterAssignment& assignment);

double dbcv(const std::vector<EmbeddingVector>& points, const ClusterAssignment& assignment);

}  // namespace discourse::clustering
