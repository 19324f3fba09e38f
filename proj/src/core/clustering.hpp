#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/matrix.hpp"

namespace vgc {

// Per-point cluster labels. Labels are dense in 0..n_clusters-1; kNoise
// marks points outside every cluster and never counts toward n_clusters.
constexpr int kNoiseLabel = -1;

struct Labeling {
    std::vector<int> labels;
    int n_clusters = 0;
};

// Renumbers labels to 0..k-1 in order of first appearance, keeping noise.
Labeling canonicalize_labels(std::span<const int> raw);

// Keeps the k most frequent clusters (relabeled 0..k-1 by descending
// frequency) and folds everything else, noise included, into bucket k.
Labeling top_k_labeling(const Labeling& labeling, int k);

struct DbscanParams {
    double eps = 0.2;   // Euclidean radius
    int m_core = 2;     // minimum count of OTHER points within eps

    void validate() const;
};

// DBSCAN with the core rule counted over *other* points (the point itself
// is excluded, one less than minPts conventions that include it). Border
// points join the first cluster that claims them in seed-index order.
Labeling dbscan(const Matrix& points, const DbscanParams& params);

Labeling kmeans(const Matrix& points, int k, std::uint64_t seed);

struct GmmParams {
    int k = 10;
    int max_iterations = 200;
    double tolerance = 1e-7;   // on mean log-likelihood improvement
    int restarts = 3;
    std::uint64_t seed = 0;
    double covariance_reg = 1e-6;  // added to covariance diagonals

    void validate(std::size_t n) const;
};

struct GmmResult {
    Labeling labels;
    Matrix means;                     // (k, d)
    std::vector<Matrix> covariances;  // k full (d, d) matrices
    std::vector<double> weights;
    std::vector<double> log_likelihood_trace;  // mean log-likelihood per EM step
};

// Full-covariance Gaussian mixture fit by EM, best of `restarts` k-means++
// initializations by final log-likelihood.
GmmResult fit_gmm(const Matrix& points, const GmmParams& params);

struct AssignmentResult {
    std::vector<int> assignment;  // row i -> column assignment[i]
    double cost = 0.0;
};

// Minimum-cost perfect assignment on a square cost matrix (Jonker-Volgenant
// style shortest augmenting paths).
AssignmentResult hungarian(const Matrix& cost);

// Unsupervised clustering accuracy: the best one-to-one map between
// predicted and true labels, scored as fraction correct. Noise predictions
// participate as an ordinary label value.
double clustering_accuracy(std::span<const int> true_labels, std::span<const int> predicted);

}  // namespace vgc
