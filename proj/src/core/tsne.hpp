#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "core/matrix.hpp"

namespace vgc {

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    std::uint64_t seed = 0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch_iteration = 250;
    double early_exaggeration = 12.0;
    int early_exaggeration_iterations = 250;
    // Entropy of each conditional must match log(perplexity) this closely.
    double entropy_tolerance = 1e-5;
};

struct TsneResult {
    Matrix embedding;  // (n, 2), centered
    std::vector<std::pair<int, double>> kl_trace;  // (iteration, KL(P || Q))
};

// Exact O(n^2) t-SNE to two dimensions: per-row precision search against
// the target entropy, symmetrized affinities, gradient descent with
// momentum and gains, early exaggeration, centering every iteration.
TsneResult tsne_embed(const Matrix& points, const TsneConfig& cfg);

// Symmetrized, normalized affinity matrix (exposed for tests).
Matrix tsne_affinities(const Matrix& points, double perplexity, double entropy_tolerance);

}  // namespace vgc
