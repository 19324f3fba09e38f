#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace vgc {

struct Dataset {
    Matrix points;
    std::vector<int> labels;  // empty when has_labels is false
    bool has_labels = false;
    std::string provenance;

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
    void validate() const;
};

// Gaussian mixture specification: k component means (k, d), one full
// covariance per component, weights summing to 1.
struct MixtureSpec {
    Matrix means;
    std::vector<Matrix> covariances;
    std::vector<double> weights;
    std::size_t n = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Draws n points; labels record the generating component.
Dataset gen_mixture(const MixtureSpec& spec);

// Uniform subsample without replacement; labels carried along.
Dataset subsample(const Dataset& dataset, std::size_t size, RandomSource& rng);

}  // namespace vgc
