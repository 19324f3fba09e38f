#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/rng.hpp"

namespace vgc {

// Adam optimizer state. m and v track first and second gradient moments and
// must match the parameter vector length; t counts completed steps.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 1e-4;

    explicit AdamState(std::size_t n_params, double lr = 1e-4)
        : m(n_params, 0.0), v(n_params, 0.0), learning_rate(lr) {}
};

// Standard bias-corrected Adam update, in place. Raises on non-finite
// gradient entries, naming the offending index.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

// A scalar loss that can also report its gradient when asked. grad_out may
// be null, in which case only the value is needed.
using DifferentiableLoss =
    std::function<double(std::span<const double> params, std::vector<double>* grad_out)>;

// Compares the loss's reported gradient against central finite differences
// (step h) on n_coords randomly chosen coordinates; returns the maximum
// relative error. Relative error uses max(|analytic|, |numeric|, 1e-4) as
// denominator so near-zero coordinates do not dominate.
double grad_check(const DifferentiableLoss& loss, std::span<const double> params,
                  RandomSource& rng, int n_coords = 20, double h = 1e-5);

}  // namespace vgc
