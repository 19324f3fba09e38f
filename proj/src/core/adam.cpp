#include "core/adam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace vgc {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
    require(params.size() == grads.size() && params.size() == state.m.size(),
            ErrorKind::invalid_argument, "adam_step: shape mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            raise(ErrorKind::numeric,
                  "adam_step: non-finite gradient at index " + std::to_string(i));

    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

double grad_check(const DifferentiableLoss& loss, std::span<const double> params,
                  RandomSource& rng, int n_coords, double h) {
    std::vector<double> p(params.begin(), params.end());
    std::vector<double> analytic;
    loss(p, &analytic);
    require(analytic.size() == p.size(), ErrorKind::invalid_argument,
            "grad_check: gradient length mismatch");

    double worst = 0.0;
    for (int c = 0; c < n_coords; ++c) {
        const std::size_t i = static_cast<std::size_t>(rng.next_below(p.size()));
        const double saved = p[i];
        p[i] = saved + h;
        const double up = loss(p, nullptr);
        p[i] = saved - h;
        const double down = loss(p, nullptr);
        p[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-4});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

}  // namespace vgc
