#include "core/density.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace vgc {

void SmoothedGradConfig::validate() const {
    require(sigma >= 0.0, ErrorKind::invalid_argument, "SmoothedGradConfig: sigma must be >= 0");
    require(m_outer >= 1 && n_inner >= 1, ErrorKind::invalid_argument,
            "SmoothedGradConfig: sample counts must be >= 1");
}

void AscentConfig::validate() const {
    require(step_size > 0.0, ErrorKind::invalid_argument, "AscentConfig: step size must be > 0");
    require(iterations >= 0, ErrorKind::invalid_argument, "AscentConfig: negative iterations");
}

namespace {

void check_finite(std::span<const double> v, const char* who) {
    for (double x : v)
        require(std::isfinite(x), ErrorKind::numeric,
                std::string(who) + ": non-finite model output");
}

// Accumulates (1/n) sum_i mu(z_i) into accum, z_i ~ q(z | y).
void accumulate_decoded_posterior_mean(const VaeModel& model, std::span<const double> y,
                                       int n_inner, RandomSource& rng, double weight,
                                       std::span<double> accum) {
    auto [mu_e, logvar_e] = model.encode(y);
    check_finite(mu_e, "grad_direction");
    check_finite(logvar_e, "grad_direction");
    std::vector<double> std_e(logvar_e.size());
    for (std::size_t j = 0; j < logvar_e.size(); ++j) std_e[j] = std::exp(0.5 * logvar_e[j]);
    std::vector<double> z(mu_e.size());
    for (int i = 0; i < n_inner; ++i) {
        for (std::size_t j = 0; j < z.size(); ++j)
            z[j] = mu_e[j] + std_e[j] * rng.next_gaussian();
        auto decoded = model.decode(z);
        check_finite(decoded, "grad_direction");
        const double w = weight / static_cast<double>(n_inner);
        for (std::size_t j = 0; j < accum.size(); ++j) accum[j] += w * decoded[j];
    }
}

}  // namespace

GradientEstimate grad_direction(const VaeModel& model, std::span<const double> x, int n_inner,
                                RandomSource& rng) {
    require(n_inner >= 1, ErrorKind::invalid_argument, "grad_direction: n_inner must be >= 1");
    GradientEstimate est;
    est.n_inner = n_inner;
    est.direction.assign(x.size(), 0.0);
    accumulate_decoded_posterior_mean(model, x, n_inner, rng, 1.0, est.direction);
    for (std::size_t j = 0; j < x.size(); ++j) est.direction[j] -= x[j];
    return est;
}

GradientEstimate grad_direction_smoothed(const VaeModel& model, std::span<const double> x,
                                         const SmoothedGradConfig& cfg, RandomSource& rng) {
    cfg.validate();
    GradientEstimate est;
    est.m_outer = cfg.m_outer;
    est.n_inner = cfg.n_inner;
    est.direction.assign(x.size(), 0.0);
    const double noise_std = std::sqrt(cfg.sigma);
    std::vector<double> shifted(x.size());
    for (int k = 0; k < cfg.m_outer; ++k) {
        for (std::size_t j = 0; j < x.size(); ++j)
            shifted[j] = x[j] + noise_std * rng.next_gaussian();
        accumulate_decoded_posterior_mean(model, shifted, cfg.n_inner, rng,
                                          1.0 / static_cast<double>(cfg.m_outer), est.direction);
    }
    for (std::size_t j = 0; j < x.size(); ++j) est.direction[j] -= x[j];
    return est;
}

std::vector<double> naive_grad_p(const VaeModel& model, std::span<const double> x, int n_samples,
                                 RandomSource& rng) {
    require(n_samples >= 1, ErrorKind::invalid_argument, "naive_grad_p: n must be >= 1");
    const std::size_t d = model.data_dim();
    require(x.size() == d, ErrorKind::invalid_argument, "naive_grad_p: dimension mismatch");
    const double s2 = model.sigma_x2();
    // Normalization of N(mu, s2 I) in d dimensions, in log space.
    const double log_norm =
        -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * s2);

    std::vector<double> z(model.latent_dim());
    std::vector<double> grad(d, 0.0);
    for (int k = 0; k < n_samples; ++k) {
        for (double& v : z) v = rng.next_gaussian();
        auto mu = model.decode(z);
        check_finite(mu, "naive_grad_p");
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x[j] - mu[j];
            sq += diff * diff;
        }
        const double log_density = log_norm - 0.5 * sq / s2;
        require(log_density < 700.0, ErrorKind::numeric, "naive_grad_p: density overflow");
        // Underflow to zero is the expected behavior far from the data
        // manifold; the term then contributes nothing.
        const double density = std::exp(log_density);
        const double w = density / (s2 * static_cast<double>(n_samples));
        for (std::size_t j = 0; j < d; ++j) grad[j] += w * (mu[j] - x[j]);
    }
    return grad;
}

AscentResult ascend(const VaeModel& model, std::span<const double> x0, const AscentConfig& acfg,
                    const SmoothedGradConfig& scfg) {
    acfg.validate();
    scfg.validate();
    AscentResult result;
    result.point.assign(x0.begin(), x0.end());
    RandomSource rng(mix_seed_bytes(acfg.seed, x0.data(), x0.size() * sizeof(double)));
    RandomSource stream = rng.child("ascend");

    const bool record = acfg.trajectory_stride > 0;
    std::vector<double> trajectory_flat;
    auto record_point = [&] {
        trajectory_flat.insert(trajectory_flat.end(), result.point.begin(), result.point.end());
    };
    if (record) record_point();

    for (long t = 0; t < acfg.iterations; ++t) {
        GradientEstimate est = grad_direction_smoothed(model, result.point, scfg, stream);
        for (std::size_t j = 0; j < result.point.size(); ++j)
            result.point[j] += acfg.step_size * est.direction[j];
        for (double v : result.point)
            require(std::isfinite(v), ErrorKind::numeric,
                    "ascend: non-finite iterate at iteration " + std::to_string(t));
        if (record && ((t + 1) % acfg.trajectory_stride == 0 || t + 1 == acfg.iterations))
            record_point();
    }
    if (record) {
        const std::size_t rows = trajectory_flat.size() / x0.size();
        result.trajectory = Matrix(rows, x0.size());
        std::memcpy(result.trajectory.data(), trajectory_flat.data(),
                    trajectory_flat.size() * sizeof(double));
    }
    return result;
}

Matrix ascend_dataset(const VaeModel& model, const Matrix& points, const AscentConfig& acfg,
                      const SmoothedGradConfig& scfg) {
    acfg.validate();
    scfg.validate();
    Matrix out(points.rows(), points.cols());
    std::vector<std::string> errors(points.rows());
    parallel_for(points.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                AscentConfig per_point = acfg;
                per_point.trajectory_stride = 0;
                auto res = ascend(model, points.row(i), per_point, scfg);
                std::memcpy(out.row(i).data(), res.point.data(),
                            res.point.size() * sizeof(double));
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    });
    for (std::size_t i = 0; i < points.rows(); ++i)
        if (!errors[i].empty())
            raise(ErrorKind::numeric,
                  "ascend_dataset: point " + std::to_string(i) + ": " + errors[i]);
    return out;
}

}  // namespace vgc
