#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"
#include "core/vae.hpp"

namespace vgc {

// Monte Carlo settings for the smoothed log-density gradient. sigma is the
// *variance* of the isotropic smoothing noise eps_k ~ N(0, sigma * I);
// m_outer counts noise draws, n_inner counts latent draws per noise draw.
struct SmoothedGradConfig {
    double sigma = 0.0;
    int m_outer = 1;
    int n_inner = 1;

    void validate() const;
};

struct AscentConfig {
    double step_size = 0.001;
    long iterations = 7000;
    std::uint64_t seed = 0;
    // Record every stride-th iterate (plus start and end) when > 0.
    long trajectory_stride = 0;

    void validate() const;
};

// Direction d = mean of decoded latent samples minus x. This is
// grad log p(x) up to the factor 1/sigma_x2: for an isotropic Gaussian
// decoder, sigma_x2 * grad log p(x) = E_{p(z|x)}[mu(z)] - x, with the
// encoder posterior standing in for p(z|x).
struct GradientEstimate {
    std::vector<double> direction;
    int m_outer = 1;
    int n_inner = 1;
};

GradientEstimate grad_direction(const VaeModel& model, std::span<const double> x, int n_inner,
                                RandomSource& rng);

GradientEstimate grad_direction_smoothed(const VaeModel& model, std::span<const double> x,
                                         const SmoothedGradConfig& cfg, RandomSource& rng);

// Prior-sampling estimator of grad p(x) (not log p): the mean of
// grad_x p(x|z_k) over z_k ~ N(0, I). Kept as a diagnostic for small data
// dimension; its variance blows up away from the data, which is what
// motivates the posterior-sampled direction above.
std::vector<double> naive_grad_p(const VaeModel& model, std::span<const double> x, int n_samples,
                                 RandomSource& rng);

struct AscentResult {
    std::vector<double> point;
    Matrix trajectory;  // empty unless trajectory_stride > 0
};

// x <- x + step_size * d for exactly `iterations` steps, resampling the
// smoothed direction each step. The noise stream is a function of
// (seed, x0), so ascending a point gives the same answer whether it is
// processed alone or as a row of a dataset.
AscentResult ascend(const VaeModel& model, std::span<const double> x0, const AscentConfig& acfg,
                    const SmoothedGradConfig& scfg);

// Row-wise ascend; output row order matches input. Rows are processed in
// parallel; per-row streams make the result independent of the schedule.
Matrix ascend_dataset(const VaeModel& model, const Matrix& points, const AscentConfig& acfg,
                      const SmoothedGradConfig& scfg);

}  // namespace vgc
