#include "core/tsne.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace vgc {

Matrix tsne_affinities(const Matrix& points, double perplexity, double entropy_tolerance) {
    const std::size_t n = points.rows();
    require(perplexity >= 1.0, ErrorKind::invalid_argument, "tsne: perplexity must be >= 1");
    require(3.0 * perplexity < static_cast<double>(n), ErrorKind::invalid_argument,
            "tsne: perplexity infeasible, need 3 * perplexity < n");

    Matrix dist2(n, n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = 0; j < n; ++j)
                dist2(i, j) = i == j ? 0.0 : squared_distance(points.row(i), points.row(j));
    });

    // Per-row precision (beta) search so each conditional's entropy hits
    // log(perplexity).
    Matrix p(n, n);
    const double target_entropy = std::log(perplexity);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double beta = 1.0;
            double beta_min = -std::numeric_limits<double>::infinity();
            double beta_max = std::numeric_limits<double>::infinity();
            double sum_p = 0.0;
            for (int iter = 0; iter < 200; ++iter) {
                sum_p = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    p(i, j) = i == j ? 0.0 : std::exp(-beta * dist2(i, j));
                    sum_p += p(i, j);
                }
                double weighted = 0.0;
                for (std::size_t j = 0; j < n; ++j) weighted += beta * dist2(i, j) * p(i, j);
                const double entropy = weighted / sum_p + std::log(sum_p);
                const double diff = entropy - target_entropy;
                if (std::abs(diff) <= entropy_tolerance) break;
                if (diff > 0.0) {
                    beta_min = beta;
                    beta = std::isinf(beta_max) ? beta * 2.0 : 0.5 * (beta + beta_max);
                } else {
                    beta_max = beta;
                    beta = std::isinf(beta_min) ? beta * 0.5 : 0.5 * (beta + beta_min);
                }
            }
            if (sum_p <= 0.0) {
                // Degenerate row (all neighbors coincide); fall back to uniform.
                for (std::size_t j = 0; j < n; ++j) p(i, j) = i == j ? 0.0 : 1.0;
                sum_p = static_cast<double>(n - 1);
            }
            for (std::size_t j = 0; j < n; ++j) p(i, j) /= sum_p;
        }
    });

    // Symmetrize and normalize to a joint distribution.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (p(i, j) + p(j, i)) / (2.0 * static_cast<double>(n));
            p(i, j) = v;
            p(j, i) = v;
        }
    for (std::size_t i = 0; i < n; ++i) p(i, i) = 0.0;
    return p;
}

TsneResult tsne_embed(const Matrix& points, const TsneConfig& cfg) {
    const std::size_t n = points.rows();
    require(cfg.iterations >= 1, ErrorKind::invalid_argument, "tsne: iterations must be >= 1");
    Matrix p = tsne_affinities(points, cfg.perplexity, cfg.entropy_tolerance);

    constexpr std::size_t kOutDim = 2;
    Matrix y(n, kOutDim);
    RandomSource rng = RandomSource(cfg.seed).child("tsne-init");
    for (double& v : y.flat()) v = 1e-4 * rng.next_gaussian();

    Matrix velocity(n, kOutDim);
    Matrix gains(n, kOutDim, 1.0);
    Matrix gradient(n, kOutDim);
    std::vector<double> row_q_sums(n);

    TsneResult result;
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const double exaggeration = iter < cfg.early_exaggeration_iterations
                                        ? cfg.early_exaggeration
                                        : 1.0;
        const double momentum = iter < cfg.momentum_switch_iteration ? cfg.initial_momentum
                                                                     : cfg.final_momentum;

        // Pass 1: per-row sums of the unnormalized Student-t kernel; the
        // total is reduced sequentially in index order so the result does
        // not depend on the thread count.
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    s += 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
                }
                row_q_sums[i] = s;
            }
        });
        double sum_q = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum_q += row_q_sums[i];

        // Pass 2: gradient rows.
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                double gx = 0.0, gy = 0.0;
                const double yi0 = y(i, 0), yi1 = y(i, 1);
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const double d0 = yi0 - y(j, 0);
                    const double d1 = yi1 - y(j, 1);
                    const double qt = 1.0 / (1.0 + d0 * d0 + d1 * d1);
                    const double mult = (exaggeration * p(i, j) - qt / sum_q) * qt;
                    gx += mult * d0;
                    gy += mult * d1;
                }
                gradient(i, 0) = 4.0 * gx;
                gradient(i, 1) = 4.0 * gy;
            }
        });

        for (std::size_t i = 0; i < n * kOutDim; ++i) {
            const double g = gradient.flat()[i];
            const double v = velocity.flat()[i];
            double& gain = gains.flat()[i];
            gain = (g > 0.0) == (v > 0.0) ? gain * 0.8 : gain + 0.2;
            gain = std::max(gain, 0.1);
            velocity.flat()[i] = momentum * v - cfg.learning_rate * gain * g;
            y.flat()[i] += velocity.flat()[i];
        }

        auto means = column_means(y);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < kOutDim; ++j) y(i, j) -= means[j];

        if (!y.all_finite())
            raise(ErrorKind::numeric,
                  "tsne: non-finite embedding at iteration " + std::to_string(iter));

        if (iter % 50 == 0 || iter + 1 == cfg.iterations) {
            // Q must be renormalized on the just-updated embedding, or the
            // divergence is not a KL and can dip below zero.
            double trace_sum_q = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    trace_sum_q += 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
                }
            double kl = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j || p(i, j) <= 0.0) continue;
                    const double qt = 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
                    kl += p(i, j) * std::log(p(i, j) / (qt / trace_sum_q));
                }
            result.kl_trace.emplace_back(iter, kl);
        }
    }

    result.embedding = std::move(y);
    return result;
}

}  // namespace vgc
