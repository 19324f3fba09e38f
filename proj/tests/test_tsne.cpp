#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"
#include "core/tsne.hpp"

using namespace vgc;

namespace {

Dataset two_gaussians_10d(std::size_t n, std::uint64_t seed) {
    MixtureSpec spec;
    spec.means = Matrix(2, 10);
    for (std::size_t j = 0; j < 10; ++j) spec.means(1, j) = 20.0 / std::sqrt(10.0);
    Matrix cov = Matrix::identity(10);
    spec.covariances = {cov, cov};
    spec.weights = {0.5, 0.5};
    spec.n = n;
    spec.seed = seed;
    return gen_mixture(spec);
}

// Separability along the centroid axis: max of one class below min of the
// other after projection.
bool separable_by_centroid_axis(const Matrix& y, const std::vector<int>& labels) {
    double c0x = 0, c0y = 0, c1x = 0, c1y = 0;
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < y.rows(); ++i) {
        if (labels[i] == 0) {
            c0x += y(i, 0);
            c0y += y(i, 1);
            ++n0;
        } else {
            c1x += y(i, 0);
            c1y += y(i, 1);
            ++n1;
        }
    }
    c0x /= n0; c0y /= n0; c1x /= n1; c1y /= n1;
    const double wx = c1x - c0x, wy = c1y - c0y;
    double max0 = -1e300, min1 = 1e300;
    for (std::size_t i = 0; i < y.rows(); ++i) {
        const double proj = y(i, 0) * wx + y(i, 1) * wy;
        if (labels[i] == 0)
            max0 = std::max(max0, proj);
        else
            min1 = std::min(min1, proj);
    }
    return max0 < min1;
}

}  // namespace

TEST_CASE("tsne: perplexity precondition") {
    Matrix points(50, 3);
    TsneConfig cfg;
    cfg.perplexity = 20.0;  // needs n > 60
    CHECK_THROWS_AS(tsne_embed(points, cfg), VgcError);
}

TEST_CASE("tsne: affinities are symmetric, non-negative, sum to one, and hit the entropy") {
    RandomSource rng(3);
    const std::size_t n = 120;
    Matrix points(n, 4);
    for (double& v : points.flat()) v = rng.next_gaussian();
    const double perplexity = 25.0;
    Matrix p = tsne_affinities(points, perplexity, 1e-5);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(p(i, j) >= 0.0);
            CHECK(p(i, j) == p(j, i));
            total += p(i, j);
        }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

    // Independent oracle for the entropy condition: a plain geometric
    // bisection per row, sharing no code with the implementation's search.
    Matrix dist2(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            dist2(i, j) = i == j ? 0.0 : squared_distance(points.row(i), points.row(j));
    for (std::size_t i = 0; i < n; ++i) {
        // Reference bisection, independent of the implementation's loop.
        double lo = 1e-12, hi = 1e12;
        for (int it = 0; it < 400; ++it) {
            const double beta = std::sqrt(lo * hi);
            double sum = 0.0, weighted = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double w = std::exp(-beta * dist2(i, j));
                sum += w;
                weighted += beta * dist2(i, j) * w;
            }
            const double entropy = weighted / sum + std::log(sum);
            if (entropy > std::log(perplexity))
                lo = beta;
            else
                hi = beta;
        }
        const double beta = std::sqrt(lo * hi);
        double sum = 0.0, weighted = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = std::exp(-beta * dist2(i, j));
            sum += w;
            weighted += beta * dist2(i, j) * w;
        }
        const double entropy = weighted / sum + std::log(sum);
        CHECK(std::abs(entropy - std::log(perplexity)) < 1e-4);
    }
}

TEST_CASE("tsne: output is centered and deterministic across thread counts") {
    Dataset data = two_gaussians_10d(150, 7);
    TsneConfig cfg;
    cfg.perplexity = 15.0;
    cfg.iterations = 120;
    cfg.seed = 1;

    set_max_threads(1);
    auto single = tsne_embed(data.points, cfg);
    set_max_threads(4);
    auto quad = tsne_embed(data.points, cfg);
    set_max_threads(0);
    CHECK(single.embedding == quad.embedding);

    auto means = column_means(single.embedding);
    CHECK(std::abs(means[0]) < 1e-9);
    CHECK(std::abs(means[1]) < 1e-9);
}

TEST_CASE("tsne: KL trace is non-negative throughout") {
    Dataset data = two_gaussians_10d(150, 8);
    TsneConfig cfg;
    cfg.perplexity = 15.0;
    cfg.iterations = 300;
    cfg.seed = 5;
    auto result = tsne_embed(data.points, cfg);
    REQUIRE(!result.kl_trace.empty());
    for (const auto& [iter, kl] : result.kl_trace) CHECK(kl >= 0.0);
}

TEST_CASE("tsne: separates two far 10-D Gaussians in at least 9 of 10 seeds") {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Dataset data = two_gaussians_10d(400, 100 + seed);
        TsneConfig cfg;
        cfg.perplexity = 30.0;
        cfg.iterations = 500;
        cfg.seed = seed;
        auto result = tsne_embed(data.points, cfg);
        if (separable_by_centroid_axis(result.embedding, data.labels)) ++ok;
    }
    CHECK(ok >= 9);
}
