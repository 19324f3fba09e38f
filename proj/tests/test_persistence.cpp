#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/persistence.hpp"
#include "core/rng.hpp"

using namespace vgc;

namespace {

PersistenceCurve curve_from(std::vector<int> counts) {
    PersistenceCurve curve;
    for (std::size_t i = 0; i < counts.size(); ++i)
        curve.eps.push_back(0.1 * static_cast<double>(i + 1));
    curve.counts = std::move(counts);
    return curve;
}

Dataset two_blobs(double separation, double sd, std::size_t n, std::uint64_t seed) {
    MixtureSpec spec;
    spec.means = Matrix::from_rows({{0.0, 0.0}, {separation, 0.0}});
    Matrix cov(2, 2);
    cov(0, 0) = cov(1, 1) = sd * sd;
    spec.covariances = {cov, cov};
    spec.weights = {0.5, 0.5};
    spec.n = n;
    spec.seed = seed;
    return gen_mixture(spec);
}

}  // namespace

TEST_CASE("EpsGrid: validation and values") {
    EpsGrid grid = uniform_grid(0.1, 1.0, 10);
    auto values = grid.values();
    REQUIRE(values.size() == 10);
    CHECK(values.front() == doctest::Approx(0.1));
    CHECK(values.back() == doctest::Approx(1.0));

    EpsGrid bad{0.0, 1.0, 0.1};
    CHECK_THROWS_AS(bad.validate(), VgcError);
    CHECK_THROWS_AS(uniform_grid(1.0, 0.5, 10), VgcError);
    CHECK_THROWS_AS(uniform_grid(0.1, 1.0, 2), VgcError);
}

TEST_CASE("curve: one tight blob reaches one cluster and stays there") {
    Dataset blob = two_blobs(0.0, 0.1, 150, 3);
    EpsGrid grid = uniform_grid(0.05, 1.0, 40);
    PersistenceCurve curve = persistence_curve(blob.points, 2, grid);
    bool seen_one = false;
    for (std::size_t i = 0; i < curve.counts.size(); ++i) {
        if (curve.counts[i] == 1) seen_one = true;
        if (seen_one) CHECK(curve.counts[i] == 1);
    }
    CHECK(seen_one);
}

TEST_CASE("curve: two distant blobs plateau at two over the expected band") {
    // Brute-force the expected counts across the grid with the eps-graph
    // (every point is core here well before the merge).
    Dataset blobs = two_blobs(20.0, 1.0, 200, 4);
    EpsGrid grid = uniform_grid(0.5, 25.0, 50);
    PersistenceCurve curve = persistence_curve(blobs.points, 1, grid);

    std::size_t plateau_two = plateau_length(curve, 2);
    CHECK(plateau_two >= 20);  // spans from intra-merge (~1) to inter-gap (~16) => ~30 steps
    CHECK(curve.counts.back() == 1);
}

TEST_CASE("curve: counts are invariant under point permutation") {
    Dataset blobs = two_blobs(5.0, 0.6, 120, 9);
    EpsGrid grid = uniform_grid(0.1, 6.0, 25);
    PersistenceCurve base = persistence_curve(blobs.points, 2, grid);

    Matrix reversed(blobs.points.rows(), 2);
    for (std::size_t i = 0; i < reversed.rows(); ++i)
        for (std::size_t j = 0; j < 2; ++j)
            reversed(i, j) = blobs.points(blobs.points.rows() - 1 - i, j);
    PersistenceCurve permuted = persistence_curve(reversed, 2, grid);
    CHECK(base.counts == permuted.counts);
}

TEST_CASE("curve: above the diameter everything merges") {
    Dataset blobs = two_blobs(3.0, 0.5, 60, 12);
    double max_d2 = 0.0;
    for (std::size_t i = 0; i < blobs.points.rows(); ++i)
        for (std::size_t j = i + 1; j < blobs.points.rows(); ++j)
            max_d2 = std::max(max_d2, squared_distance(blobs.points.row(i), blobs.points.row(j)));
    const double diameter = std::sqrt(max_d2);
    EpsGrid grid = uniform_grid(diameter * 1.01, diameter * 1.2, 3);
    PersistenceCurve curve = persistence_curve(blobs.points, 2, grid);
    for (int c : curve.counts) CHECK(c == 1);
}

TEST_CASE("curve: scaling points and grid by a power of two changes nothing") {
    Dataset blobs = two_blobs(4.0, 0.5, 100, 21);
    EpsGrid grid = uniform_grid(0.2, 5.0, 20);
    PersistenceCurve base = persistence_curve(blobs.points, 2, grid);

    const double s = 4.0;  // exact in floating point
    Matrix scaled = blobs.points;
    for (double& v : scaled.flat()) v *= s;
    EpsGrid scaled_grid{grid.eps_min * s, grid.eps_max * s, grid.step * s};
    PersistenceCurve rescaled = persistence_curve(scaled, 2, scaled_grid);
    CHECK(base.counts == rescaled.counts);
}

TEST_CASE("most_persistent: frozen rule examples") {
    CHECK(most_persistent(curve_from({1, 3, 3, 3, 2, 1})) == 3);
    CHECK(most_persistent(curve_from({5, 5, 2, 2, 2, 1})) == 2);
    CHECK_THROWS_AS(most_persistent(curve_from({1, 1, 1})), VgcError);
    try {
        most_persistent(curve_from({0, 1, 1}));
        FAIL("expected no-signal");
    } catch (const VgcError& e) {
        CHECK(e.kind() == ErrorKind::no_signal);
    }
}

TEST_CASE("most_persistent: ties prefer the larger-eps run") {
    CHECK(most_persistent(curve_from({4, 4, 3, 3, 1})) == 3);
    // A censored trailing plateau still counts.
    CHECK(most_persistent(curve_from({1, 5, 5, 3, 3, 3})) == 3);
}

TEST_CASE("scan_average: single run equals a direct subsampled scan") {
    Dataset blobs = two_blobs(8.0, 0.5, 400, 33);
    ScanConfig cfg;
    cfg.m_core = 2;
    cfg.grid = uniform_grid(0.1, 10.0, 40);
    cfg.subsample_size = 120;
    cfg.runs = 1;
    cfg.seed = 5;
    ScanResult result = scan_average(blobs.points, cfg);
    REQUIRE(result.per_run.size() == 1);
    CHECK(result.mean == static_cast<double>(result.per_run[0]));
    CHECK(result.no_signal_runs == 0);

    // Reproduce the run by hand with the same child stream.
    RandomSource run_rng = RandomSource(cfg.seed).child("scan").child(std::uint64_t{0});
    auto picked = run_rng.sample_without_replacement(blobs.points.rows(), cfg.subsample_size);
    Matrix sub(cfg.subsample_size, 2);
    for (std::size_t i = 0; i < picked.size(); ++i)
        for (std::size_t j = 0; j < 2; ++j) sub(i, j) = blobs.points(picked[i], j);
    PersistenceCurve curve = persistence_curve(sub, cfg.m_core, cfg.grid);
    CHECK(most_persistent(curve) == result.per_run[0]);
}

TEST_CASE("scan_average: deterministic given the seed") {
    Dataset blobs = two_blobs(8.0, 0.5, 300, 44);
    ScanConfig cfg;
    cfg.m_core = 2;
    cfg.grid = uniform_grid(0.1, 10.0, 30);
    cfg.subsample_size = 100;
    cfg.runs = 8;
    cfg.seed = 17;
    ScanResult a = scan_average(blobs.points, cfg);
    ScanResult b = scan_average(blobs.points, cfg);
    CHECK(a.per_run == b.per_run);
    CHECK(a.mean == b.mean);
}

TEST_CASE("scan_average: all-noise data raises no-signal") {
    // Points far apart: every subsample curve stays at count 0.
    Matrix sparse(12, 2);
    for (std::size_t i = 0; i < sparse.rows(); ++i) {
        sparse(i, 0) = static_cast<double>(i) * 1000.0;
        sparse(i, 1) = 0.0;
    }
    ScanConfig cfg;
    cfg.m_core = 2;
    cfg.grid = uniform_grid(0.001, 0.01, 5);
    cfg.subsample_size = 12;
    cfg.runs = 3;
    cfg.seed = 0;
    try {
        scan_average(sparse, cfg);
        FAIL("expected no-signal");
    } catch (const VgcError& e) {
        CHECK(e.kind() == ErrorKind::no_signal);
    }
}

TEST_CASE("default_grid: sane endpoints and a terminal count of one") {
    Dataset blobs = two_blobs(6.0, 0.5, 250, 55);
    EpsGrid grid = default_grid(blobs.points, 2, 50);
    CHECK(grid.eps_min > 0.0);
    CHECK(grid.eps_max > grid.eps_min);
    PersistenceCurve curve = persistence_curve(blobs.points, 2, grid);
    CHECK(curve.counts.back() == 1);
    CHECK(curve.eps.size() == 50);
}
