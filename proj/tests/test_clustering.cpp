#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "core/clustering.hpp"
#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

using namespace vgc;

namespace {

// Brute-force oracle: connected components of the eps-graph via union-find.
struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

int eps_graph_components(const Matrix& points, double eps) {
    UnionFind uf(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i)
        for (std::size_t j = i + 1; j < points.rows(); ++j)
            if (squared_distance(points.row(i), points.row(j)) <= eps * eps) uf.unite(i, j);
    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < points.rows(); ++i) roots.insert(uf.find(i));
    return static_cast<int>(roots.size());
}

// Brute-force oracle: best one-to-one label map by trying every injection
// of the smaller label set into the larger one.
double brute_force_acc(std::span<const int> truth, std::span<const int> predicted) {
    std::map<int, int> true_ids, pred_ids;
    for (int l : truth) true_ids.try_emplace(l, true_ids.size());
    for (int c : predicted) pred_ids.try_emplace(c, pred_ids.size());
    const std::size_t rows = true_ids.size(), cols = pred_ids.size();
    const std::size_t side = std::max(rows, cols);
    std::vector<std::vector<int>> counts(side, std::vector<int>(side, 0));
    for (std::size_t i = 0; i < truth.size(); ++i)
        counts[true_ids[truth[i]]][pred_ids[predicted[i]]] += 1;

    std::vector<std::size_t> perm(side);
    std::iota(perm.begin(), perm.end(), 0);
    int best = 0;
    do {
        int total = 0;
        for (std::size_t c = 0; c < side; ++c) total += counts[perm[c]][c];
        best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

Matrix three_mode_mixture_points(std::size_t n, std::uint64_t seed, std::vector<int>* labels) {
    MixtureSpec spec;
    spec.means = Matrix::from_rows({{0.0, 0.0}, {3.0, 0.0}, {1.5, 2.598}});
    Matrix cov = Matrix::from_rows({{0.09, 0.0}, {0.0, 0.09}});
    spec.covariances = {cov, cov, cov};
    spec.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    spec.n = n;
    spec.seed = seed;
    Dataset data = gen_mixture(spec);
    if (labels) *labels = data.labels;
    return data.points;
}

}  // namespace

TEST_CASE("dbscan: two close points form one cluster at m_core = 1") {
    Matrix points = Matrix::from_rows({{0.0, 0.0}, {0.1, 0.0}});
    Labeling result = dbscan(points, {.eps = 0.2, .m_core = 1});
    CHECK(result.n_clusters == 1);
    CHECK(result.labels[0] == 0);
    CHECK(result.labels[1] == 0);
}

TEST_CASE("dbscan: an isolated point is noise even at m_core = 1") {
    // The core rule counts OTHER points, so a singleton can never be core.
    Matrix points = Matrix::from_rows({{0.0, 0.0}, {0.1, 0.0}, {10.0, 10.0}});
    Labeling result = dbscan(points, {.eps = 0.2, .m_core = 1});
    CHECK(result.n_clusters == 1);
    CHECK(result.labels[2] == kNoiseLabel);
}

TEST_CASE("dbscan: matches the eps-graph component oracle on isolation-free sets") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RandomSource rng(seed);
        const std::size_t n = 50 + rng.next_below(151);  // 50..200
        Matrix points(n, 2);
        // A few loose blobs plus scatter.
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t blob = rng.next_below(4);
            points(i, 0) = static_cast<double>(blob % 2) * 2.0 + 0.6 * rng.next_gaussian();
            points(i, 1) = static_cast<double>(blob / 2) * 2.0 + 0.6 * rng.next_gaussian();
        }
        // eps at the largest nearest-neighbor distance, so no point is
        // isolated and every point is core at m_core = 1.
        double max_nn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double nn = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) nn = std::min(nn, squared_distance(points.row(i), points.row(j)));
            max_nn = std::max(max_nn, nn);
        }
        const double eps = std::sqrt(max_nn) * (1.0 + 1e-9);
        Labeling result = dbscan(points, {.eps = eps, .m_core = 1});
        CHECK(result.n_clusters == eps_graph_components(points, eps));
        for (int label : result.labels) CHECK(label != kNoiseLabel);
    }
}

TEST_CASE("dbscan: reference protocol on a 3-mode mixture subsample") {
    // Subsample of 300, m = 2, eps = 0.2: three dominant clusters holding
    // at least 95% of the non-noise points.
    std::vector<int> labels;
    Matrix all = three_mode_mixture_points(10000, 42, &labels);
    RandomSource rng(7);
    auto picked = rng.sample_without_replacement(all.rows(), 300);
    Matrix sub(300, 2);
    for (std::size_t i = 0; i < picked.size(); ++i) {
        sub(i, 0) = all(picked[i], 0);
        sub(i, 1) = all(picked[i], 1);
    }
    Labeling result = dbscan(sub, {.eps = 0.2, .m_core = 2});
    REQUIRE(result.n_clusters >= 3);
    std::vector<std::size_t> counts(static_cast<std::size_t>(result.n_clusters), 0);
    std::size_t non_noise = 0;
    for (int label : result.labels)
        if (label != kNoiseLabel) {
            ++counts[static_cast<std::size_t>(label)];
            ++non_noise;
        }
    std::sort(counts.rbegin(), counts.rend());
    const std::size_t top3 = counts[0] + counts[1] + counts[2];
    CHECK(static_cast<double>(top3) >= 0.95 * static_cast<double>(non_noise));
}

TEST_CASE("dbscan: border points go to the first claiming cluster") {
    // Two tight quadruples around -1 and +1 whose members are core at
    // m_core = 3; the midpoint reaches one core on each side (2 < 3
    // neighbors, so border) and is claimed by the lower-seed cluster.
    Matrix points = Matrix::from_rows({{-1.0, 0.0},
                                       {-1.4, 0.0},
                                       {-1.4, 0.4},
                                       {-1.0, 0.5},
                                       {1.0, 0.0},
                                       {1.4, 0.0},
                                       {1.4, 0.4},
                                       {1.0, 0.5},
                                       {0.0, 0.0}});
    Labeling result = dbscan(points, {.eps = 1.0, .m_core = 3});
    CHECK(result.n_clusters == 2);
    CHECK(result.labels[8] == result.labels[0]);
    CHECK(result.labels[4] != result.labels[0]);
}

TEST_CASE("kmeans: k = n gives singanton clusters and zero inertia") {
    Matrix points = Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {5.0, 5.0}});
    Labeling result = kmeans(points, 4, 3);
    CHECK(result.n_clusters == 4);
    std::set<int> distinct(result.labels.begin(), result.labels.end());
    CHECK(distinct.size() == 4);
}

TEST_CASE("kmeans: k = 1 centroid is the mean (all points one cluster)") {
    Matrix points = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
    Labeling result = kmeans(points, 1, 0);
    CHECK(result.n_clusters == 1);
    for (int label : result.labels) CHECK(label == 0);
}

TEST_CASE("kmeans and gmm separate two distant Gaussians at ACC >= 0.99") {
    MixtureSpec spec;
    spec.means = Matrix::from_rows({{-10.0, 0.0}, {10.0, 0.0}});
    Matrix cov = Matrix::identity(2);
    spec.covariances = {cov, cov};
    spec.weights = {0.5, 0.5};
    spec.n = 1000;
    spec.seed = 2;
    Dataset data = gen_mixture(spec);

    Labeling km = kmeans(data.points, 2, 1);
    CHECK(clustering_accuracy(data.labels, km.labels) >= 0.99);

    GmmParams params;
    params.k = 2;
    params.seed = 1;
    GmmResult gm = fit_gmm(data.points, params);
    CHECK(clustering_accuracy(data.labels, gm.labels.labels) >= 0.99);
}

TEST_CASE("gmm: k = 1 recovers sample mean and covariance plus the ridge") {
    RandomSource rng(5);
    Matrix points(400, 2);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        points(i, 0) = 1.0 + rng.next_gaussian();
        points(i, 1) = -2.0 + 0.5 * rng.next_gaussian() + 0.3 * points(i, 0);
    }
    GmmParams params;
    params.k = 1;
    params.covariance_reg = 1e-6;
    GmmResult result = fit_gmm(points, params);

    auto mean = column_means(points);
    CHECK(result.means(0, 0) == doctest::Approx(mean[0]).epsilon(1e-8));
    CHECK(result.means(0, 1) == doctest::Approx(mean[1]).epsilon(1e-8));
    Matrix expected(2, 2);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const double dx = points(i, 0) - mean[0];
        const double dy = points(i, 1) - mean[1];
        expected(0, 0) += dx * dx;
        expected(0, 1) += dx * dy;
        expected(1, 0) += dy * dx;
        expected(1, 1) += dy * dy;
    }
    for (double& v : expected.flat()) v /= static_cast<double>(points.rows());
    expected(0, 0) += params.covariance_reg;
    expected(1, 1) += params.covariance_reg;
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            CHECK(result.covariances[0](a, b) == doctest::Approx(expected(a, b)).epsilon(1e-8));
    CHECK(result.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("gmm: log-likelihood trace is non-decreasing") {
    std::vector<int> labels;
    Matrix points = three_mode_mixture_points(600, 77, &labels);
    GmmParams params;
    params.k = 3;
    params.seed = 4;
    params.restarts = 2;
    GmmResult result = fit_gmm(points, params);
    REQUIRE(result.log_likelihood_trace.size() >= 2);
    for (std::size_t i = 1; i < result.log_likelihood_trace.size(); ++i)
        CHECK(result.log_likelihood_trace[i] >= result.log_likelihood_trace[i - 1] - 1e-9);
}

TEST_CASE("hungarian: frozen small cases") {
    {
        auto r = hungarian(Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
        CHECK(r.cost == 0.0);
        CHECK(r.assignment == std::vector<int>{0, 1});
    }
    {
        // Brute force over both permutations: 4+3 vs 1+2 -> cost 3.
        auto r = hungarian(Matrix::from_rows({{4.0, 1.0}, {2.0, 3.0}}));
        CHECK(r.cost == 3.0);
        CHECK(r.assignment == std::vector<int>{1, 0});
    }
    {
        auto r = hungarian(Matrix::from_rows({{5.0}}));
        CHECK(r.cost == 5.0);
        CHECK(r.assignment == std::vector<int>{0});
    }
}

TEST_CASE("hungarian: matches exhaustive search on random matrices up to 6x6") {
    RandomSource rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng.next_below(5);  // 2..6
        Matrix cost(n, n);
        for (double& v : cost.flat()) v = std::floor(rng.next_uniform() * 20.0);
        auto got = hungarian(cost);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += cost(i, perm[i]);
            best = std::min(best, total);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(got.cost == doctest::Approx(best));
    }
}

TEST_CASE("hungarian: rejects non-finite and non-square input") {
    Matrix bad(2, 2);
    bad(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(hungarian(bad), VgcError);
    CHECK_THROWS_AS(hungarian(Matrix(2, 3)), VgcError);
}

TEST_CASE("acc: identity and relabelings score 1") {
    const std::vector<int> truth{0, 0, 1, 1, 2, 2};
    CHECK(clustering_accuracy(truth, truth) == 1.0);
    const std::vector<int> relabeled{5, 5, 0, 0, 9, 9};
    CHECK(clustering_accuracy(truth, relabeled) == 1.0);
}

TEST_CASE("acc: frozen example 3/4") {
    // Both bijections tried by hand: best maps 1->0 and 0->1, scoring 3.
    const std::vector<int> truth{0, 0, 1, 1};
    const std::vector<int> predicted{1, 1, 1, 0};
    CHECK(clustering_accuracy(truth, predicted) == 0.75);
}

TEST_CASE("acc: empty input is rejected") {
    std::vector<int> empty;
    CHECK_THROWS_AS(clustering_accuracy(empty, empty), VgcError);
}

TEST_CASE("acc: equals the exhaustive bijection oracle on random cases") {
    RandomSource rng(47);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.next_below(26);  // 5..30
        const int k_true = 1 + static_cast<int>(rng.next_below(6));
        const int k_pred = 1 + static_cast<int>(rng.next_below(6));
        std::vector<int> truth(n), predicted(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k_true)));
            // Noise shows up as -1 in predictions now and then.
            const auto draw = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k_pred) + 1));
            predicted[i] = draw == k_pred ? kNoiseLabel : draw;
        }
        CHECK(clustering_accuracy(truth, predicted) ==
              doctest::Approx(brute_force_acc(truth, predicted)));
    }
}

TEST_CASE("acc: invariant under permutations of the point order") {
    RandomSource rng(53);
    std::vector<int> truth(40), predicted(40);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i] = static_cast<int>(rng.next_below(4));
        predicted[i] = static_cast<int>(rng.next_below(5));
    }
    const double base = clustering_accuracy(truth, predicted);
    std::vector<std::size_t> perm(truth.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<int> truth_p(truth.size()), predicted_p(truth.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        truth_p[i] = truth[perm[i]];
        predicted_p[i] = predicted[perm[i]];
    }
    CHECK(clustering_accuracy(truth_p, predicted_p) == base);
}

TEST_CASE("top_k_labeling: keeps the heaviest clusters and buckets the rest") {
    Labeling labeling;
    labeling.labels = {0, 0, 0, 1, 1, 2, kNoiseLabel, 3, 3, 3, 3};
    labeling.n_clusters = 4;
    Labeling top = top_k_labeling(labeling, 2);
    CHECK(top.n_clusters == 3);  // two kept + bucket
    // Cluster 3 (4 points) -> 0, cluster 0 (3 points) -> 1, rest -> 2.
    CHECK(top.labels == std::vector<int>{1, 1, 1, 2, 2, 2, 2, 0, 0, 0, 0});
}

TEST_CASE("canonicalize_labels: dense relabeling keeps noise") {
    const std::vector<int> raw{7, 7, kNoiseLabel, 3, 3, 9};
    Labeling out = canonicalize_labels(raw);
    CHECK(out.n_clusters == 3);
    CHECK(out.labels == std::vector<int>{0, 0, kNoiseLabel, 1, 1, 2});
}
