#include "core/dataset.hpp"

#include <cmath>
#include <cstring>

#include "core/errors.hpp"

namespace vgc {

void Dataset::validate() const {
    require(!has_labels || labels.size() == points.rows(), ErrorKind::invalid_argument,
            "Dataset: label count must match point count");
    require(points.all_finite(), ErrorKind::invalid_argument, "Dataset: non-finite points");
}

void MixtureSpec::validate() const {
    const std::size_t k = means.rows();
    require(k >= 1, ErrorKind::invalid_argument, "MixtureSpec: need at least one component");
    require(covariances.size() == k && weights.size() == k, ErrorKind::invalid_argument,
            "MixtureSpec: component count mismatch");
    double sum = 0.0;
    for (double w : weights) {
        require(w >= 0.0, ErrorKind::invalid_argument, "MixtureSpec: negative weight");
        sum += w;
    }
    require(std::abs(sum - 1.0) <= 1e-6, ErrorKind::invalid_argument,
            "MixtureSpec: weights must sum to 1");
    for (const Matrix& cov : covariances)
        require(cov.rows() == means.cols() && cov.cols() == means.cols(),
                ErrorKind::invalid_argument, "MixtureSpec: covariance shape mismatch");
}

namespace {

// Symmetric square root via eigen-decomposition; accepts semidefinite
// matrices (zero covariance is legal and pins points to the mean).
Matrix psd_sqrt(const Matrix& cov) {
    Matrix vecs;
    std::vector<double> vals;
    jacobi_eigen_symmetric(cov, vecs, vals);
    const std::size_t d = cov.rows();
    double scale = 0.0;
    for (double v : vals) scale = std::max(scale, std::abs(v));
    for (double v : vals)
        require(v >= -1e-9 * std::max(scale, 1.0), ErrorKind::invalid_argument,
                "MixtureSpec: covariance is not positive semidefinite");
    Matrix root(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            root(i, j) = vecs(i, j) * std::sqrt(std::max(vals[j], 0.0));
    return root;
}

}  // namespace

Dataset gen_mixture(const MixtureSpec& spec) {
    spec.validate();
    const std::size_t k = spec.means.rows();
    const std::size_t d = spec.means.cols();

    std::vector<Matrix> roots;
    roots.reserve(k);
    for (const Matrix& cov : spec.covariances) roots.push_back(psd_sqrt(cov));

    std::vector<double> cumulative(k);
    double acc = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        acc += spec.weights[c];
        cumulative[c] = acc;
    }

    Dataset out;
    out.points = Matrix(spec.n, d);
    out.labels.resize(spec.n);
    out.has_labels = true;
    out.provenance = "gen_mixture";

    RandomSource root_rng = RandomSource(spec.seed).child("mixture");
    RandomSource comp_rng = root_rng.child("component");
    RandomSource noise_rng = root_rng.child("noise");
    std::vector<double> g(d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double u = comp_rng.next_uniform();
        std::size_t c = 0;
        while (c + 1 < k && u >= cumulative[c]) ++c;
        out.labels[i] = static_cast<int>(c);
        for (double& v : g) v = noise_rng.next_gaussian();
        auto row = out.points.row(i);
        const Matrix& a = roots[c];
        for (std::size_t r = 0; r < d; ++r) {
            double s = spec.means(c, r);
            for (std::size_t q = 0; q < d; ++q) s += a(r, q) * g[q];
            row[r] = s;
        }
    }
    return out;
}

Dataset subsample(const Dataset& dataset, std::size_t size, RandomSource& rng) {
    require(size <= dataset.size(), ErrorKind::invalid_argument,
            "subsample: requested more points than available");
    auto picked = rng.sample_without_replacement(dataset.size(), size);
    Dataset out;
    out.points = Matrix(size, dataset.dim());
    out.has_labels = dataset.has_labels;
    out.provenance = dataset.provenance;
    if (out.has_labels) out.labels.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
        std::memcpy(out.points.row(i).data(), dataset.points.row(picked[i]).data(),
                    dataset.dim() * sizeof(double));
        if (out.has_labels) out.labels[i] = dataset.labels[picked[i]];
    }
    return out;
}

}  // namespace vgc
