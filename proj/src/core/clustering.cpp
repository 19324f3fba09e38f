#include "core/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace vgc {

Labeling canonicalize_labels(std::span<const int> raw) {
    Labeling out;
    out.labels.resize(raw.size());
    std::map<int, int> remap;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == kNoiseLabel) {
            out.labels[i] = kNoiseLabel;
            continue;
        }
        auto [it, inserted] = remap.try_emplace(raw[i], static_cast<int>(remap.size()));
        out.labels[i] = it->second;
    }
    out.n_clusters = static_cast<int>(remap.size());
    return out;
}

Labeling top_k_labeling(const Labeling& labeling, int k) {
    require(k >= 1, ErrorKind::invalid_argument, "top_k_labeling: k must be >= 1");
    std::vector<std::size_t> counts(static_cast<std::size_t>(labeling.n_clusters), 0);
    for (int label : labeling.labels)
        if (label != kNoiseLabel) ++counts[static_cast<std::size_t>(label)];
    std::vector<int> order(counts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return counts[static_cast<std::size_t>(a)] >
                                                counts[static_cast<std::size_t>(b)]; });
    std::vector<int> rank(counts.size(), -1);
    const int kept = std::min<int>(k, static_cast<int>(order.size()));
    for (int r = 0; r < kept; ++r) rank[static_cast<std::size_t>(order[r])] = r;

    Labeling out;
    out.labels.resize(labeling.labels.size());
    const int bucket = kept;
    for (std::size_t i = 0; i < labeling.labels.size(); ++i) {
        const int label = labeling.labels[i];
        if (label == kNoiseLabel || rank[static_cast<std::size_t>(label)] < 0)
            out.labels[i] = bucket;
        else
            out.labels[i] = rank[static_cast<std::size_t>(label)];
    }
    out.n_clusters = kept + 1;
    return out;
}

void DbscanParams::validate() const {
    require(eps > 0.0, ErrorKind::invalid_argument, "DbscanParams: eps must be > 0");
    require(m_core >= 1, ErrorKind::invalid_argument, "DbscanParams: m_core must be >= 1");
}

namespace {

// Neighbor queries pruned by a sort on the first coordinate: candidates are
// limited to points whose first coordinate lies within eps. Exact for
// Euclidean distance, O(n^2) worst case.
class NeighborIndex {
public:
    NeighborIndex(const Matrix& points, double eps) : points_(points), eps_(eps) {
        order_.resize(points.rows());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            const double xa = points(a, 0), xb = points(b, 0);
            return xa < xb || (xa == xb && a < b);
        });
        keys_.resize(order_.size());
        for (std::size_t i = 0; i < order_.size(); ++i) keys_[i] = points(order_[i], 0);
    }

    // Calls fn(j) for every j != p with |x_j - x_p| <= eps (Euclidean).
    template <typename Fn>
    void for_each_neighbor(std::size_t p, Fn&& fn) const {
        const double x0 = points_(p, 0);
        const auto lo = std::lower_bound(keys_.begin(), keys_.end(), x0 - eps_);
        const auto hi = std::upper_bound(keys_.begin(), keys_.end(), x0 + eps_);
        const double eps2 = eps_ * eps_;
        for (auto it = lo; it != hi; ++it) {
            const std::size_t j = order_[static_cast<std::size_t>(it - keys_.begin())];
            if (j == p) continue;
            if (squared_distance(points_.row(p), points_.row(j)) <= eps2) fn(j);
        }
    }

    std::size_t count_neighbors(std::size_t p) const {
        std::size_t count = 0;
        for_each_neighbor(p, [&](std::size_t) { ++count; });
        return count;
    }

private:
    const Matrix& points_;
    double eps_;
    std::vector<std::size_t> order_;
    std::vector<double> keys_;
};

}  // namespace

Labeling dbscan(const Matrix& points, const DbscanParams& params) {
    params.validate();
    const std::size_t n = points.rows();
    require(n >= 1, ErrorKind::invalid_argument, "dbscan: empty input");

    NeighborIndex index(points, params.eps);
    std::vector<char> is_core(n, 0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            is_core[i] = index.count_neighbors(i) >= static_cast<std::size_t>(params.m_core);
    });

    constexpr int kUnvisited = -2;
    std::vector<int> labels(n, kUnvisited);
    int next_cluster = 0;
    std::deque<std::size_t> queue;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!is_core[seed] || labels[seed] != kUnvisited) continue;
        const int cluster = next_cluster++;
        labels[seed] = cluster;
        queue.push_back(seed);
        while (!queue.empty()) {
            const std::size_t p = queue.front();
            queue.pop_front();
            index.for_each_neighbor(p, [&](std::size_t q) {
                if (labels[q] != kUnvisited) return;
                labels[q] = cluster;
                if (is_core[q]) queue.push_back(q);
            });
        }
    }
    for (auto& label : labels)
        if (label == kUnvisited) label = kNoiseLabel;

    Labeling out;
    out.labels = std::move(labels);
    out.n_clusters = next_cluster;
    return out;
}

namespace {

std::vector<std::size_t> kmeans_pp_seeds(const Matrix& points, int k, RandomSource& rng) {
    const std::size_t n = points.rows();
    std::vector<std::size_t> centers;
    std::vector<char> chosen(n, 0);
    centers.reserve(static_cast<std::size_t>(k));

    const std::size_t first = static_cast<std::size_t>(rng.next_below(n));
    centers.push_back(first);
    chosen[first] = 1;

    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    while (centers.size() < static_cast<std::size_t>(k)) {
        const std::size_t last = centers.back();
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) {
                dist2[i] = 0.0;
            } else {
                dist2[i] = std::min(dist2[i], squared_distance(points.row(i), points.row(last)));
            }
            total += dist2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.next_uniform() * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cum += dist2[i];
                if (cum > target && !chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n) {
            // All remaining mass is on chosen points (duplicates); take the
            // first unchosen index.
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        chosen[pick] = 1;
        centers.push_back(pick);
    }
    return centers;
}

}  // namespace

Labeling kmeans(const Matrix& points, int k, std::uint64_t seed) {
    const std::size_t n = points.rows();
    require(k >= 1 && static_cast<std::size_t>(k) <= n, ErrorKind::invalid_argument,
            "kmeans: need 1 <= k <= n");
    const std::size_t d = points.cols();
    RandomSource rng = RandomSource(seed).child("kmeans");

    Matrix centroids(static_cast<std::size_t>(k), d);
    auto seeds = kmeans_pp_seeds(points, k, rng);
    for (int c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j)
            centroids(static_cast<std::size_t>(c), j) = points(seeds[static_cast<std::size_t>(c)], j);

    std::vector<int> assignment(n, -1);
    for (int iter = 0; iter < 500; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd =
                    squared_distance(points.row(i), centroids.row(static_cast<std::size_t>(c)));
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        Matrix sums(static_cast<std::size_t>(k), d);
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assignment[i]);
            ++counts[c];
            for (std::size_t j = 0; j < d; ++j) sums(c, j) += points(i, j);
        }
        for (int c = 0; c < k; ++c) {
            const auto cc = static_cast<std::size_t>(c);
            if (counts[cc] == 0) {
                // Re-seed an empty cluster from the point farthest from its
                // assigned centroid.
                std::size_t farthest = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dd = squared_distance(
                        points.row(i), centroids.row(static_cast<std::size_t>(assignment[i])));
                    if (dd > far_d) {
                        far_d = dd;
                        farthest = i;
                    }
                }
                for (std::size_t j = 0; j < d; ++j) centroids(cc, j) = points(farthest, j);
                assignment[farthest] = c;
                changed = true;
            } else {
                for (std::size_t j = 0; j < d; ++j)
                    centroids(cc, j) = sums(cc, j) / static_cast<double>(counts[cc]);
            }
        }
    }

    Labeling out = canonicalize_labels(assignment);
    return out;
}

void GmmParams::validate(std::size_t n) const {
    require(k >= 1 && static_cast<std::size_t>(k) <= n, ErrorKind::invalid_argument,
            "GmmParams: need 1 <= k <= n");
    require(covariance_reg > 0.0, ErrorKind::invalid_argument,
            "GmmParams: covariance_reg must be > 0");
    require(restarts >= 1 && max_iterations >= 1, ErrorKind::invalid_argument,
            "GmmParams: restarts and max_iterations must be >= 1");
}

namespace {

struct GmmState {
    Matrix means;
    std::vector<Matrix> covs;
    std::vector<double> weights;
};

struct GmmFit {
    GmmState state;
    std::vector<int> assignment;
    std::vector<double> trace;
    double final_ll = -std::numeric_limits<double>::infinity();
};

Matrix scatter_plus_reg(const Matrix& points, std::span<const double> resp, double resp_sum,
                        std::span<const double> mean, double reg) {
    const std::size_t d = points.cols();
    Matrix cov(d, d);
    std::vector<double> diff(d);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const double r = resp[i];
        if (r == 0.0) continue;
        auto row = points.row(i);
        for (std::size_t a = 0; a < d; ++a) diff[a] = row[a] - mean[a];
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) cov(a, b) += r * diff[a] * diff[b];
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= resp_sum;
            cov(b, a) = cov(a, b);
        }
    for (std::size_t a = 0; a < d; ++a) cov(a, a) += reg;
    return cov;
}

GmmFit run_em(const Matrix& points, const GmmParams& params, std::uint64_t restart_seed) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    const auto k = static_cast<std::size_t>(params.k);

    // k-means initialization.
    Labeling init = kmeans(points, params.k, restart_seed);
    GmmFit fit;
    fit.state.means = Matrix(k, d);
    fit.state.weights.assign(k, 0.0);
    std::vector<double> ones(n, 1.0);
    {
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(init.labels[i] % params.k);
            ++counts[c];
            for (std::size_t j = 0; j < d; ++j) fit.state.means(c, j) += points(i, j);
        }
        auto global_mean = column_means(points);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                for (std::size_t j = 0; j < d; ++j) fit.state.means(c, j) = global_mean[j];
                fit.state.weights[c] = 1e-6;
            } else {
                for (std::size_t j = 0; j < d; ++j)
                    fit.state.means(c, j) /= static_cast<double>(counts[c]);
                fit.state.weights[c] = static_cast<double>(counts[c]);
            }
        }
        double wsum = 0.0;
        for (double w : fit.state.weights) wsum += w;
        for (double& w : fit.state.weights) w /= wsum;
        // Start every component from the pooled covariance; cluster-specific
        // shape is learned by EM itself.
        Matrix pooled = scatter_plus_reg(points, ones, static_cast<double>(n), global_mean,
                                         params.covariance_reg);
        fit.state.covs.assign(k, pooled);
    }

    Matrix resp(n, k);
    std::vector<double> log_prob(k);
    std::vector<Matrix> chol(k);
    std::vector<double> log_det(k);
    std::vector<double> diff(d), solved(d);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        // E-step.
        for (std::size_t c = 0; c < k; ++c) {
            if (!cholesky(fit.state.covs[c], chol[c]))
                raise(ErrorKind::numeric, "fit_gmm: singular covariance despite regularization");
            log_det[c] = cholesky_log_det(chol[c]);
        }
        const double log2pi = std::log(2.0 * std::numbers::pi);
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto row = points.row(i);
            double max_lp = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                for (std::size_t j = 0; j < d; ++j) diff[j] = row[j] - fit.state.means(c, j);
                auto s = cholesky_solve(chol[c], diff);
                double maha = 0.0;
                for (std::size_t j = 0; j < d; ++j) maha += diff[j] * s[j];
                log_prob[c] = std::log(std::max(fit.state.weights[c], 1e-300)) -
                              0.5 * (static_cast<double>(d) * log2pi + log_det[c] + maha);
                max_lp = std::max(max_lp, log_prob[c]);
            }
            double sum_exp = 0.0;
            for (std::size_t c = 0; c < k; ++c) sum_exp += std::exp(log_prob[c] - max_lp);
            const double log_norm = max_lp + std::log(sum_exp);
            ll += log_norm;
            for (std::size_t c = 0; c < k; ++c) resp(i, c) = std::exp(log_prob[c] - log_norm);
        }
        ll /= static_cast<double>(n);
        fit.trace.push_back(ll);
        if (std::abs(ll - prev_ll) < params.tolerance) {
            prev_ll = ll;
            break;
        }
        prev_ll = ll;

        // M-step.
        for (std::size_t c = 0; c < k; ++c) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += resp(i, c);
            if (nk < 1e-10) continue;  // abandoned component keeps its parameters
            fit.state.weights[c] = nk / static_cast<double>(n);
            std::vector<double> mean(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = resp(i, c);
                auto row = points.row(i);
                for (std::size_t j = 0; j < d; ++j) mean[j] += r * row[j];
            }
            for (std::size_t j = 0; j < d; ++j) {
                mean[j] /= nk;
                fit.state.means(c, j) = mean[j];
            }
            std::vector<double> resp_col(n);
            for (std::size_t i = 0; i < n; ++i) resp_col[i] = resp(i, c);
            fit.state.covs[c] =
                scatter_plus_reg(points, resp_col, nk, mean, params.covariance_reg);
        }
    }

    fit.final_ll = prev_ll;
    fit.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_r = -1.0;
        for (std::size_t c = 0; c < k; ++c)
            if (resp(i, c) > best_r) {
                best_r = resp(i, c);
                best = static_cast<int>(c);
            }
        fit.assignment[i] = best;
    }
    return fit;
}

}  // namespace

GmmResult fit_gmm(const Matrix& points, const GmmParams& params) {
    params.validate(points.rows());
    RandomSource root = RandomSource(params.seed).child("gmm");

    GmmFit best;
    bool have_best = false;
    for (int r = 0; r < params.restarts; ++r) {
        GmmFit fit = run_em(points, params, root.child(static_cast<std::uint64_t>(r)).seed());
        if (!have_best || fit.final_ll > best.final_ll) {
            best = std::move(fit);
            have_best = true;
        }
    }

    GmmResult result;
    // Components keep their fitted order; labels are canonicalized so
    // assigned labels are dense. component_order maps label -> component.
    Labeling canonical = canonicalize_labels(best.assignment);
    std::vector<int> component_order;
    {
        std::vector<char> seen(static_cast<std::size_t>(params.k), 0);
        for (std::size_t i = 0; i < best.assignment.size(); ++i) {
            const int c = best.assignment[i];
            if (!seen[static_cast<std::size_t>(c)]) {
                seen[static_cast<std::size_t>(c)] = 1;
                component_order.push_back(c);
            }
            if (component_order.size() == static_cast<std::size_t>(params.k)) break;
        }
        for (int c = 0; c < params.k; ++c)
            if (!seen[static_cast<std::size_t>(c)]) component_order.push_back(c);
    }
    result.labels = std::move(canonical);
    result.means = Matrix(static_cast<std::size_t>(params.k), points.cols());
    result.covariances.resize(static_cast<std::size_t>(params.k));
    result.weights.resize(static_cast<std::size_t>(params.k));
    for (int slot = 0; slot < params.k; ++slot) {
        const auto src = static_cast<std::size_t>(component_order[static_cast<std::size_t>(slot)]);
        for (std::size_t j = 0; j < points.cols(); ++j)
            result.means(static_cast<std::size_t>(slot), j) = best.state.means(src, j);
        result.covariances[static_cast<std::size_t>(slot)] = best.state.covs[src];
        result.weights[static_cast<std::size_t>(slot)] = best.state.weights[src];
    }
    result.log_likelihood_trace = std::move(best.trace);
    return result;
}

AssignmentResult hungarian(const Matrix& cost) {
    require(cost.rows() == cost.cols(), ErrorKind::invalid_argument,
            "hungarian: cost matrix must be square");
    require(cost.all_finite(), ErrorKind::invalid_argument,
            "hungarian: cost matrix has non-finite entries");
    const auto n = static_cast<int>(cost.rows());
    require(n >= 1, ErrorKind::invalid_argument, "hungarian: empty cost matrix");
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Shortest-augmenting-path assignment with potentials (1-indexed).
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(static_cast<std::size_t>(i0 - 1),
                                        static_cast<std::size_t>(j - 1)) -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    AssignmentResult result;
    result.assignment.assign(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        const int i = p[static_cast<std::size_t>(j)];
        result.assignment[static_cast<std::size_t>(i - 1)] = j - 1;
        result.cost += cost(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
    }
    return result;
}

double clustering_accuracy(std::span<const int> true_labels, std::span<const int> predicted) {
    require(true_labels.size() == predicted.size(), ErrorKind::invalid_argument,
            "clustering_accuracy: length mismatch");
    require(!true_labels.empty(), ErrorKind::invalid_argument, "clustering_accuracy: empty input");

    std::map<int, std::size_t> true_ids, pred_ids;
    for (int l : true_labels) true_ids.try_emplace(l, true_ids.size());
    for (int c : predicted) pred_ids.try_emplace(c, pred_ids.size());
    const std::size_t side = std::max(true_ids.size(), pred_ids.size());

    // Contingency counts, padded to square; maximizing matches equals
    // minimizing negated counts.
    Matrix cost(side, side, 0.0);
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const std::size_t r = true_ids[true_labels[i]];
        const std::size_t c = pred_ids[predicted[i]];
        cost(r, c) -= 1.0;
    }
    AssignmentResult assignment = hungarian(cost);
    return -assignment.cost / static_cast<double>(true_labels.size());
}

}  // namespace vgc
