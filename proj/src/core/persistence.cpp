#include "core/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace vgc {

void EpsGrid::validate() const {
    require(eps_min > 0.0, ErrorKind::invalid_argument, "EpsGrid: eps_min must be > 0");
    require(eps_max > eps_min, ErrorKind::invalid_argument, "EpsGrid: eps_max must exceed eps_min");
    require(step > 0.0, ErrorKind::invalid_argument, "EpsGrid: step must be > 0");
    require(values().size() >= 3, ErrorKind::invalid_argument,
            "EpsGrid: grid must contain at least 3 points");
}

std::vector<double> EpsGrid::values() const {
    std::vector<double> out;
    const double tol = step * 1e-9;
    for (double e = eps_min; e <= eps_max + tol; e += step) out.push_back(e);
    return out;
}

EpsGrid uniform_grid(double eps_min, double eps_max, std::size_t steps) {
    require(steps >= 3, ErrorKind::invalid_argument, "uniform_grid: need >= 3 grid points");
    EpsGrid grid;
    grid.eps_min = eps_min;
    grid.eps_max = eps_max;
    grid.step = (eps_max - eps_min) / static_cast<double>(steps - 1);
    grid.validate();
    return grid;
}

PersistenceCurve persistence_curve(const Matrix& points, int m_core, const EpsGrid& grid) {
    grid.validate();
    PersistenceCurve curve;
    curve.eps = grid.values();
    curve.counts.reserve(curve.eps.size());
    DbscanParams params;
    params.m_core = m_core;
    for (double eps : curve.eps) {
        params.eps = eps;
        curve.counts.push_back(dbscan(points, params).n_clusters);
    }
    return curve;
}

namespace {

struct Run {
    int count = 0;
    std::size_t length = 0;
    std::size_t last_index = 0;
};

std::vector<Run> runs_of(const PersistenceCurve& curve) {
    std::vector<Run> runs;
    for (std::size_t i = 0; i < curve.counts.size(); ++i) {
        if (!runs.empty() && runs.back().count == curve.counts[i]) {
            runs.back().length += 1;
            runs.back().last_index = i;
        } else {
            runs.push_back({curve.counts[i], 1, i});
        }
    }
    return runs;
}

}  // namespace

int most_persistent(const PersistenceCurve& curve) {
    require(!curve.counts.empty(), ErrorKind::invalid_argument, "most_persistent: empty curve");
    const auto runs = runs_of(curve);
    int best_count = 0;
    std::size_t best_length = 0;
    std::size_t best_last = 0;
    bool found = false;
    // Runs at count <= 1 never compete: the all-merged tail persists
    // forever by construction and the empty prefix is no signal. A run at
    // count >= 2 that is cut off by the grid end still counts; subsample
    // curves evaluated on a grid calibrated to the full data routinely end
    // inside their true plateau.
    for (const Run& run : runs) {
        if (run.count <= 1) continue;
        if (!found || run.length > best_length ||
            (run.length == best_length && run.last_index > best_last)) {
            best_count = run.count;
            best_length = run.length;
            best_last = run.last_index;
            found = true;
        }
    }
    require(found, ErrorKind::no_signal,
            "most_persistent: no eligible plateau (all counts <= 1 or censored)");
    return best_count;
}

std::size_t plateau_length(const PersistenceCurve& curve, int count) {
    std::size_t best = 0;
    for (const Run& run : runs_of(curve))
        if (run.count == count) best = std::max(best, run.length);
    return best;
}

ScanResult scan_average(const Matrix& points, const ScanConfig& cfg) {
    cfg.grid.validate();
    require(cfg.runs >= 1, ErrorKind::invalid_argument, "scan_average: runs must be >= 1");
    require(cfg.subsample_size >= 1 && cfg.subsample_size <= points.rows(),
            ErrorKind::invalid_argument, "scan_average: subsample size out of range");

    ScanResult result;
    result.per_run.assign(cfg.runs, -1);
    result.curves.resize(cfg.runs);
    RandomSource root = RandomSource(cfg.seed).child("scan");
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        RandomSource run_rng = root.child(r);
        auto picked = run_rng.sample_without_replacement(points.rows(), cfg.subsample_size);
        Matrix sub(cfg.subsample_size, points.cols());
        for (std::size_t i = 0; i < picked.size(); ++i)
            std::memcpy(sub.row(i).data(), points.row(picked[i]).data(),
                        points.cols() * sizeof(double));
        result.curves[r] = persistence_curve(sub, cfg.m_core, cfg.grid);
        try {
            result.per_run[r] = most_persistent(result.curves[r]);
        } catch (const VgcError& e) {
            if (e.kind() != ErrorKind::no_signal) throw;
            result.no_signal_runs += 1;
        }
    }
    double sum = 0.0;
    std::size_t n_ok = 0;
    for (int c : result.per_run)
        if (c >= 0) {
            sum += c;
            ++n_ok;
        }
    require(n_ok > 0, ErrorKind::no_signal, "scan_average: every run was no-signal");
    result.mean = sum / static_cast<double>(n_ok);
    return result;
}

EpsGrid default_grid(const Matrix& points, int m_core, std::size_t steps) {
    const std::size_t n = points.rows();
    require(n >= 2, ErrorKind::invalid_argument, "default_grid: need at least 2 points");

    std::vector<double> nn(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 = squared_distance(points.row(i), points.row(j));
            nn[i] = std::min(nn[i], d2);
            nn[j] = std::min(nn[j], d2);
        }
    for (double& v : nn) v = std::sqrt(v);
    std::sort(nn.begin(), nn.end());
    double eps_min = nn[static_cast<std::size_t>(0.01 * static_cast<double>(n - 1))];
    if (eps_min <= 0.0) {
        // Duplicate points; fall back to the smallest positive gap.
        for (double v : nn)
            if (v > 0.0) {
                eps_min = v;
                break;
            }
        require(eps_min > 0.0, ErrorKind::invalid_argument,
                "default_grid: all points are identical");
    }

    DbscanParams params;
    params.m_core = m_core;
    double eps_max = eps_min;
    for (int doubling = 0; doubling < 64; ++doubling) {
        params.eps = eps_max;
        Labeling labeling = dbscan(points, params);
        // A lone early cluster amid noise also reports count 1; the
        // terminal state is one cluster holding every point.
        bool noise_free = true;
        for (int label : labeling.labels)
            if (label == kNoiseLabel) {
                noise_free = false;
                break;
            }
        if (labeling.n_clusters == 1 && noise_free) break;
        eps_max *= 2.0;
    }
    return uniform_grid(eps_min, eps_max, steps);
}

}  // namespace vgc
