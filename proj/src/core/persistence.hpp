#pragma once

#include <cstdint>
#include <vector>

#include "core/clustering.hpp"
#include "core/matrix.hpp"

namespace vgc {

// Uniform epsilon grid, inclusive of both ends up to rounding.
struct EpsGrid {
    double eps_min = 0.0;
    double eps_max = 0.0;
    double step = 0.0;

    void validate() const;
    std::vector<double> values() const;
};

EpsGrid uniform_grid(double eps_min, double eps_max, std::size_t steps);

// Non-noise DBSCAN cluster counts over a radius grid.
struct PersistenceCurve {
    std::vector<double> eps;
    std::vector<int> counts;
};

PersistenceCurve persistence_curve(const Matrix& points, int m_core, const EpsGrid& grid);

// The count whose run of consecutive grid points is longest. Runs at
// count <= 1 are excluded: the all-merged terminal plateau persists
// forever by construction and an empty prefix carries no signal. Ties
// prefer the run at larger eps. Raises a no-signal error when no run is
// eligible.
int most_persistent(const PersistenceCurve& curve);

// Longest run of grid points at exactly `count`; 0 if absent.
std::size_t plateau_length(const PersistenceCurve& curve, int count);

struct ScanConfig {
    int m_core = 2;
    EpsGrid grid;
    std::size_t subsample_size = 1000;
    std::size_t runs = 50;
    std::uint64_t seed = 0;
};

struct ScanResult {
    double mean = 0.0;             // over runs with a signal
    std::vector<int> per_run;      // -1 marks a no-signal run
    std::size_t no_signal_runs = 0;
    std::vector<PersistenceCurve> curves;
};

// Repeated subsampled persistence scans: each run draws `subsample_size`
// points without replacement, computes the curve and takes its most
// persistent count. No-signal runs are excluded from the mean and counted.
ScanResult scan_average(const Matrix& points, const ScanConfig& cfg);

// Grid heuristic when no grid is given: eps_min at the 1st percentile of
// nearest-neighbor distances, eps_max found by doubling until the count
// reaches one, 200 uniform steps.
EpsGrid default_grid(const Matrix& points, int m_core, std::size_t steps = 200);

}  // namespace vgc
