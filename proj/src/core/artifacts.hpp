#pragma once

#include <string>

#include "core/clustering.hpp"
#include "core/dataset.hpp"
#include "core/matrix.hpp"
#include "core/persistence.hpp"

namespace vgc {

// CSV/JSON artifact formats. All files are UTF-8 with a header row and a
// deterministic field order; floats are written with 17 significant digits
// so read-back is bit-exact. Noise labels serialize as -1.

std::string format_double(double v);

void save_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

// index,x,y
void export_embedding_csv(const Matrix& embedding, const std::string& path);
Matrix load_embedding_csv(const std::string& path);

// index,label
void export_labeling_csv(const Labeling& labeling, const std::string& path);
Labeling load_labeling_csv(const std::string& path);

// eps,count
void export_curve_csv(const PersistenceCurve& curve, const std::string& path);
PersistenceCurve load_curve_csv(const std::string& path);

// mean, per-run counts, no-signal count, config echo.
void export_scan_summary_json(const ScanResult& result, const ScanConfig& cfg,
                              const std::string& path);

// Mixture specification as JSON with keys means, covariances, weights, n, seed.
MixtureSpec mixture_spec_from_json_text(const std::string& text);
MixtureSpec mixture_spec_from_json_file(const std::string& path);

}  // namespace vgc
