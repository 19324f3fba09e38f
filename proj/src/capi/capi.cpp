#include "vgc.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include <json.hpp>

#include "core/artifacts.hpp"
#include "core/clustering.hpp"
#include "core/dataset.hpp"
#include "core/density.hpp"
#include "core/errors.hpp"
#include "core/idx_io.hpp"
#include "core/parallel.hpp"
#include "core/persistence.hpp"
#include "core/tsne.hpp"
#include "core/vae.hpp"

struct vgc_dataset {
    vgc::Dataset value;
};

struct vgc_model {
    vgc::VaeModel value;
};

struct vgc_labeling {
    vgc::Labeling value;
};

namespace {

thread_local std::string g_last_error;

vgc_status status_of(vgc::ErrorKind kind) {
    switch (kind) {
        case vgc::ErrorKind::invalid_argument: return VGC_ERR_INVALID_ARGUMENT;
        case vgc::ErrorKind::io: return VGC_ERR_IO;
        case vgc::ErrorKind::format: return VGC_ERR_FORMAT;
        case vgc::ErrorKind::numeric: return VGC_ERR_NUMERIC;
        case vgc::ErrorKind::no_signal: return VGC_ERR_NO_SIGNAL;
    }
    return VGC_ERR_INTERNAL;
}

template <typename Fn>
vgc_status guarded(Fn&& fn) {
    try {
        fn();
        return VGC_OK;
    } catch (const vgc::VgcError& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return VGC_ERR_FORMAT;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return VGC_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return VGC_ERR_INTERNAL;
    }
}

void check_arg(bool cond, const char* message) {
    vgc::require(cond, vgc::ErrorKind::invalid_argument, message);
}

nlohmann::json parse_config(const char* text) {
    if (text == nullptr || *text == '\0') return nlohmann::json::object();
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        vgc::raise(vgc::ErrorKind::format, std::string("bad config JSON: ") + e.what());
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

vgc::EpsGrid grid_from_json(const nlohmann::json& j) {
    vgc::EpsGrid grid;
    grid.eps_min = j.at("eps_min").get<double>();
    grid.eps_max = j.at("eps_max").get<double>();
    grid.step = j.at("step").get<double>();
    grid.validate();
    return grid;
}

}  // namespace

extern "C" {

const char* vgc_version(void) { return "0.1.0"; }

const char* vgc_last_error(void) { return g_last_error.c_str(); }

void vgc_set_threads(int n) { vgc::set_max_threads(n); }

void vgc_string_free(char* s) { delete[] s; }

/* ---- datasets ------------------------------------------------------- */

vgc_status vgc_dataset_create(const double* data, int64_t n, int64_t d, const int32_t* labels,
                              vgc_dataset** out) {
    return guarded([&] {
        check_arg(out != nullptr, "vgc_dataset_create: null output");
        check_arg(n >= 0 && d >= 1, "vgc_dataset_create: bad shape");
        check_arg(data != nullptr || n == 0, "vgc_dataset_create: null data");
        vgc::Dataset ds;
        ds.points = vgc::Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
        if (n > 0)
            std::memcpy(ds.points.data(), data,
                        static_cast<std::size_t>(n * d) * sizeof(double));
        if (labels != nullptr) {
            ds.labels.assign(labels, labels + n);
            ds.has_labels = true;
        }
        ds.provenance = "api";
        ds.validate();
        *out = new vgc_dataset{std::move(ds)};
    });
}

vgc_status vgc_dataset_gen_mixture(const char* spec_json, vgc_dataset** out) {
    return guarded([&] {
        check_arg(spec_json != nullptr && out != nullptr, "vgc_dataset_gen_mixture: null argument");
        auto spec = vgc::mixture_spec_from_json_text(spec_json);
        *out = new vgc_dataset{vgc::gen_mixture(spec)};
    });
}

vgc_status vgc_dataset_load_idx(const char* images_path, const char* labels_path,
                                vgc_dataset** out) {
    return guarded([&] {
        check_arg(images_path != nullptr && out != nullptr, "vgc_dataset_load_idx: null argument");
        *out = new vgc_dataset{
            vgc::load_idx(images_path, labels_path == nullptr ? "" : labels_path)};
    });
}

vgc_status vgc_dataset_load_csv(const char* path, vgc_dataset** out) {
    return guarded([&] {
        check_arg(path != nullptr && out != nullptr, "vgc_dataset_load_csv: null argument");
        *out = new vgc_dataset{vgc::load_dataset_csv(path)};
    });
}

vgc_status vgc_dataset_save_csv(const vgc_dataset* dataset, const char* path) {
    return guarded([&] {
        check_arg(dataset != nullptr && path != nullptr, "vgc_dataset_save_csv: null argument");
        vgc::save_dataset_csv(dataset->value, path);
    });
}

int64_t vgc_dataset_rows(const vgc_dataset* dataset) {
    return dataset == nullptr ? -1 : static_cast<int64_t>(dataset->value.size());
}

int64_t vgc_dataset_cols(const vgc_dataset* dataset) {
    return dataset == nullptr ? -1 : static_cast<int64_t>(dataset->value.dim());
}

int vgc_dataset_has_labels(const vgc_dataset* dataset) {
    return dataset != nullptr && dataset->value.has_labels ? 1 : 0;
}

vgc_status vgc_dataset_copy_data(const vgc_dataset* dataset, double* out) {
    return guarded([&] {
        check_arg(dataset != nullptr && out != nullptr, "vgc_dataset_copy_data: null argument");
        std::memcpy(out, dataset->value.points.data(),
                    dataset->value.points.size() * sizeof(double));
    });
}

vgc_status vgc_dataset_copy_labels(const vgc_dataset* dataset, int32_t* out) {
    return guarded([&] {
        check_arg(dataset != nullptr && out != nullptr, "vgc_dataset_copy_labels: null argument");
        check_arg(dataset->value.has_labels, "vgc_dataset_copy_labels: dataset has no labels");
        for (std::size_t i = 0; i < dataset->value.labels.size(); ++i)
            out[i] = dataset->value.labels[i];
    });
}

vgc_status vgc_dataset_subsample(const vgc_dataset* dataset, int64_t size, uint64_t seed,
                                 vgc_dataset** out) {
    return guarded([&] {
        check_arg(dataset != nullptr && out != nullptr, "vgc_dataset_subsample: null argument");
        check_arg(size >= 0, "vgc_dataset_subsample: negative size");
        vgc::RandomSource rng = vgc::RandomSource(seed).child("subsample");
        *out = new vgc_dataset{
            vgc::subsample(dataset->value, static_cast<std::size_t>(size), rng)};
    });
}

void vgc_dataset_free(vgc_dataset* dataset) { delete dataset; }

/* ---- VAE ------------------------------------------------------------ */

vgc_status vgc_vae_train(const vgc_dataset* dataset, const char* config_json, vgc_model** out) {
    return guarded([&] {
        check_arg(dataset != nullptr && out != nullptr, "vgc_vae_train: null argument");
        auto j = parse_config(config_json);
        vgc::VaeArchitecture arch;
        if (j.contains("hidden_widths"))
            arch.hidden_widths = j["hidden_widths"].get<std::vector<std::size_t>>();
        arch.latent_dim = j.value("latent_dim", arch.latent_dim);
        if (j.contains("hidden_activation"))
            arch.hidden_activation =
                vgc::activation_from_name(j["hidden_activation"].get<std::string>());
        if (j.contains("decoder_output"))
            arch.decoder_output =
                vgc::activation_from_name(j["decoder_output"].get<std::string>());
        arch.sigma_x2 = j.value("sigma_x2", arch.sigma_x2);
        vgc::TrainConfig cfg;
        cfg.epochs = j.value("epochs", cfg.epochs);
        cfg.batch_size = j.value("batch_size", cfg.batch_size);
        cfg.batch_size = std::min(cfg.batch_size, dataset->value.size());
        cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
        cfg.recon_weight = j.value("recon_weight", cfg.recon_weight);
        cfg.seed = j.value("seed", cfg.seed);
        auto result = vgc::train_vae(dataset->value.points, arch, cfg);
        *out = new vgc_model{std::move(result.model)};
    });
}

vgc_status vgc_vae_save(const vgc_model* model, const char* path) {
    return guarded([&] {
        check_arg(model != nullptr && path != nullptr, "vgc_vae_save: null argument");
        model->value.save(path);
    });
}

vgc_status vgc_vae_load(const char* path, vgc_model** out) {
    return guarded([&] {
        check_arg(path != nullptr && out != nullptr, "vgc_vae_load: null argument");
        *out = new vgc_model{vgc::VaeModel::load(path)};
    });
}

int64_t vgc_vae_latent_dim(const vgc_model* model) {
    return model == nullptr ? -1 : static_cast<int64_t>(model->value.latent_dim());
}

int64_t vgc_vae_data_dim(const vgc_model* model) {
    return model == nullptr ? -1 : static_cast<int64_t>(model->value.data_dim());
}

vgc_status vgc_vae_encode(const vgc_model* model, const double* x, int64_t d, double* mu_out,
                          double* logvar_out) {
    return guarded([&] {
        check_arg(model != nullptr && x != nullptr && mu_out != nullptr && logvar_out != nullptr,
                  "vgc_vae_encode: null argument");
        auto [mu, logvar] =
            model->value.encode({x, static_cast<std::size_t>(d)});
        std::memcpy(mu_out, mu.data(), mu.size() * sizeof(double));
        std::memcpy(logvar_out, logvar.data(), logvar.size() * sizeof(double));
    });
}

vgc_status vgc_vae_decode(const vgc_model* model, const double* z, int64_t latent_dim,
                          double* x_out) {
    return guarded([&] {
        check_arg(model != nullptr && z != nullptr && x_out != nullptr,
                  "vgc_vae_decode: null argument");
        auto x = model->value.decode({z, static_cast<std::size_t>(latent_dim)});
        std::memcpy(x_out, x.data(), x.size() * sizeof(double));
    });
}

vgc_status vgc_vae_encode_dataset(const vgc_model* model, const vgc_dataset* dataset,
                                  vgc_dataset** out) {
    return guarded([&] {
        check_arg(model != nullptr && dataset != nullptr && out != nullptr,
                  "vgc_vae_encode_dataset: null argument");
        vgc::Dataset encoded;
        encoded.points = model->value.encode_means(dataset->value.points);
        encoded.labels = dataset->value.labels;
        encoded.has_labels = dataset->value.has_labels;
        encoded.provenance = dataset->value.provenance + "|encoded";
        *out = new vgc_dataset{std::move(encoded)};
    });
}

void vgc_model_free(vgc_model* model) { delete model; }

/* ---- gradient processing -------------------------------------------- */

vgc_status vgc_process_dataset(const vgc_model* model, const vgc_dataset* dataset,
                               const char* config_json, vgc_dataset** out) {
    return guarded([&] {
        check_arg(model != nullptr && dataset != nullptr && out != nullptr,
                  "vgc_process_dataset: null argument");
        auto j = parse_config(config_json);
        vgc::AscentConfig acfg;
        acfg.step_size = j.value("step_size", acfg.step_size);
        acfg.iterations = j.value("iterations", acfg.iterations);
        acfg.seed = j.value("seed", acfg.seed);
        vgc::SmoothedGradConfig scfg;
        scfg.sigma = j.value("sigma", scfg.sigma);
        scfg.m_outer = j.value("m_outer", scfg.m_outer);
        scfg.n_inner = j.value("n_inner", scfg.n_inner);
        vgc::Dataset processed;
        processed.points = vgc::ascend_dataset(model->value, dataset->value.points, acfg, scfg);
        processed.labels = dataset->value.labels;
        processed.has_labels = dataset->value.has_labels;
        processed.provenance = dataset->value.provenance + "|processed";
        *out = new vgc_dataset{std::move(processed)};
    });
}

/* ---- embedding ------------------------------------------------------ */

vgc_status vgc_tsne(const vgc_dataset* dataset, const char* config_json, vgc_dataset** out) {
    return guarded([&] {
        check_arg(dataset != nullptr && out != nullptr, "vgc_tsne: null argument");
        auto j = parse_config(config_json);
        vgc::TsneConfig cfg;
        cfg.perplexity = j.value("perplexity", cfg.perplexity);
        cfg.iterations = j.value("iterations", cfg.iterations);
        cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
        cfg.seed = j.value("seed", cfg.seed);
        auto result = vgc::tsne_embed(dataset->value.points, cfg);
        vgc::Dataset embedded;
        embedded.points = std::move(result.embedding);
        embedded.labels = dataset->value.labels;
        embedded.has_labels = dataset->value.has_labels;
        embedded.provenance = dataset->value.provenance + "|tsne";
        *out = new vgc_dataset{std::move(embedded)};
    });
}

/* ---- clustering ------------------------------------------------------ */

vgc_status vgc_dbscan(const vgc_dataset* dataset, double eps, int m_core, vgc_labeling** out) {
    return guarded([&] {
        check_arg(dataset != nullptr && out != nullptr, "vgc_dbscan: null argument");
        vgc::DbscanParams params;
        params.eps = eps;
        params.m_core = m_core;
        *out = new vgc_labeling{vgc::dbscan(dataset->value.points, params)};
    });
}

vgc_status vgc_kmeans(const vgc_dataset* dataset, int k, uint64_t seed, vgc_labeling** out) {
    return guarded([&] {
        check_arg(dataset != nullptr && out != nullptr, "vgc_kmeans: null argument");
        *out = new vgc_labeling{vgc::kmeans(dataset->value.points, k, seed)};
    });
}

vgc_status vgc_gmm(const vgc_dataset* dataset, const char* config_json, vgc_labeling** out) {
    return guarded([&] {
        check_arg(dataset != nullptr && out != nullptr, "vgc_gmm: null argument");
        auto j = parse_config(config_json);
        vgc::GmmParams params;
        params.k = j.value("k", params.k);
        params.restarts = j.value("restarts", params.restarts);
        params.seed = j.value("seed", params.seed);
        params.max_iterations = j.value("max_iterations", params.max_iterations);
        params.tolerance = j.value("tolerance", params.tolerance);
        params.covariance_reg = j.value("covariance_reg", params.covariance_reg);
        auto result = vgc::fit_gmm(dataset->value.points, params);
        *out = new vgc_labeling{std::move(result.labels)};
    });
}

int64_t vgc_labeling_size(const vgc_labeling* labeling) {
    return labeling == nullptr ? -1 : static_cast<int64_t>(labeling->value.labels.size());
}

int32_t vgc_labeling_n_clusters(const vgc_labeling* labeling) {
    return labeling == nullptr ? -1 : labeling->value.n_clusters;
}

vgc_status vgc_labeling_copy(const vgc_labeling* labeling, int32_t* out) {
    return guarded([&] {
        check_arg(labeling != nullptr && out != nullptr, "vgc_labeling_copy: null argument");
        for (std::size_t i = 0; i < labeling->value.labels.size(); ++i)
            out[i] = labeling->value.labels[i];
    });
}

vgc_status vgc_labeling_save_csv(const vgc_labeling* labeling, const char* path) {
    return guarded([&] {
        check_arg(labeling != nullptr && path != nullptr, "vgc_labeling_save_csv: null argument");
        vgc::export_labeling_csv(labeling->value, path);
    });
}

vgc_status vgc_labeling_load_csv(const char* path, vgc_labeling** out) {
    return guarded([&] {
        check_arg(path != nullptr && out != nullptr, "vgc_labeling_load_csv: null argument");
        *out = new vgc_labeling{vgc::load_labeling_csv(path)};
    });
}

vgc_status vgc_labeling_top_k(const vgc_labeling* labeling, int k, vgc_labeling** out) {
    return guarded([&] {
        check_arg(labeling != nullptr && out != nullptr, "vgc_labeling_top_k: null argument");
        *out = new vgc_labeling{vgc::top_k_labeling(labeling->value, k)};
    });
}

void vgc_labeling_free(vgc_labeling* labeling) { delete labeling; }

vgc_status vgc_acc(const int32_t* true_labels, const int32_t* predicted, int64_t n, double* out) {
    return guarded([&] {
        check_arg(true_labels != nullptr && predicted != nullptr && out != nullptr,
                  "vgc_acc: null argument");
        std::vector<int> truth(true_labels, true_labels + n);
        std::vector<int> pred(predicted, predicted + n);
        *out = vgc::clustering_accuracy(truth, pred);
    });
}

/* ---- persistence scan ------------------------------------------------ */

vgc_status vgc_default_grid(const vgc_dataset* dataset, int m_core, int64_t steps,
                            double* eps_min, double* eps_max, double* step) {
    return guarded([&] {
        check_arg(dataset != nullptr && eps_min != nullptr && eps_max != nullptr &&
                      step != nullptr,
                  "vgc_default_grid: null argument");
        auto grid = vgc::default_grid(dataset->value.points, m_core,
                                      static_cast<std::size_t>(steps));
        *eps_min = grid.eps_min;
        *eps_max = grid.eps_max;
        *step = grid.step;
    });
}

vgc_status vgc_persistence_curve(const vgc_dataset* dataset, int m_core, double eps_min,
                                 double eps_max, double step, double* eps_out,
                                 int32_t* counts_out, int64_t capacity, int64_t* out_len) {
    return guarded([&] {
        check_arg(dataset != nullptr && out_len != nullptr,
                  "vgc_persistence_curve: null argument");
        vgc::EpsGrid grid{eps_min, eps_max, step};
        grid.validate();
        const auto values = grid.values();
        *out_len = static_cast<int64_t>(values.size());
        if (eps_out == nullptr && counts_out == nullptr) return;
        check_arg(eps_out != nullptr && counts_out != nullptr,
                  "vgc_persistence_curve: need both output arrays");
        check_arg(capacity >= *out_len, "vgc_persistence_curve: capacity too small");
        auto curve = vgc::persistence_curve(dataset->value.points, m_core, grid);
        for (std::size_t i = 0; i < curve.eps.size(); ++i) {
            eps_out[i] = curve.eps[i];
            counts_out[i] = curve.counts[i];
        }
    });
}

vgc_status vgc_most_persistent(const double* eps, const int32_t* counts, int64_t len,
                               int32_t* out) {
    return guarded([&] {
        check_arg(eps != nullptr && counts != nullptr && out != nullptr && len > 0,
                  "vgc_most_persistent: null argument");
        vgc::PersistenceCurve curve;
        curve.eps.assign(eps, eps + len);
        curve.counts.assign(counts, counts + len);
        *out = vgc::most_persistent(curve);
    });
}

vgc_status vgc_scan_average(const vgc_dataset* dataset, const char* config_json,
                            const char* curves_dir, char** summary_json_out) {
    return guarded([&] {
        check_arg(dataset != nullptr && summary_json_out != nullptr,
                  "vgc_scan_average: null argument");
        auto j = parse_config(config_json);
        vgc::ScanConfig cfg;
        cfg.m_core = j.value("m_core", cfg.m_core);
        cfg.subsample_size = j.value("subsample_size", cfg.subsample_size);
        cfg.runs = j.value("runs", cfg.runs);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("grid"))
            cfg.grid = grid_from_json(j["grid"]);
        else
            cfg.grid = vgc::default_grid(dataset->value.points, cfg.m_core);
        auto result = vgc::scan_average(dataset->value.points, cfg);

        if (curves_dir != nullptr) {
            std::filesystem::create_directories(curves_dir);
            for (std::size_t r = 0; r < result.curves.size(); ++r) {
                char name[32];
                std::snprintf(name, sizeof(name), "run_%03zu.csv", r);
                vgc::export_curve_csv(result.curves[r],
                                      (std::filesystem::path(curves_dir) / name).string());
            }
        }

        nlohmann::ordered_json summary;
        summary["mean"] = result.mean;
        summary["per_run"] = result.per_run;
        summary["no_signal_runs"] = result.no_signal_runs;
        summary["grid"] = {{"eps_min", cfg.grid.eps_min},
                           {"eps_max", cfg.grid.eps_max},
                           {"step", cfg.grid.step}};
        *summary_json_out = copy_string(summary.dump(2));
    });
}

}  // extern "C"
