/* vgc - VAE gradient clustering library.
 *
 * C interface over the core: opaque handles, integer status codes, and
 * JSON strings for structured configuration. Every function returning
 * vgc_status leaves a message retrievable with vgc_last_error() on
 * failure. Handles are freed with the matching *_free function; strings
 * returned through char** are freed with vgc_string_free().
 */

#ifndef VGC_H
#define VGC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vgc_status {
    VGC_OK = 0,
    VGC_ERR_INVALID_ARGUMENT = 1,
    VGC_ERR_IO = 2,
    VGC_ERR_FORMAT = 3,
    VGC_ERR_NUMERIC = 4,
    VGC_ERR_NO_SIGNAL = 5,
    VGC_ERR_INTERNAL = 6
} vgc_status;

typedef struct vgc_dataset vgc_dataset;
typedef struct vgc_model vgc_model;
typedef struct vgc_labeling vgc_labeling;

/* Library version string ("major.minor.patch"). */
const char* vgc_version(void);
/* Message for the most recent failure on this thread. */
const char* vgc_last_error(void);
/* Worker thread cap; affects speed only, never results. n <= 0 resets to
 * the hardware default. */
void vgc_set_threads(int n);
void vgc_string_free(char* s);

/* ---- datasets ------------------------------------------------------- */

/* data is row-major n x d; labels may be NULL. */
vgc_status vgc_dataset_create(const double* data, int64_t n, int64_t d, const int32_t* labels,
                              vgc_dataset** out);
/* spec_json keys: means (k x d), covariances (k x d x d), weights (k),
 * n, seed. */
vgc_status vgc_dataset_gen_mixture(const char* spec_json, vgc_dataset** out);
/* IDX (MNIST container) files; labels_path may be NULL. Pixels land in
 * [0,1]. */
vgc_status vgc_dataset_load_idx(const char* images_path, const char* labels_path,
                                vgc_dataset** out);
vgc_status vgc_dataset_load_csv(const char* path, vgc_dataset** out);
vgc_status vgc_dataset_save_csv(const vgc_dataset* dataset, const char* path);
int64_t vgc_dataset_rows(const vgc_dataset* dataset);
int64_t vgc_dataset_cols(const vgc_dataset* dataset);
int vgc_dataset_has_labels(const vgc_dataset* dataset);
/* out must hold rows*cols doubles. */
vgc_status vgc_dataset_copy_data(const vgc_dataset* dataset, double* out);
/* out must hold rows int32 values. */
vgc_status vgc_dataset_copy_labels(const vgc_dataset* dataset, int32_t* out);
vgc_status vgc_dataset_subsample(const vgc_dataset* dataset, int64_t size, uint64_t seed,
                                 vgc_dataset** out);
void vgc_dataset_free(vgc_dataset* dataset);

/* ---- VAE ------------------------------------------------------------ */

/* config_json keys (all optional): hidden_widths, latent_dim,
 * hidden_activation, decoder_output, sigma_x2, epochs, batch_size,
 * learning_rate, recon_weight, seed. */
vgc_status vgc_vae_train(const vgc_dataset* dataset, const char* config_json, vgc_model** out);
vgc_status vgc_vae_save(const vgc_model* model, const char* path);
vgc_status vgc_vae_load(const char* path, vgc_model** out);
int64_t vgc_vae_latent_dim(const vgc_model* model);
int64_t vgc_vae_data_dim(const vgc_model* model);
/* mu_out and logvar_out must hold latent_dim doubles each. */
vgc_status vgc_vae_encode(const vgc_model* model, const double* x, int64_t d, double* mu_out,
                          double* logvar_out);
/* x_out must hold data_dim doubles. */
vgc_status vgc_vae_decode(const vgc_model* model, const double* z, int64_t latent_dim,
                          double* x_out);
/* Encoder means of every row; labels are carried over. */
vgc_status vgc_vae_encode_dataset(const vgc_model* model, const vgc_dataset* dataset,
                                  vgc_dataset** out);
void vgc_model_free(vgc_model* model);

/* ---- gradient processing -------------------------------------------- */

/* config_json keys: step_size, iterations, seed, sigma (smoothing
 * variance), m_outer, n_inner. Moves every row by stochastic ascent on
 * the smoothed log-density; labels are carried over. */
vgc_status vgc_process_dataset(const vgc_model* model, const vgc_dataset* dataset,
                               const char* config_json, vgc_dataset** out);

/* ---- embedding ------------------------------------------------------ */

/* config_json keys: perplexity, iterations, learning_rate, seed. Output
 * is an n x 2 dataset; labels are carried over. */
vgc_status vgc_tsne(const vgc_dataset* dataset, const char* config_json, vgc_dataset** out);

/* ---- clustering ------------------------------------------------------ */

vgc_status vgc_dbscan(const vgc_dataset* dataset, double eps, int m_core, vgc_labeling** out);
vgc_status vgc_kmeans(const vgc_dataset* dataset, int k, uint64_t seed, vgc_labeling** out);
/* config_json keys: k, restarts, seed, max_iterations, tolerance,
 * covariance_reg. */
vgc_status vgc_gmm(const vgc_dataset* dataset, const char* config_json, vgc_labeling** out);
int64_t vgc_labeling_size(const vgc_labeling* labeling);
int32_t vgc_labeling_n_clusters(const vgc_labeling* labeling);
/* out must hold size int32 values; noise is -1. */
vgc_status vgc_labeling_copy(const vgc_labeling* labeling, int32_t* out);
vgc_status vgc_labeling_save_csv(const vgc_labeling* labeling, const char* path);
vgc_status vgc_labeling_load_csv(const char* path, vgc_labeling** out);
/* Keep the k most frequent clusters; everything else, noise included,
 * becomes bucket k. */
vgc_status vgc_labeling_top_k(const vgc_labeling* labeling, int k, vgc_labeling** out);
void vgc_labeling_free(vgc_labeling* labeling);

/* Unsupervised clustering accuracy over the best one-to-one label map. */
vgc_status vgc_acc(const int32_t* true_labels, const int32_t* predicted, int64_t n, double* out);

/* ---- persistence scan ------------------------------------------------ */

/* Heuristic grid: eps_min at the 1st percentile of nearest-neighbor
 * distances, eps_max by doubling until one cluster remains, `steps`
 * uniform values. */
vgc_status vgc_default_grid(const vgc_dataset* dataset, int m_core, int64_t steps,
                            double* eps_min, double* eps_max, double* step);
/* Two-call pattern: pass NULL eps_out/counts_out to query the length. */
vgc_status vgc_persistence_curve(const vgc_dataset* dataset, int m_core, double eps_min,
                                 double eps_max, double step, double* eps_out,
                                 int32_t* counts_out, int64_t capacity, int64_t* out_len);
vgc_status vgc_most_persistent(const double* eps, const int32_t* counts, int64_t len,
                               int32_t* out);
/* config_json keys: m_core, subsample_size, runs, seed, and grid
 * {eps_min, eps_max, step} (omit grid to use the default heuristic).
 * Writes per-run curves into curves_dir when non-NULL and returns the
 * summary (mean, per_run, no_signal_runs) as JSON. */
vgc_status vgc_scan_average(const vgc_dataset* dataset, const char* config_json,
                            const char* curves_dir, char** summary_json_out);

#ifdef __cplusplus
}
#endif

#endif /* VGC_H */
