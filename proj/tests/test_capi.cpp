// Exercises the shared-library surface exactly as an external client
// would: through vgc.h only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "vgc.h"

namespace {

std::filesystem::path tmp(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

const char* kMixture = R"({
    "means": [[-4.0, 0.0], [4.0, 0.0]],
    "covariances": [[[0.25, 0.0], [0.0, 0.25]], [[0.25, 0.0], [0.0, 0.25]]],
    "weights": [0.5, 0.5],
    "n": 240,
    "seed": 11
})";

}  // namespace

TEST_CASE("version and error text are always available") {
    CHECK(std::string(vgc_version()) == "0.1.0");
    CHECK(vgc_last_error() != nullptr);
}

TEST_CASE("dataset create/copy/subsample round trip") {
    const double data[6] = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    const int32_t labels[3] = {0, 1, 0};
    vgc_dataset* ds = nullptr;
    REQUIRE(vgc_dataset_create(data, 3, 2, labels, &ds) == VGC_OK);
    CHECK(vgc_dataset_rows(ds) == 3);
    CHECK(vgc_dataset_cols(ds) == 2);
    CHECK(vgc_dataset_has_labels(ds) == 1);

    double out[6];
    REQUIRE(vgc_dataset_copy_data(ds, out) == VGC_OK);
    CHECK(std::memcmp(out, data, sizeof(data)) == 0);
    int32_t lout[3];
    REQUIRE(vgc_dataset_copy_labels(ds, lout) == VGC_OK);
    CHECK(lout[2] == 0);

    vgc_dataset* sub = nullptr;
    REQUIRE(vgc_dataset_subsample(ds, 2, 9, &sub) == VGC_OK);
    CHECK(vgc_dataset_rows(sub) == 2);
    vgc_dataset_free(sub);
    vgc_dataset_free(ds);
}

TEST_CASE("dataset errors surface as status codes with messages") {
    vgc_dataset* ds = nullptr;
    CHECK(vgc_dataset_create(nullptr, 3, 2, nullptr, &ds) == VGC_ERR_INVALID_ARGUMENT);
    CHECK(std::string(vgc_last_error()).find("null data") != std::string::npos);
    CHECK(vgc_dataset_load_csv("/nonexistent/file.csv", &ds) == VGC_ERR_IO);
    CHECK(vgc_dataset_gen_mixture("{bad json", &ds) == VGC_ERR_FORMAT);

    // no-signal maps to its own code
    const double flat[4] = {0.0, 0.0, 1000.0, 0.0};
    vgc_dataset* sparse = nullptr;
    REQUIRE(vgc_dataset_create(flat, 2, 2, nullptr, &sparse) == VGC_OK);
    double eps[3] = {0.001, 0.002, 0.003};
    int32_t counts[3] = {0, 0, 0};
    int32_t most = 0;
    CHECK(vgc_most_persistent(eps, counts, 3, &most) == VGC_ERR_NO_SIGNAL);
    vgc_dataset_free(sparse);
}

TEST_CASE("mixture -> train -> save/load -> encode/decode/process flow") {
    vgc_dataset* data = nullptr;
    REQUIRE(vgc_dataset_gen_mixture(kMixture, &data) == VGC_OK);

    const char* train_cfg = R"({
        "hidden_widths": [16, 8], "latent_dim": 2, "epochs": 40,
        "batch_size": 60, "learning_rate": 0.01, "recon_weight": 0.5, "seed": 3
    })";
    vgc_model* model = nullptr;
    REQUIRE(vgc_vae_train(data, train_cfg, &model) == VGC_OK);
    CHECK(vgc_vae_latent_dim(model) == 2);
    CHECK(vgc_vae_data_dim(model) == 2);

    const auto model_path = tmp("vgc_capi_model.vgm");
    REQUIRE(vgc_vae_save(model, model_path.string().c_str()) == VGC_OK);
    vgc_model* loaded = nullptr;
    REQUIRE(vgc_vae_load(model_path.string().c_str(), &loaded) == VGC_OK);

    const double x[2] = {-4.0, 0.0};
    double mu_a[2], lv_a[2], mu_b[2], lv_b[2];
    REQUIRE(vgc_vae_encode(model, x, 2, mu_a, lv_a) == VGC_OK);
    REQUIRE(vgc_vae_encode(loaded, x, 2, mu_b, lv_b) == VGC_OK);
    CHECK(std::memcmp(mu_a, mu_b, sizeof(mu_a)) == 0);
    CHECK(std::memcmp(lv_a, lv_b, sizeof(lv_a)) == 0);

    double recon[2];
    REQUIRE(vgc_vae_decode(loaded, mu_a, 2, recon) == VGC_OK);
    CHECK(std::isfinite(recon[0]));

    vgc_dataset* latent = nullptr;
    REQUIRE(vgc_vae_encode_dataset(model, data, &latent) == VGC_OK);
    CHECK(vgc_dataset_cols(latent) == 2);
    CHECK(vgc_dataset_has_labels(latent) == 1);

    const char* process_cfg =
        R"({"step_size": 0.05, "iterations": 40, "sigma": 0.01, "n_inner": 2, "seed": 5})";
    vgc_dataset* processed = nullptr;
    REQUIRE(vgc_process_dataset(model, data, process_cfg, &processed) == VGC_OK);
    CHECK(vgc_dataset_rows(processed) == vgc_dataset_rows(data));

    vgc_dataset_free(processed);
    vgc_dataset_free(latent);
    vgc_model_free(loaded);
    vgc_model_free(model);
    vgc_dataset_free(data);
    std::filesystem::remove(model_path);
}

TEST_CASE("clustering and accuracy through the C surface") {
    vgc_dataset* data = nullptr;
    REQUIRE(vgc_dataset_gen_mixture(kMixture, &data) == VGC_OK);
    const auto n = static_cast<std::size_t>(vgc_dataset_rows(data));

    vgc_labeling* km = nullptr;
    REQUIRE(vgc_kmeans(data, 2, 1, &km) == VGC_OK);
    CHECK(vgc_labeling_n_clusters(km) == 2);

    vgc_labeling* gm = nullptr;
    REQUIRE(vgc_gmm(data, R"({"k": 2, "seed": 1})", &gm) == VGC_OK);

    vgc_labeling* db = nullptr;
    REQUIRE(vgc_dbscan(data, 0.5, 2, &db) == VGC_OK);
    CHECK(vgc_labeling_n_clusters(db) >= 2);

    std::vector<int32_t> truth(n), predicted(n);
    REQUIRE(vgc_dataset_copy_labels(data, truth.data()) == VGC_OK);
    REQUIRE(vgc_labeling_copy(km, predicted.data()) == VGC_OK);
    double acc = 0.0;
    REQUIRE(vgc_acc(truth.data(), predicted.data(), static_cast<int64_t>(n), &acc) == VGC_OK);
    CHECK(acc >= 0.99);

    // top-k folding
    vgc_labeling* top = nullptr;
    REQUIRE(vgc_labeling_top_k(db, 2, &top) == VGC_OK);
    CHECK(vgc_labeling_n_clusters(top) <= 3);

    // labeling CSV round trip
    const auto lab_path = tmp("vgc_capi_labels.csv");
    REQUIRE(vgc_labeling_save_csv(db, lab_path.string().c_str()) == VGC_OK);
    vgc_labeling* reloaded = nullptr;
    REQUIRE(vgc_labeling_load_csv(lab_path.string().c_str(), &reloaded) == VGC_OK);
    CHECK(vgc_labeling_size(reloaded) == vgc_labeling_size(db));
    std::filesystem::remove(lab_path);

    vgc_labeling_free(reloaded);
    vgc_labeling_free(top);
    vgc_labeling_free(db);
    vgc_labeling_free(gm);
    vgc_labeling_free(km);
    vgc_dataset_free(data);
}

TEST_CASE("tsne and persistence scan through the C surface") {
    vgc_dataset* data = nullptr;
    REQUIRE(vgc_dataset_gen_mixture(kMixture, &data) == VGC_OK);

    vgc_dataset* embedded = nullptr;
    REQUIRE(vgc_tsne(data, R"({"perplexity": 20, "iterations": 150, "seed": 2})", &embedded) ==
            VGC_OK);
    CHECK(vgc_dataset_cols(embedded) == 2);

    double eps_min = 0, eps_max = 0, step = 0;
    REQUIRE(vgc_default_grid(data, 2, 60, &eps_min, &eps_max, &step) == VGC_OK);
    CHECK(eps_min > 0.0);
    CHECK(eps_max > eps_min);

    int64_t len = 0;
    REQUIRE(vgc_persistence_curve(data, 2, eps_min, eps_max, step, nullptr, nullptr, 0, &len) ==
            VGC_OK);
    REQUIRE(len >= 3);
    std::vector<double> eps(static_cast<std::size_t>(len));
    std::vector<int32_t> counts(static_cast<std::size_t>(len));
    REQUIRE(vgc_persistence_curve(data, 2, eps_min, eps_max, step, eps.data(), counts.data(), len,
                                  &len) == VGC_OK);
    CHECK(counts.back() == 1);

    int32_t most = 0;
    REQUIRE(vgc_most_persistent(eps.data(), counts.data(), len, &most) == VGC_OK);
    CHECK(most == 2);

    char* summary = nullptr;
    const char* scan_cfg = R"({"m_core": 2, "subsample_size": 120, "runs": 5, "seed": 4})";
    REQUIRE(vgc_scan_average(data, scan_cfg, nullptr, &summary) == VGC_OK);
    std::string text(summary);
    vgc_string_free(summary);
    CHECK(text.find("\"mean\"") != std::string::npos);
    CHECK(text.find("\"per_run\"") != std::string::npos);

    vgc_dataset_free(embedded);
    vgc_dataset_free(data);
}

TEST_CASE("threads setting changes nothing in the outputs") {
    vgc_dataset* data = nullptr;
    REQUIRE(vgc_dataset_gen_mixture(kMixture, &data) == VGC_OK);
    const char* cfg = R"({"perplexity": 15, "iterations": 80, "seed": 6})";

    vgc_set_threads(1);
    vgc_dataset* a = nullptr;
    REQUIRE(vgc_tsne(data, cfg, &a) == VGC_OK);
    vgc_set_threads(4);
    vgc_dataset* b = nullptr;
    REQUIRE(vgc_tsne(data, cfg, &b) == VGC_OK);
    vgc_set_threads(0);

    const auto n = static_cast<std::size_t>(vgc_dataset_rows(a)) * 2;
    std::vector<double> va(n), vb(n);
    REQUIRE(vgc_dataset_copy_data(a, va.data()) == VGC_OK);
    REQUIRE(vgc_dataset_copy_data(b, vb.data()) == VGC_OK);
    CHECK(va == vb);

    vgc_dataset_free(b);
    vgc_dataset_free(a);
    vgc_dataset_free(data);
}
