// vgc command-line tool: composable pipeline stages over the C API.
//
// Every subcommand writes its artifacts plus a manifest.json into the run
// directory; re-running a pipeline from its manifest reproduces the
// artifacts bit-exact. Errors exit nonzero with a stage-tagged message.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vgc.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

[[noreturn]] void fail(const std::string& stage, const std::string& message) {
    std::cerr << "vgc: [" << stage << "] error: " << message << "\n";
    std::exit(1);
}

void check(vgc_status status, const std::string& stage) {
    if (status != VGC_OK) fail(stage, vgc_last_error());
}

// Move-only RAII wrappers for the C handles.
template <typename T, void (*FreeFn)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    ~Handle() { FreeFn(ptr); }
    Handle(Handle&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
    Handle& operator=(Handle&& other) noexcept {
        std::swap(ptr, other.ptr);
        return *this;
    }
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
};

using DatasetHandle = Handle<vgc_dataset, vgc_dataset_free>;
using ModelHandle = Handle<vgc_model, vgc_model_free>;
using LabelingHandle = Handle<vgc_labeling, vgc_labeling_free>;

std::vector<int32_t> labeling_values(const vgc_labeling* labeling, const std::string& stage) {
    std::vector<int32_t> out(static_cast<std::size_t>(vgc_labeling_size(labeling)));
    check(vgc_labeling_copy(labeling, out.data()), stage);
    return out;
}

std::vector<int32_t> dataset_labels(const vgc_dataset* ds, const std::string& stage) {
    std::vector<int32_t> out(static_cast<std::size_t>(vgc_dataset_rows(ds)));
    check(vgc_dataset_copy_labels(ds, out.data()), stage);
    return out;
}

std::string read_file(const std::string& path, const std::string& stage) {
    std::ifstream is(path);
    if (!is.good()) fail(stage, "cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// ---- key = value config files ------------------------------------------

using IniData = std::map<std::string, std::map<std::string, std::string>>;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

IniData parse_ini(const std::string& path) {
    std::ifstream is(path);
    if (!is.good()) fail("config", "cannot open " + path);
    IniData data;
    std::string section = "pipeline";
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail("config", path + ":" + std::to_string(line_no) + ": expected key = value");
        data[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return data;
}

// ---- manifests -----------------------------------------------------------

class Manifest {
public:
    Manifest(fs::path out_dir, std::string subcommand, std::uint64_t seed)
        : path_(out_dir / "manifest.json"), start_(std::chrono::steady_clock::now()) {
        doc_["tool_version"] = kToolVersion;
        doc_["library_version"] = vgc_version();
        doc_["subcommand"] = std::move(subcommand);
        doc_["master_seed"] = seed;
        doc_["config"] = json::object();
        doc_["inputs"] = json::object();
        doc_["outputs"] = json::object();
        doc_["status"] = "running";
        write();
    }

    json& config() { return doc_["config"]; }
    void input(const std::string& key, const fs::path& value) {
        doc_["inputs"][key] = value.string();
    }
    void output(const std::string& key, const fs::path& value) {
        doc_["outputs"][key] = value.string();
    }

    void finalize() {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        doc_["duration_seconds"] =
            std::chrono::duration<double>(elapsed).count();
        doc_["status"] = "ok";
        write();
    }

private:
    void write() const {
        std::ofstream os(path_);
        if (!os.good()) fail("manifest", "cannot write " + path_.string());
        os << doc_.dump(2) << '\n';
    }

    fs::path path_;
    json doc_;
    std::chrono::steady_clock::time_point start_;
};

fs::path prepare_out_dir(const std::string& out_dir) {
    if (out_dir.empty()) fail("setup", "--out-dir is required");
    fs::path p(out_dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) fail("setup", "cannot create " + p.string() + ": " + ec.message());
    return p;
}

// ---- stage configs -------------------------------------------------------

struct TrainOptions {
    std::size_t epochs = 100;
    std::size_t batch_size = 100;
    double learning_rate = 1e-4;
    double recon_weight = 0.5;
    std::size_t latent_dim = 8;
    std::vector<std::size_t> hidden_widths{128, 64};
    std::string hidden_activation = "tanh";
    std::string decoder_output = "identity";
    double sigma_x2 = 1.0;

    json to_json(std::uint64_t seed) const {
        return json{{"epochs", epochs},
                    {"batch_size", batch_size},
                    {"learning_rate", learning_rate},
                    {"recon_weight", recon_weight},
                    {"latent_dim", latent_dim},
                    {"hidden_widths", hidden_widths},
                    {"hidden_activation", hidden_activation},
                    {"decoder_output", decoder_output},
                    {"sigma_x2", sigma_x2},
                    {"seed", seed}};
    }
};

struct ProcessOptions {
    double step_size = 0.001;
    long iterations = 7000;
    double sigma = 0.0005;
    int m_outer = 1;
    int n_inner = 1;

    json to_json(std::uint64_t seed) const {
        return json{{"step_size", step_size}, {"iterations", iterations}, {"sigma", sigma},
                    {"m_outer", m_outer},     {"n_inner", n_inner},       {"seed", seed}};
    }
};

struct EmbedOptions {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;

    json to_json(std::uint64_t seed) const {
        return json{{"perplexity", perplexity},
                    {"iterations", iterations},
                    {"learning_rate", learning_rate},
                    {"seed", seed}};
    }
};

struct ClusterOptions {
    std::string method = "gmm";
    int k = 10;
    double eps = 0.2;
    int m_core = 2;
    int restarts = 3;
    int top_k = 0;           // 0 = off
    std::string space = "embedding";  // or "latent"
};

struct ScanOptions {
    int m_core = 2;
    std::size_t subsample_size = 1000;
    std::size_t runs = 50;
    double eps_min = 0.0;  // 0 = default grid
    double eps_max = 0.0;
    double eps_step = 0.0;

    json to_json(std::uint64_t seed) const {
        json j{{"m_core", m_core},
               {"subsample_size", subsample_size},
               {"runs", runs},
               {"seed", seed}};
        if (eps_step > 0.0)
            j["grid"] = {{"eps_min", eps_min}, {"eps_max", eps_max}, {"step", eps_step}};
        return j;
    }
};

// ---- stage runners (shared by stage subcommands and the pipeline) -------

DatasetHandle stage_gen_data(const std::string& spec_path, std::optional<std::uint64_t> seed,
                             const fs::path& out_dir, Manifest& manifest) {
    std::string spec_text = read_file(spec_path, "gen-data");
    if (seed) {
        json spec = json::parse(spec_text, nullptr, false);
        if (spec.is_discarded()) fail("gen-data", "bad JSON in " + spec_path);
        spec["seed"] = *seed;
        spec_text = spec.dump();
    }
    DatasetHandle ds;
    check(vgc_dataset_gen_mixture(spec_text.c_str(), &ds.ptr), "gen-data");
    const fs::path out = out_dir / "dataset.csv";
    check(vgc_dataset_save_csv(ds.ptr, out.string().c_str()), "gen-data");
    manifest.input("mixture_spec", spec_path);
    manifest.output("dataset", out);
    return ds;
}

ModelHandle stage_train(const vgc_dataset* data, const TrainOptions& opt, std::uint64_t seed,
                        const fs::path& out_dir, Manifest& manifest) {
    ModelHandle model;
    const std::string cfg = opt.to_json(seed).dump();
    check(vgc_vae_train(data, cfg.c_str(), &model.ptr), "train");
    const fs::path out = out_dir / "model.vgm";
    check(vgc_vae_save(model.ptr, out.string().c_str()), "train");
    manifest.output("model", out);
    return model;
}

DatasetHandle stage_process(const vgc_model* model, const vgc_dataset* data,
                            const ProcessOptions& opt, std::uint64_t seed,
                            const fs::path& out_dir, Manifest& manifest) {
    DatasetHandle processed;
    const std::string cfg = opt.to_json(seed).dump();
    check(vgc_process_dataset(model, data, cfg.c_str(), &processed.ptr), "process");
    const fs::path out = out_dir / "processed.csv";
    check(vgc_dataset_save_csv(processed.ptr, out.string().c_str()), "process");
    manifest.output("processed", out);
    return processed;
}

DatasetHandle stage_embed(const vgc_dataset* data, const EmbedOptions& opt, std::uint64_t seed,
                          const fs::path& out_dir, Manifest& manifest) {
    DatasetHandle embedded;
    const std::string cfg = opt.to_json(seed).dump();
    check(vgc_tsne(data, cfg.c_str(), &embedded.ptr), "embed");
    const fs::path out = out_dir / "embedding.csv";
    check(vgc_dataset_save_csv(embedded.ptr, out.string().c_str()), "embed");
    manifest.output("embedding", out);
    return embedded;
}

LabelingHandle stage_cluster(const vgc_dataset* data, const ClusterOptions& opt,
                             std::uint64_t seed, const fs::path& out_dir, Manifest& manifest) {
    LabelingHandle labels;
    if (opt.method == "dbscan") {
        check(vgc_dbscan(data, opt.eps, opt.m_core, &labels.ptr), "cluster");
    } else if (opt.method == "kmeans") {
        check(vgc_kmeans(data, opt.k, seed, &labels.ptr), "cluster");
    } else if (opt.method == "gmm") {
        const std::string cfg =
            json{{"k", opt.k}, {"restarts", opt.restarts}, {"seed", seed}}.dump();
        check(vgc_gmm(data, cfg.c_str(), &labels.ptr), "cluster");
    } else {
        fail("cluster", "unknown method '" + opt.method + "' (dbscan|gmm|kmeans)");
    }
    const fs::path out = out_dir / "labels.csv";
    check(vgc_labeling_save_csv(labels.ptr, out.string().c_str()), "cluster");
    manifest.output("labels", out);
    if (opt.top_k > 0) {
        LabelingHandle top;
        check(vgc_labeling_top_k(labels.ptr, opt.top_k, &top.ptr), "cluster");
        const fs::path top_out = out_dir / "labels_topk.csv";
        check(vgc_labeling_save_csv(top.ptr, top_out.string().c_str()), "cluster");
        manifest.output("labels_topk", top_out);
    }
    return labels;
}

double stage_acc(const std::vector<int32_t>& truth, const std::vector<int32_t>& predicted,
                 const fs::path& out_dir, Manifest& manifest) {
    if (truth.size() != predicted.size()) fail("acc", "label vectors differ in length");
    double value = 0.0;
    check(vgc_acc(truth.data(), predicted.data(), static_cast<int64_t>(truth.size()), &value),
          "acc");
    json doc{{"acc", value}, {"n", truth.size()}};
    const fs::path out = out_dir / "acc.json";
    std::ofstream os(out);
    os << doc.dump(2) << '\n';
    manifest.output("acc", out);
    return value;
}

json stage_scan(const vgc_dataset* data, const ScanOptions& opt, std::uint64_t seed,
                const fs::path& out_dir, Manifest& manifest) {
    const std::string cfg = opt.to_json(seed).dump();
    const fs::path curves_dir = out_dir / "curves";
    char* summary_text = nullptr;
    check(vgc_scan_average(data, cfg.c_str(), curves_dir.string().c_str(), &summary_text),
          "scan-k");
    json summary = json::parse(summary_text);
    vgc_string_free(summary_text);
    const fs::path out = out_dir / "scan_summary.json";
    std::ofstream os(out);
    os << summary.dump(2) << '\n';
    manifest.output("scan_summary", out);
    manifest.output("curves_dir", curves_dir);
    return summary;
}

DatasetHandle load_dataset(const std::string& path, const std::string& stage) {
    DatasetHandle ds;
    check(vgc_dataset_load_csv(path.c_str(), &ds.ptr), stage);
    return ds;
}

// Labels from either a labeling CSV (index,label) or a dataset CSV that
// carries a label column.
std::vector<int32_t> labels_from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is.good()) fail("acc", "cannot open " + path);
    std::string header;
    std::getline(is, header);
    if (header == "index,label") {
        LabelingHandle lab;
        check(vgc_labeling_load_csv(path.c_str(), &lab.ptr), "acc");
        return labeling_values(lab.ptr, "acc");
    }
    DatasetHandle ds = load_dataset(path, "acc");
    if (!vgc_dataset_has_labels(ds.ptr)) fail("acc", path + " has no label column");
    return dataset_labels(ds.ptr, "acc");
}

// ---- pipeline ------------------------------------------------------------

struct PipelineConfig {
    // data
    std::string data_source;  // mixture | csv | idx
    std::string mixture_spec;
    std::string data_path;
    std::string idx_images;
    std::string idx_labels;
    // model
    std::string model_path;  // load instead of training when set
    TrainOptions train;
    // stages
    bool process_enabled = false;
    ProcessOptions process;
    bool embed_enabled = true;
    EmbedOptions embed;
    ClusterOptions cluster;
    bool scan_enabled = true;
    ScanOptions scan;

    json to_json() const {
        json j;
        j["data"] = {{"source", data_source},
                     {"mixture_spec", mixture_spec},
                     {"path", data_path},
                     {"idx_images", idx_images},
                     {"idx_labels", idx_labels}};
        j["model_path"] = model_path;
        j["train"] = train.to_json(0);
        j["train"].erase("seed");
        j["process"] = process.to_json(0);
        j["process"].erase("seed");
        j["process"]["enabled"] = process_enabled;
        j["embed"] = embed.to_json(0);
        j["embed"].erase("seed");
        j["embed"]["enabled"] = embed_enabled;
        j["cluster"] = {{"method", cluster.method}, {"k", cluster.k},
                        {"eps", cluster.eps},       {"m_core", cluster.m_core},
                        {"restarts", cluster.restarts}, {"top_k", cluster.top_k},
                        {"space", cluster.space}};
        j["scan"] = scan.to_json(0);
        j["scan"].erase("seed");
        j["scan"]["enabled"] = scan_enabled;
        return j;
    }
};

template <typename T>
T parse_value(const std::string& text, const std::string& where);

template <>
double parse_value<double>(const std::string& text, const std::string& where) {
    try {
        return std::stod(text);
    } catch (...) {
        fail("config", where + ": bad number '" + text + "'");
    }
}

template <>
long parse_value<long>(const std::string& text, const std::string& where) {
    try {
        return std::stol(text);
    } catch (...) {
        fail("config", where + ": bad integer '" + text + "'");
    }
}

template <>
bool parse_value<bool>(const std::string& text, const std::string& where) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    fail("config", where + ": bad boolean '" + text + "'");
}

std::vector<std::size_t> parse_width_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(static_cast<std::size_t>(parse_value<long>(trim(item), "hidden_widths")));
    return out;
}

PipelineConfig pipeline_config_from_ini(const IniData& ini) {
    PipelineConfig cfg;

    auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
        auto sit = ini.find(section);
        if (sit == ini.end()) return std::nullopt;
        auto kit = sit->second.find(key);
        if (kit == sit->second.end()) return std::nullopt;
        return kit->second;
    };

    // Presets configure the two reference protocols; explicit keys below
    // still override them.
    if (auto preset = get("pipeline", "preset")) {
        if (*preset == "vae-kl-grad") {
            cfg.train.recon_weight = 0.5;
            cfg.process_enabled = true;
        } else if (*preset == "autoenc") {
            cfg.train.recon_weight = 1.0;
            cfg.process_enabled = false;
        } else {
            fail("config", "unknown preset '" + *preset + "' (vae-kl-grad|autoenc)");
        }
    }

    if (auto v = get("data", "source")) cfg.data_source = *v;
    if (auto v = get("data", "spec")) cfg.mixture_spec = *v;
    if (auto v = get("data", "path")) cfg.data_path = *v;
    if (auto v = get("data", "images")) cfg.idx_images = *v;
    if (auto v = get("data", "labels")) cfg.idx_labels = *v;
    if (cfg.data_source.empty()) fail("config", "[data] source is required (mixture|csv|idx)");

    if (auto v = get("train", "model")) cfg.model_path = *v;
    if (auto v = get("train", "epochs")) cfg.train.epochs = parse_value<long>(*v, "epochs");
    if (auto v = get("train", "batch_size"))
        cfg.train.batch_size = parse_value<long>(*v, "batch_size");
    if (auto v = get("train", "learning_rate"))
        cfg.train.learning_rate = parse_value<double>(*v, "learning_rate");
    if (auto v = get("train", "recon_weight"))
        cfg.train.recon_weight = parse_value<double>(*v, "recon_weight");
    if (auto v = get("train", "latent_dim"))
        cfg.train.latent_dim = parse_value<long>(*v, "latent_dim");
    if (auto v = get("train", "hidden_widths")) cfg.train.hidden_widths = parse_width_list(*v);
    if (auto v = get("train", "hidden_activation")) cfg.train.hidden_activation = *v;
    if (auto v = get("train", "decoder_output")) cfg.train.decoder_output = *v;
    if (auto v = get("train", "sigma_x2")) cfg.train.sigma_x2 = parse_value<double>(*v, "sigma_x2");

    if (auto v = get("process", "enabled")) cfg.process_enabled = parse_value<bool>(*v, "enabled");
    if (auto v = get("process", "step_size"))
        cfg.process.step_size = parse_value<double>(*v, "step_size");
    if (auto v = get("process", "iterations"))
        cfg.process.iterations = parse_value<long>(*v, "iterations");
    if (auto v = get("process", "sigma")) cfg.process.sigma = parse_value<double>(*v, "sigma");
    if (auto v = get("process", "m_outer")) cfg.process.m_outer = parse_value<long>(*v, "m_outer");
    if (auto v = get("process", "n_inner")) cfg.process.n_inner = parse_value<long>(*v, "n_inner");

    if (auto v = get("embed", "enabled")) cfg.embed_enabled = parse_value<bool>(*v, "enabled");
    if (auto v = get("embed", "perplexity"))
        cfg.embed.perplexity = parse_value<double>(*v, "perplexity");
    if (auto v = get("embed", "iterations"))
        cfg.embed.iterations = parse_value<long>(*v, "iterations");
    if (auto v = get("embed", "learning_rate"))
        cfg.embed.learning_rate = parse_value<double>(*v, "learning_rate");

    if (auto v = get("cluster", "method")) cfg.cluster.method = *v;
    if (auto v = get("cluster", "k")) cfg.cluster.k = parse_value<long>(*v, "k");
    if (auto v = get("cluster", "eps")) cfg.cluster.eps = parse_value<double>(*v, "eps");
    if (auto v = get("cluster", "m_core")) cfg.cluster.m_core = parse_value<long>(*v, "m_core");
    if (auto v = get("cluster", "restarts"))
        cfg.cluster.restarts = parse_value<long>(*v, "restarts");
    if (auto v = get("cluster", "top_k")) cfg.cluster.top_k = parse_value<long>(*v, "top_k");
    if (auto v = get("cluster", "space")) cfg.cluster.space = *v;

    if (auto v = get("scan", "enabled")) cfg.scan_enabled = parse_value<bool>(*v, "enabled");
    if (auto v = get("scan", "m_core")) cfg.scan.m_core = parse_value<long>(*v, "m_core");
    if (auto v = get("scan", "subsample_size"))
        cfg.scan.subsample_size = parse_value<long>(*v, "subsample_size");
    if (auto v = get("scan", "runs")) cfg.scan.runs = parse_value<long>(*v, "runs");
    if (auto v = get("scan", "eps_min")) cfg.scan.eps_min = parse_value<double>(*v, "eps_min");
    if (auto v = get("scan", "eps_max")) cfg.scan.eps_max = parse_value<double>(*v, "eps_max");
    if (auto v = get("scan", "eps_step")) cfg.scan.eps_step = parse_value<double>(*v, "eps_step");

    return cfg;
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig cfg;
    const auto& data = j.at("data");
    cfg.data_source = data.value("source", "");
    cfg.mixture_spec = data.value("mixture_spec", "");
    cfg.data_path = data.value("path", "");
    cfg.idx_images = data.value("idx_images", "");
    cfg.idx_labels = data.value("idx_labels", "");
    cfg.model_path = j.value("model_path", "");
    const auto& t = j.at("train");
    cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.recon_weight = t.value("recon_weight", cfg.train.recon_weight);
    cfg.train.latent_dim = t.value("latent_dim", cfg.train.latent_dim);
    cfg.train.hidden_widths = t.value("hidden_widths", cfg.train.hidden_widths);
    cfg.train.hidden_activation = t.value("hidden_activation", cfg.train.hidden_activation);
    cfg.train.decoder_output = t.value("decoder_output", cfg.train.decoder_output);
    cfg.train.sigma_x2 = t.value("sigma_x2", cfg.train.sigma_x2);
    const auto& p = j.at("process");
    cfg.process_enabled = p.value("enabled", false);
    cfg.process.step_size = p.value("step_size", cfg.process.step_size);
    cfg.process.iterations = p.value("iterations", cfg.process.iterations);
    cfg.process.sigma = p.value("sigma", cfg.process.sigma);
    cfg.process.m_outer = p.value("m_outer", cfg.process.m_outer);
    cfg.process.n_inner = p.value("n_inner", cfg.process.n_inner);
    const auto& e = j.at("embed");
    cfg.embed_enabled = e.value("enabled", true);
    cfg.embed.perplexity = e.value("perplexity", cfg.embed.perplexity);
    cfg.embed.iterations = e.value("iterations", cfg.embed.iterations);
    cfg.embed.learning_rate = e.value("learning_rate", cfg.embed.learning_rate);
    const auto& c = j.at("cluster");
    cfg.cluster.method = c.value("method", cfg.cluster.method);
    cfg.cluster.k = c.value("k", cfg.cluster.k);
    cfg.cluster.eps = c.value("eps", cfg.cluster.eps);
    cfg.cluster.m_core = c.value("m_core", cfg.cluster.m_core);
    cfg.cluster.restarts = c.value("restarts", cfg.cluster.restarts);
    cfg.cluster.top_k = c.value("top_k", cfg.cluster.top_k);
    cfg.cluster.space = c.value("space", cfg.cluster.space);
    const auto& s = j.at("scan");
    cfg.scan_enabled = s.value("enabled", true);
    cfg.scan.m_core = s.value("m_core", cfg.scan.m_core);
    cfg.scan.subsample_size = s.value("subsample_size", cfg.scan.subsample_size);
    cfg.scan.runs = s.value("runs", cfg.scan.runs);
    if (s.contains("grid")) {
        cfg.scan.eps_min = s["grid"].value("eps_min", 0.0);
        cfg.scan.eps_max = s["grid"].value("eps_max", 0.0);
        cfg.scan.eps_step = s["grid"].value("step", 0.0);
    }
    return cfg;
}

int run_pipeline(const PipelineConfig& cfg, std::uint64_t seed, const std::string& out_dir_arg) {
    const fs::path out_dir = prepare_out_dir(out_dir_arg);
    Manifest manifest(out_dir, "pipeline", seed);
    manifest.config() = cfg.to_json();

    // Resolved config echo, re-runnable via --from-manifest.
    {
        std::ofstream os(out_dir / "config.resolved.json");
        os << cfg.to_json().dump(2) << '\n';
        manifest.output("resolved_config", out_dir / "config.resolved.json");
    }

    // Stage: data.
    DatasetHandle data;
    if (cfg.data_source == "mixture") {
        if (cfg.mixture_spec.empty()) fail("data", "[data] spec is required for source=mixture");
        data = stage_gen_data(cfg.mixture_spec, std::nullopt, out_dir, manifest);
    } else if (cfg.data_source == "csv") {
        data = load_dataset(cfg.data_path, "data");
        manifest.input("dataset", cfg.data_path);
    } else if (cfg.data_source == "idx") {
        check(vgc_dataset_load_idx(cfg.idx_images.c_str(),
                                   cfg.idx_labels.empty() ? nullptr : cfg.idx_labels.c_str(),
                                   &data.ptr),
              "data");
        manifest.input("idx_images", cfg.idx_images);
        if (!cfg.idx_labels.empty()) manifest.input("idx_labels", cfg.idx_labels);
    } else {
        fail("data", "unknown source '" + cfg.data_source + "'");
    }
    std::cout << "[data] " << vgc_dataset_rows(data.ptr) << " points, dim "
              << vgc_dataset_cols(data.ptr) << "\n";

    // Stage: model.
    ModelHandle model;
    if (!cfg.model_path.empty()) {
        check(vgc_vae_load(cfg.model_path.c_str(), &model.ptr), "train");
        manifest.input("model", cfg.model_path);
    } else {
        model = stage_train(data.ptr, cfg.train, seed, out_dir, manifest);
    }
    std::cout << "[train] latent dim " << vgc_vae_latent_dim(model.ptr) << "\n";

    // Stage: optional gradient processing in data space.
    const vgc_dataset* current = data.ptr;
    DatasetHandle processed;
    if (cfg.process_enabled) {
        processed = stage_process(model.ptr, data.ptr, cfg.process, seed, out_dir, manifest);
        current = processed.ptr;
        std::cout << "[process] " << cfg.process.iterations << " iterations at step "
                  << cfg.process.step_size << "\n";
    }

    // Stage: encode to the posterior means.
    DatasetHandle latent;
    check(vgc_vae_encode_dataset(model.ptr, current, &latent.ptr), "encode");
    {
        const fs::path latent_path = out_dir / "latent.csv";
        check(vgc_dataset_save_csv(latent.ptr, latent_path.string().c_str()), "encode");
        manifest.output("latent", latent_path);
    }

    // Stage: optional embedding.
    DatasetHandle embedded;
    const vgc_dataset* cluster_input = latent.ptr;
    if (cfg.embed_enabled) {
        embedded = stage_embed(latent.ptr, cfg.embed, seed, out_dir, manifest);
        if (cfg.cluster.space == "embedding") cluster_input = embedded.ptr;
        std::cout << "[embed] perplexity " << cfg.embed.perplexity << "\n";
    }
    if (cfg.cluster.space == "embedding" && !cfg.embed_enabled)
        fail("cluster", "cluster space 'embedding' requires the embed stage");

    // Stage: clustering.
    LabelingHandle labels = stage_cluster(cluster_input, cfg.cluster, seed, out_dir, manifest);
    std::cout << "[cluster] " << cfg.cluster.method << " found "
              << vgc_labeling_n_clusters(labels.ptr) << " clusters\n";

    // Stage: accuracy against generating labels, when present.
    if (vgc_dataset_has_labels(data.ptr)) {
        auto truth = dataset_labels(data.ptr, "acc");
        auto predicted = labeling_values(labels.ptr, "acc");
        const double value = stage_acc(truth, predicted, out_dir, manifest);
        std::cout << "[acc] " << value << "\n";
    }

    // Stage: persistence scan on the clustered representation.
    if (cfg.scan_enabled) {
        json summary = stage_scan(cluster_input, cfg.scan, seed, out_dir, manifest);
        std::cout << "[scan-k] mean " << summary["mean"] << " over "
                  << summary["per_run"].size() << " runs ("
                  << summary["no_signal_runs"] << " no-signal)\n";
    }

    manifest.finalize();
    std::cout << "[done] artifacts in " << out_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VAE gradient clustering pipeline"};
    app.set_version_flag("--version", std::string("vgc ") + kToolVersion);
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;
    app.add_option("--seed", seed, "Master seed; every stage derives its streams from it")
        ->capture_default_str();
    app.add_option("--out-dir", out_dir, "Run directory for artifacts and the manifest");
    app.add_option("--threads", threads, "Worker thread cap (speed only, never results)");

    // gen-data
    auto* cmd_gen = app.add_subcommand("gen-data", "Sample a Gaussian mixture dataset");
    std::string gen_spec;
    bool gen_seed_override = false;
    cmd_gen->add_option("--spec", gen_spec, "Mixture spec JSON file")->required();
    cmd_gen->add_flag("--override-seed", gen_seed_override,
                      "Replace the spec's seed with --seed");

    // train
    auto* cmd_train = app.add_subcommand("train", "Train a VAE on a dataset");
    std::string train_data;
    TrainOptions train_opt;
    cmd_train->add_option("--data", train_data, "Dataset CSV")->required();
    cmd_train->add_option("--epochs", train_opt.epochs)->capture_default_str();
    cmd_train->add_option("--batch-size", train_opt.batch_size)->capture_default_str();
    cmd_train->add_option("--learning-rate", train_opt.learning_rate)->capture_default_str();
    cmd_train->add_option("--recon-weight", train_opt.recon_weight)->capture_default_str();
    cmd_train->add_option("--latent-dim", train_opt.latent_dim)->capture_default_str();
    cmd_train->add_option("--hidden-widths", train_opt.hidden_widths)->capture_default_str();
    cmd_train->add_option("--hidden-activation", train_opt.hidden_activation)
        ->capture_default_str();
    cmd_train->add_option("--decoder-output", train_opt.decoder_output)->capture_default_str();
    cmd_train->add_option("--sigma-x2", train_opt.sigma_x2)->capture_default_str();

    // process
    auto* cmd_process = app.add_subcommand("process", "Gradient-ascend a dataset toward modes");
    std::string process_model, process_data;
    ProcessOptions process_opt;
    cmd_process->add_option("--model", process_model, "Model file")->required();
    cmd_process->add_option("--data", process_data, "Dataset CSV")->required();
    cmd_process->add_option("--step-size", process_opt.step_size)->capture_default_str();
    cmd_process->add_option("--iterations", process_opt.iterations)->capture_default_str();
    cmd_process->add_option("--sigma", process_opt.sigma, "Smoothing variance")
        ->capture_default_str();
    cmd_process->add_option("--m-outer", process_opt.m_outer)->capture_default_str();
    cmd_process->add_option("--n-inner", process_opt.n_inner)->capture_default_str();

    // embed
    auto* cmd_embed = app.add_subcommand("embed", "t-SNE a dataset to two dimensions");
    std::string embed_data;
    EmbedOptions embed_opt;
    cmd_embed->add_option("--data", embed_data, "Dataset CSV")->required();
    cmd_embed->add_option("--perplexity", embed_opt.perplexity)->capture_default_str();
    cmd_embed->add_option("--iterations", embed_opt.iterations)->capture_default_str();
    cmd_embed->add_option("--learning-rate", embed_opt.learning_rate)->capture_default_str();

    // cluster
    auto* cmd_cluster = app.add_subcommand("cluster", "Cluster a dataset");
    std::string cluster_data;
    ClusterOptions cluster_opt;
    cmd_cluster->add_option("--data", cluster_data, "Dataset CSV")->required();
    cmd_cluster->add_option("--method", cluster_opt.method, "dbscan|gmm|kmeans")
        ->capture_default_str();
    cmd_cluster->add_option("--k", cluster_opt.k)->capture_default_str();
    cmd_cluster->add_option("--eps", cluster_opt.eps)->capture_default_str();
    cmd_cluster->add_option("--m-core", cluster_opt.m_core)->capture_default_str();
    cmd_cluster->add_option("--restarts", cluster_opt.restarts)->capture_default_str();
    cmd_cluster->add_option("--top-k", cluster_opt.top_k, "Bucket all but the k biggest clusters")
        ->capture_default_str();

    // scan-k
    auto* cmd_scan = app.add_subcommand("scan-k", "Subsampled persistence scan for cluster count");
    std::string scan_data;
    ScanOptions scan_opt;
    cmd_scan->add_option("--data", scan_data, "Dataset CSV")->required();
    cmd_scan->add_option("--m-core", scan_opt.m_core)->capture_default_str();
    cmd_scan->add_option("--subsample-size", scan_opt.subsample_size)->capture_default_str();
    cmd_scan->add_option("--runs", scan_opt.runs)->capture_default_str();
    cmd_scan->add_option("--eps-min", scan_opt.eps_min)->capture_default_str();
    cmd_scan->add_option("--eps-max", scan_opt.eps_max)->capture_default_str();
    cmd_scan->add_option("--eps-step", scan_opt.eps_step)->capture_default_str();

    // acc
    auto* cmd_acc = app.add_subcommand("acc", "Clustering accuracy between two label files");
    std::string acc_true, acc_pred;
    cmd_acc->add_option("--true", acc_true, "True labels (labeling or dataset CSV)")->required();
    cmd_acc->add_option("--pred", acc_pred, "Predicted labels (labeling or dataset CSV)")
        ->required();

    // pipeline
    auto* cmd_pipeline = app.add_subcommand("pipeline", "Run the full pipeline from a config");
    std::string pipeline_config_path, pipeline_manifest_path;
    cmd_pipeline->add_option("--config", pipeline_config_path, "key = value config file");
    cmd_pipeline->add_option("--from-manifest", pipeline_manifest_path,
                             "Reproduce a previous run from its manifest.json");

    CLI11_PARSE(app, argc, argv);
    vgc_set_threads(threads);

    if (cmd_gen->parsed()) {
        const fs::path dir = prepare_out_dir(out_dir);
        Manifest manifest(dir, "gen-data", seed);
        manifest.config()["spec"] = gen_spec;
        auto ds = stage_gen_data(gen_spec,
                                 gen_seed_override ? std::optional<std::uint64_t>(seed)
                                                   : std::nullopt,
                                 dir, manifest);
        std::cout << "[gen-data] " << vgc_dataset_rows(ds.ptr) << " points, dim "
                  << vgc_dataset_cols(ds.ptr) << "\n";
        manifest.finalize();
        return 0;
    }
    if (cmd_train->parsed()) {
        const fs::path dir = prepare_out_dir(out_dir);
        Manifest manifest(dir, "train", seed);
        manifest.config() = train_opt.to_json(seed);
        manifest.input("dataset", train_data);
        auto data = load_dataset(train_data, "train");
        auto model = stage_train(data.ptr, train_opt, seed, dir, manifest);
        std::cout << "[train] model saved, latent dim " << vgc_vae_latent_dim(model.ptr) << "\n";
        manifest.finalize();
        return 0;
    }
    if (cmd_process->parsed()) {
        const fs::path dir = prepare_out_dir(out_dir);
        Manifest manifest(dir, "process", seed);
        manifest.config() = process_opt.to_json(seed);
        manifest.input("model", process_model);
        manifest.input("dataset", process_data);
        ModelHandle model;
        check(vgc_vae_load(process_model.c_str(), &model.ptr), "process");
        auto data = load_dataset(process_data, "process");
        stage_process(model.ptr, data.ptr, process_opt, seed, dir, manifest);
        std::cout << "[process] done\n";
        manifest.finalize();
        return 0;
    }
    if (cmd_embed->parsed()) {
        const fs::path dir = prepare_out_dir(out_dir);
        Manifest manifest(dir, "embed", seed);
        manifest.config() = embed_opt.to_json(seed);
        manifest.input("dataset", embed_data);
        auto data = load_dataset(embed_data, "embed");
        stage_embed(data.ptr, embed_opt, seed, dir, manifest);
        std::cout << "[embed] done\n";
        manifest.finalize();
        return 0;
    }
    if (cmd_cluster->parsed()) {
        const fs::path dir = prepare_out_dir(out_dir);
        Manifest manifest(dir, "cluster", seed);
        manifest.config() = {{"method", cluster_opt.method}, {"k", cluster_opt.k},
                             {"eps", cluster_opt.eps},       {"m_core", cluster_opt.m_core},
                             {"restarts", cluster_opt.restarts}, {"top_k", cluster_opt.top_k},
                             {"seed", seed}};
        manifest.input("dataset", cluster_data);
        auto data = load_dataset(cluster_data, "cluster");
        auto labels = stage_cluster(data.ptr, cluster_opt, seed, dir, manifest);
        std::cout << "[cluster] " << vgc_labeling_n_clusters(labels.ptr) << " clusters\n";
        manifest.finalize();
        return 0;
    }
    if (cmd_scan->parsed()) {
        const fs::path dir = prepare_out_dir(out_dir);
        Manifest manifest(dir, "scan-k", seed);
        manifest.config() = scan_opt.to_json(seed);
        manifest.input("dataset", scan_data);
        auto data = load_dataset(scan_data, "scan-k");
        json summary = stage_scan(data.ptr, scan_opt, seed, dir, manifest);
        std::cout << "[scan-k] mean " << summary["mean"] << " (" << summary["no_signal_runs"]
                  << " no-signal runs)\n";
        manifest.finalize();
        return 0;
    }
    if (cmd_acc->parsed()) {
        auto truth = labels_from_file(acc_true);
        auto predicted = labels_from_file(acc_pred);
        if (truth.size() != predicted.size()) fail("acc", "label files differ in length");
        double value = 0.0;
        check(vgc_acc(truth.data(), predicted.data(), static_cast<int64_t>(truth.size()), &value),
              "acc");
        std::cout << "[acc] " << value << "\n";
        if (!out_dir.empty()) {
            const fs::path dir = prepare_out_dir(out_dir);
            Manifest manifest(dir, "acc", seed);
            manifest.input("true", acc_true);
            manifest.input("pred", acc_pred);
            json doc{{"acc", value}, {"n", truth.size()}};
            std::ofstream os(dir / "acc.json");
            os << doc.dump(2) << '\n';
            manifest.output("acc", dir / "acc.json");
            manifest.finalize();
        }
        return 0;
    }
    if (cmd_pipeline->parsed()) {
        PipelineConfig cfg;
        std::uint64_t effective_seed = seed;
        if (!pipeline_manifest_path.empty()) {
            json manifest = json::parse(read_file(pipeline_manifest_path, "pipeline"));
            if (manifest.value("subcommand", "") != "pipeline")
                fail("pipeline", "manifest is not from a pipeline run");
            cfg = pipeline_config_from_json(manifest.at("config"));
            effective_seed = manifest.at("master_seed").get<std::uint64_t>();
        } else if (!pipeline_config_path.empty()) {
            cfg = pipeline_config_from_ini(parse_ini(pipeline_config_path));
        } else {
            fail("pipeline", "need --config or --from-manifest");
        }
        return run_pipeline(cfg, effective_seed, out_dir);
    }
    return 0;
}
