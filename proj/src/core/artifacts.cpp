#include "core/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace vgc {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    require(os.good(), ErrorKind::io, "cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), ErrorKind::io, "cannot open: " + path);
    return is;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

double parse_double(const std::string& s, const std::string& path) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        raise(ErrorKind::format, "bad numeric field '" + s + "' in " + path);
    }
}

int parse_int(const std::string& s, const std::string& path) {
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        raise(ErrorKind::format, "bad integer field '" + s + "' in " + path);
    }
}

}  // namespace

void save_dataset_csv(const Dataset& dataset, const std::string& path) {
    auto os = open_out(path);
    for (std::size_t j = 0; j < dataset.dim(); ++j) {
        if (j) os << ',';
        os << 'x' << j;
    }
    if (dataset.has_labels) os << ",label";
    os << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto row = dataset.points.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ',';
            os << format_double(row[j]);
        }
        if (dataset.has_labels) os << ',' << dataset.labels[i];
        os << '\n';
    }
    require(os.good(), ErrorKind::io, "write failed: " + path);
}

Dataset load_dataset_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorKind::format,
            "empty dataset file: " + path);
    auto header = split_csv_line(line);
    require(!header.empty(), ErrorKind::format, "missing header: " + path);
    const bool has_labels = header.back() == "label";
    const std::size_t dim = header.size() - (has_labels ? 1 : 0);
    require(dim >= 1, ErrorKind::format, "no data columns: " + path);

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        require(fields.size() == header.size(), ErrorKind::format,
                "row width mismatch in " + path);
        for (std::size_t j = 0; j < dim; ++j) values.push_back(parse_double(fields[j], path));
        if (has_labels) labels.push_back(parse_int(fields[dim], path));
        ++n;
    }
    Dataset out;
    out.points = Matrix(n, dim);
    std::copy(values.begin(), values.end(), out.points.flat().begin());
    out.labels = std::move(labels);
    out.has_labels = has_labels;
    out.provenance = "csv:" + path;
    return out;
}

void export_embedding_csv(const Matrix& embedding, const std::string& path) {
    require(embedding.cols() == 2, ErrorKind::invalid_argument,
            "export_embedding_csv: expected 2 columns");
    auto os = open_out(path);
    os << "index,x,y\n";
    for (std::size_t i = 0; i < embedding.rows(); ++i)
        os << i << ',' << format_double(embedding(i, 0)) << ',' << format_double(embedding(i, 1))
           << '\n';
    require(os.good(), ErrorKind::io, "write failed: " + path);
}

Matrix load_embedding_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    require(static_cast<bool>(std::getline(is, line)) && line == "index,x,y", ErrorKind::format,
            "not an embedding file: " + path);
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        require(fields.size() == 3, ErrorKind::format, "row width mismatch in " + path);
        values.push_back(parse_double(fields[1], path));
        values.push_back(parse_double(fields[2], path));
    }
    Matrix out(values.size() / 2, 2);
    std::copy(values.begin(), values.end(), out.flat().begin());
    return out;
}

void export_labeling_csv(const Labeling& labeling, const std::string& path) {
    auto os = open_out(path);
    os << "index,label\n";
    for (std::size_t i = 0; i < labeling.labels.size(); ++i)
        os << i << ',' << labeling.labels[i] << '\n';
    require(os.good(), ErrorKind::io, "write failed: " + path);
}

Labeling load_labeling_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    require(static_cast<bool>(std::getline(is, line)) && line == "index,label", ErrorKind::format,
            "not a labeling file: " + path);
    std::vector<int> labels;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        require(fields.size() == 2, ErrorKind::format, "row width mismatch in " + path);
        labels.push_back(parse_int(fields[1], path));
    }
    Labeling out;
    out.labels = std::move(labels);
    int max_label = -1;
    for (int l : out.labels) max_label = std::max(max_label, l);
    out.n_clusters = max_label + 1;
    return out;
}

void export_curve_csv(const PersistenceCurve& curve, const std::string& path) {
    auto os = open_out(path);
    os << "eps,count\n";
    for (std::size_t i = 0; i < curve.eps.size(); ++i)
        os << format_double(curve.eps[i]) << ',' << curve.counts[i] << '\n';
    require(os.good(), ErrorKind::io, "write failed: " + path);
}

PersistenceCurve load_curve_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    require(static_cast<bool>(std::getline(is, line)) && line == "eps,count", ErrorKind::format,
            "not a curve file: " + path);
    PersistenceCurve out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        require(fields.size() == 2, ErrorKind::format, "row width mismatch in " + path);
        out.eps.push_back(parse_double(fields[0], path));
        out.counts.push_back(parse_int(fields[1], path));
    }
    return out;
}

void export_scan_summary_json(const ScanResult& result, const ScanConfig& cfg,
                              const std::string& path) {
    nlohmann::ordered_json j;
    char mean_buf[32];
    std::snprintf(mean_buf, sizeof(mean_buf), "%.2f", result.mean);
    j["mean"] = result.mean;
    j["mean_2dp"] = mean_buf;
    j["per_run"] = result.per_run;
    j["no_signal_runs"] = result.no_signal_runs;
    j["config"] = {{"m_core", cfg.m_core},
                   {"eps_min", cfg.grid.eps_min},
                   {"eps_max", cfg.grid.eps_max},
                   {"eps_step", cfg.grid.step},
                   {"subsample_size", cfg.subsample_size},
                   {"runs", cfg.runs},
                   {"seed", cfg.seed}};
    auto os = open_out(path);
    os << j.dump(2) << '\n';
    require(os.good(), ErrorKind::io, "write failed: " + path);
}

namespace {

MixtureSpec mixture_spec_from_json(const nlohmann::json& j) {
    MixtureSpec spec;
    try {
        const auto& means = j.at("means");
        const std::size_t k = means.size();
        require(k >= 1, ErrorKind::format, "mixture spec: empty means");
        const std::size_t d = means.at(0).size();
        spec.means = Matrix(k, d);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t a = 0; a < d; ++a) spec.means(c, a) = means.at(c).at(a).get<double>();
        for (const auto& cov_json : j.at("covariances")) {
            Matrix cov(d, d);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) cov(a, b) = cov_json.at(a).at(b).get<double>();
            spec.covariances.push_back(std::move(cov));
        }
        spec.weights = j.at("weights").get<std::vector<double>>();
        spec.n = j.at("n").get<std::size_t>();
        spec.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::format, std::string("bad mixture spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

}  // namespace

MixtureSpec mixture_spec_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::format, std::string("bad mixture spec JSON: ") + e.what());
    }
    return mixture_spec_from_json(j);
}

MixtureSpec mixture_spec_from_json_file(const std::string& path) {
    auto is = open_in(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return mixture_spec_from_json_text(ss.str());
}

}  // namespace vgc
