#include "core/mlp.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace vgc {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh_fn: return "tanh";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
    }
    return "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "tanh") return Activation::tanh_fn;
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    raise(ErrorKind::invalid_argument, "unknown activation: " + name);
}

void MlpSpec::validate() const {
    require(widths.size() >= 3, ErrorKind::invalid_argument,
            "MlpSpec: need at least one hidden layer");
    for (std::size_t w : widths)
        require(w >= 1, ErrorKind::invalid_argument, "MlpSpec: zero layer width");
}

namespace {

double apply_activation(Activation a, double v) {
    switch (a) {
        case Activation::identity: return v;
        case Activation::tanh_fn: return std::tanh(v);
        case Activation::relu: return v > 0.0 ? v : 0.0;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
    }
    return v;
}

}  // namespace

Mlp::Mlp(const MlpSpec& spec, RandomSource& rng) : spec_(spec) {
    spec_.validate();
    const std::size_t n_layers = spec_.widths.size() - 1;
    layers_.reserve(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t in = spec_.widths[l];
        const std::size_t out = spec_.widths[l + 1];
        DenseLayer layer;
        layer.weights = Matrix(out, in);
        layer.bias.assign(out, 0.0);
        layer.activation = (l + 1 == n_layers) ? spec_.output : spec_.hidden;
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& w : layer.weights.flat()) w = (2.0 * rng.next_uniform() - 1.0) * limit;
        layers_.push_back(std::move(layer));
    }
}

Matrix Mlp::forward(const Matrix& x) const {
    require(x.cols() == input_dim(), ErrorKind::invalid_argument, "Mlp::forward: width mismatch");
    Matrix h = x;
    for (const auto& layer : layers_) {
        Matrix z = matmul_nt(h, layer.weights);
        add_row_inplace(z, layer.bias);
        for (double& v : z.flat()) v = apply_activation(layer.activation, v);
        h = std::move(z);
    }
    return h;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    Matrix row = Matrix::row_vector(x);
    Matrix out = forward(row);
    return {out.flat().begin(), out.flat().end()};
}

Tape::Id Mlp::forward_on(Tape& tape, Tape::Id x, std::vector<Tape::Id>& param_ids) const {
    Tape::Id h = x;
    for (const auto& layer : layers_) {
        Tape::Id w = tape.input(layer.weights, true);
        Tape::Id b = tape.input(Matrix::row_vector(layer.bias), true);
        param_ids.push_back(w);
        param_ids.push_back(b);
        Tape::Id z = tape.add_row(tape.matmul_nt(h, w), b);
        switch (layer.activation) {
            case Activation::identity: h = z; break;
            case Activation::tanh_fn: h = tape.tanh_op(z); break;
            case Activation::relu: h = tape.relu_op(z); break;
            case Activation::sigmoid: h = tape.sigmoid_op(z); break;
        }
    }
    return h;
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
    return n;
}

void Mlp::flatten_into(std::span<double> out) const {
    std::size_t pos = 0;
    for (const auto& layer : layers_) {
        for (double v : layer.weights.flat()) out[pos++] = v;
        for (double v : layer.bias) out[pos++] = v;
    }
}

void Mlp::unflatten_from(std::span<const double> in) {
    std::size_t pos = 0;
    for (auto& layer : layers_) {
        for (double& v : layer.weights.flat()) v = in[pos++];
        for (double& v : layer.bias) v = in[pos++];
    }
}

}  // namespace vgc
