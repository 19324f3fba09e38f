#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"
#include "core/tape.hpp"

namespace vgc {

enum class Activation : std::uint8_t { identity = 0, tanh_fn = 1, relu = 2, sigmoid = 3 };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Fully connected feed-forward network. widths holds input width, at least
// one hidden width and the output width. The hidden activation applies to
// every layer except the last, which uses the output activation.
struct MlpSpec {
    std::vector<std::size_t> widths;
    Activation hidden = Activation::tanh_fn;
    Activation output = Activation::identity;

    void validate() const;
};

struct DenseLayer {
    Matrix weights;               // (out, in)
    std::vector<double> bias;     // (out)
    Activation activation = Activation::identity;
};

class Mlp {
public:
    Mlp() = default;
    // Glorot-uniform initialization driven by rng.
    Mlp(const MlpSpec& spec, RandomSource& rng);

    const MlpSpec& spec() const { return spec_; }
    std::size_t input_dim() const { return spec_.widths.front(); }
    std::size_t output_dim() const { return spec_.widths.back(); }

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    Matrix forward(const Matrix& x) const;
    std::vector<double> forward(std::span<const double> x) const;

    // Records the forward pass on a tape. Parameter nodes are appended to
    // param_ids in flatten order (per layer: weights then bias).
    Tape::Id forward_on(Tape& tape, Tape::Id x, std::vector<Tape::Id>& param_ids) const;

    std::size_t param_count() const;
    void flatten_into(std::span<double> out) const;
    void unflatten_from(std::span<const double> in);

private:
    MlpSpec spec_;
    std::vector<DenseLayer> layers_;
};

}  // namespace vgc
