#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/matrix.hpp"
#include "core/mlp.hpp"
#include "core/rng.hpp"

namespace vgc {

// MLP VAE with diagonal Gaussian encoder q(z|x) = N(mu_e, diag sigma_e^2)
// and isotropic Gaussian decoder p(x|z) = N(mu(z), sigma_x2 * I). The
// encoder network maps data to 2L outputs: the first L are mu_e, the last
// L are log sigma_e^2. sigma_x2 is a fixed hyperparameter, not learned.
class VaeModel {
public:
    VaeModel() = default;
    VaeModel(Mlp encoder, Mlp decoder, double sigma_x2, std::uint64_t seed);

    std::size_t data_dim() const { return encoder_.input_dim(); }
    std::size_t latent_dim() const { return latent_dim_; }
    double sigma_x2() const { return sigma_x2_; }
    std::uint64_t seed() const { return seed_; }

    Mlp& encoder() { return encoder_; }
    const Mlp& encoder() const { return encoder_; }
    Mlp& decoder() { return decoder_; }
    const Mlp& decoder() const { return decoder_; }

    // (mu_e, log sigma_e^2)
    std::pair<std::vector<double>, std::vector<double>> encode(std::span<const double> x) const;
    std::vector<double> decode(std::span<const double> z) const;
    // Row-wise encoder means for a whole dataset.
    Matrix encode_means(const Matrix& points) const;

    std::size_t param_count() const { return encoder_.param_count() + decoder_.param_count(); }
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> params);

    // Versioned binary model file; round-trips bit-exact.
    void save(const std::string& path) const;
    static VaeModel load(const std::string& path);

private:
    Mlp encoder_;
    Mlp decoder_;
    std::size_t latent_dim_ = 0;
    double sigma_x2_ = 1.0;
    std::uint64_t seed_ = 0;
};

struct VaeArchitecture {
    std::vector<std::size_t> hidden_widths{256, 64};
    std::size_t latent_dim = 8;
    Activation hidden_activation = Activation::tanh_fn;
    Activation decoder_output = Activation::identity;
    double sigma_x2 = 1.0;
};

// Paper-style defaults: Adam at 1e-4, batches of 100.
struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 100;
    double learning_rate = 1e-4;
    double recon_weight = 0.5;  // KL weight is 1 - recon_weight
    std::uint64_t seed = 0;

    void validate(std::size_t dataset_size) const;
};

struct ElboResult {
    double loss = 0.0;
    double reconstruction = 0.0;
    double kl = 0.0;
    std::vector<double> gradient;  // w.r.t. flatten() order
};

// loss = w * mean squared reconstruction error + (1-w) * mean KL(q || N(0,I)),
// with one reparameterized latent sample per batch row.
ElboResult elbo_loss(const VaeModel& model, const Matrix& batch, double recon_weight,
                     RandomSource& rng);

struct TrainResult {
    VaeModel model;
    std::vector<double> epoch_losses;
};

VaeModel make_vae(std::size_t data_dim, const VaeArchitecture& arch, std::uint64_t seed);

TrainResult train_vae(const Matrix& data, const VaeArchitecture& arch, const TrainConfig& cfg);

}  // namespace vgc
