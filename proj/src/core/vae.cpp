#include "core/vae.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "core/adam.hpp"
#include "core/errors.hpp"
#include "core/tape.hpp"

namespace vgc {

VaeModel::VaeModel(Mlp encoder, Mlp decoder, double sigma_x2, std::uint64_t seed)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)), sigma_x2_(sigma_x2), seed_(seed) {
    require(sigma_x2_ > 0.0, ErrorKind::invalid_argument, "VaeModel: sigma_x2 must be > 0");
    require(encoder_.output_dim() % 2 == 0, ErrorKind::invalid_argument,
            "VaeModel: encoder must emit mu and logvar heads");
    latent_dim_ = encoder_.output_dim() / 2;
    require(decoder_.input_dim() == latent_dim_, ErrorKind::invalid_argument,
            "VaeModel: decoder input must match latent dim");
    require(decoder_.output_dim() == encoder_.input_dim(), ErrorKind::invalid_argument,
            "VaeModel: decoder output must match data dim");
}

std::pair<std::vector<double>, std::vector<double>> VaeModel::encode(
    std::span<const double> x) const {
    require(x.size() == data_dim(), ErrorKind::invalid_argument, "encode: dimension mismatch");
    auto out = encoder_.forward(x);
    std::vector<double> mu(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(latent_dim_));
    std::vector<double> logvar(out.begin() + static_cast<std::ptrdiff_t>(latent_dim_), out.end());
    return {std::move(mu), std::move(logvar)};
}

std::vector<double> VaeModel::decode(std::span<const double> z) const {
    require(z.size() == latent_dim_, ErrorKind::invalid_argument, "decode: dimension mismatch");
    return decoder_.forward(z);
}

Matrix VaeModel::encode_means(const Matrix& points) const {
    Matrix out = encoder_.forward(points);
    Matrix means(points.rows(), latent_dim_);
    for (std::size_t i = 0; i < points.rows(); ++i)
        for (std::size_t j = 0; j < latent_dim_; ++j) means(i, j) = out(i, j);
    return means;
}

std::vector<double> VaeModel::flatten() const {
    std::vector<double> params(param_count());
    encoder_.flatten_into({params.data(), encoder_.param_count()});
    decoder_.flatten_into({params.data() + encoder_.param_count(), decoder_.param_count()});
    return params;
}

void VaeModel::unflatten(std::span<const double> params) {
    require(params.size() == param_count(), ErrorKind::invalid_argument,
            "unflatten: parameter count mismatch");
    encoder_.unflatten_from(params.subspan(0, encoder_.param_count()));
    decoder_.unflatten_from(params.subspan(encoder_.param_count()));
}

namespace {

constexpr char kModelMagic[8] = {'V', 'G', 'C', 'M', 'O', 'D', 'L', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_spec(std::ostream& os, const MlpSpec& spec) {
    write_u64(os, spec.widths.size());
    for (std::size_t w : spec.widths) write_u64(os, w);
    os.put(static_cast<char>(spec.hidden));
    os.put(static_cast<char>(spec.output));
}

MlpSpec read_spec(std::istream& is) {
    MlpSpec spec;
    const std::uint64_t n = read_u64(is);
    spec.widths.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) spec.widths[i] = read_u64(is);
    spec.hidden = static_cast<Activation>(is.get());
    spec.output = static_cast<Activation>(is.get());
    return spec;
}

}  // namespace

void VaeModel::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), ErrorKind::io, "cannot open model file for writing: " + path);
    os.write(kModelMagic, sizeof(kModelMagic));
    write_u64(os, latent_dim_);
    write_u64(os, seed_);
    os.write(reinterpret_cast<const char*>(&sigma_x2_), sizeof(sigma_x2_));
    write_spec(os, encoder_.spec());
    write_spec(os, decoder_.spec());
    auto params = flatten();
    write_u64(os, params.size());
    os.write(reinterpret_cast<const char*>(params.data()),
             static_cast<std::streamsize>(params.size() * sizeof(double)));
    require(os.good(), ErrorKind::io, "write failed: " + path);
}

VaeModel VaeModel::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), ErrorKind::io, "cannot open model file: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    require(is.good() && std::memcmp(magic, kModelMagic, sizeof(magic)) == 0, ErrorKind::format,
            "not a model file: " + path);
    const std::uint64_t latent = read_u64(is);
    const std::uint64_t seed = read_u64(is);
    double sigma_x2 = 0.0;
    is.read(reinterpret_cast<char*>(&sigma_x2), sizeof(sigma_x2));
    MlpSpec enc_spec = read_spec(is);
    MlpSpec dec_spec = read_spec(is);
    RandomSource dummy(0);
    Mlp encoder(enc_spec, dummy);
    Mlp decoder(dec_spec, dummy);
    VaeModel model(std::move(encoder), std::move(decoder), sigma_x2, seed);
    require(model.latent_dim() == latent, ErrorKind::format, "model file latent dim mismatch");
    const std::uint64_t n_params = read_u64(is);
    require(n_params == model.param_count(), ErrorKind::format,
            "model file parameter count mismatch");
    std::vector<double> params(n_params);
    is.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(n_params * sizeof(double)));
    require(is.good(), ErrorKind::format, "truncated model file: " + path);
    model.unflatten(params);
    return model;
}

void TrainConfig::validate(std::size_t dataset_size) const {
    require(recon_weight >= 0.0 && recon_weight <= 1.0, ErrorKind::invalid_argument,
            "TrainConfig: recon_weight must lie in [0, 1]");
    require(batch_size >= 1 && batch_size <= dataset_size, ErrorKind::invalid_argument,
            "TrainConfig: batch size must lie in [1, dataset size]");
    require(learning_rate >= 0.0, ErrorKind::invalid_argument,
            "TrainConfig: negative learning rate");
}

ElboResult elbo_loss(const VaeModel& model, const Matrix& batch, double recon_weight,
                     RandomSource& rng) {
    require(batch.rows() >= 1, ErrorKind::invalid_argument, "elbo_loss: empty batch");
    require(batch.cols() == model.data_dim(), ErrorKind::invalid_argument,
            "elbo_loss: dimension mismatch");
    const std::size_t batch_rows = batch.rows();
    const std::size_t latent = model.latent_dim();

    Matrix noise(batch_rows, latent);
    for (double& v : noise.flat()) v = rng.next_gaussian();

    Tape tape;
    std::vector<Tape::Id> param_ids;
    Tape::Id x = tape.input(batch, false);
    Tape::Id enc_out = model.encoder().forward_on(tape, x, param_ids);
    Tape::Id mu = tape.slice_cols(enc_out, 0, latent);
    Tape::Id logvar = tape.slice_cols(enc_out, latent, 2 * latent);
    Tape::Id z = tape.reparameterize(mu, logvar, std::move(noise));
    Tape::Id recon = model.decoder().forward_on(tape, z, param_ids);
    Tape::Id recon_err = tape.mse_mean(recon, batch);
    Tape::Id kl = tape.kl_mean(mu, logvar);
    Tape::Id loss = tape.weighted_sum(recon_err, recon_weight, kl, 1.0 - recon_weight);

    ElboResult result;
    result.loss = tape.scalar(loss);
    result.reconstruction = tape.scalar(recon_err);
    result.kl = tape.scalar(kl);
    require(std::isfinite(result.loss), ErrorKind::numeric, "elbo_loss: non-finite loss");

    tape.backward(loss);
    result.gradient.resize(model.param_count());
    std::size_t pos = 0;
    for (Tape::Id id : param_ids) {
        const Matrix& g = tape.grad(id);
        std::memcpy(result.gradient.data() + pos, g.data(), g.size() * sizeof(double));
        pos += g.size();
    }
    return result;
}

VaeModel make_vae(std::size_t data_dim, const VaeArchitecture& arch, std::uint64_t seed) {
    require(arch.latent_dim >= 1, ErrorKind::invalid_argument, "make_vae: latent_dim must be >= 1");
    MlpSpec enc_spec;
    enc_spec.widths.push_back(data_dim);
    for (std::size_t w : arch.hidden_widths) enc_spec.widths.push_back(w);
    enc_spec.widths.push_back(2 * arch.latent_dim);
    enc_spec.hidden = arch.hidden_activation;
    enc_spec.output = Activation::identity;

    MlpSpec dec_spec;
    dec_spec.widths.push_back(arch.latent_dim);
    for (auto it = arch.hidden_widths.rbegin(); it != arch.hidden_widths.rend(); ++it)
        dec_spec.widths.push_back(*it);
    dec_spec.widths.push_back(data_dim);
    dec_spec.hidden = arch.hidden_activation;
    dec_spec.output = arch.decoder_output;

    RandomSource root(seed);
    RandomSource enc_rng = root.child("init-encoder");
    RandomSource dec_rng = root.child("init-decoder");
    Mlp encoder(enc_spec, enc_rng);
    Mlp decoder(dec_spec, dec_rng);
    return VaeModel(std::move(encoder), std::move(decoder), arch.sigma_x2, seed);
}

TrainResult train_vae(const Matrix& data, const VaeArchitecture& arch, const TrainConfig& cfg) {
    require(data.rows() >= 1, ErrorKind::invalid_argument, "train_vae: empty dataset");
    cfg.validate(data.rows());

    TrainResult result;
    result.model = make_vae(data.cols(), arch, cfg.seed);
    if (cfg.epochs == 0) return result;

    VaeModel& model = result.model;
    std::vector<double> params = model.flatten();
    AdamState adam(params.size(), cfg.learning_rate);
    RandomSource root(cfg.seed);
    RandomSource shuffle_root = root.child("shuffle");
    RandomSource noise_root = root.child("noise");

    const std::size_t n = data.rows();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        RandomSource shuffle_rng = shuffle_root.child(epoch);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            Matrix batch(end - start, data.cols());
            for (std::size_t i = start; i < end; ++i)
                std::memcpy(batch.row(i - start).data(), data.row(order[i]).data(),
                            data.cols() * sizeof(double));
            RandomSource batch_rng = noise_root.child(epoch).child(n_batches);
            ElboResult elbo;
            try {
                elbo = elbo_loss(model, batch, cfg.recon_weight, batch_rng);
            } catch (const VgcError& e) {
                if (e.kind() == ErrorKind::numeric)
                    raise(ErrorKind::numeric,
                          "train_vae: divergence at epoch " + std::to_string(epoch) + ": " +
                              e.what());
                throw;
            }
            adam_step(params, elbo.gradient, adam);
            model.unflatten(params);
            epoch_loss += elbo.loss;
            ++n_batches;
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(n_batches));
    }
    return result;
}

}  // namespace vgc
