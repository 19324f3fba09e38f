#include "core/rng.hpp"

#include <cmath>
#include <numbers>

#include "core/errors.hpp"

namespace vgc {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t fnv1a64(const void* bytes, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

RandomSource RandomSource::child(std::uint64_t label) const {
    std::uint64_t sm = seed_;
    std::uint64_t a = splitmix64(sm);
    sm = label ^ 0xA5A5A5A5A5A5A5A5ULL;
    std::uint64_t b = splitmix64(sm);
    std::uint64_t combined = a ^ rotl(b, 17);
    return RandomSource(combined);
}

RandomSource RandomSource::child(std::string_view label) const {
    return child(fnv1a64(label.data(), label.size()));
}

std::uint64_t RandomSource::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RandomSource::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomSource::next_uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RandomSource::next_gaussian() {
    const double u1 = next_uniform_open();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomSource::next_below(std::uint64_t bound) {
    require(bound > 0, ErrorKind::invalid_argument, "next_below: zero bound");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

std::vector<std::size_t> RandomSource::sample_without_replacement(std::size_t n, std::size_t k) {
    require(k <= n, ErrorKind::invalid_argument, "sample_without_replacement: k > n");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

void RandomSource::shuffle(std::span<std::size_t> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

std::uint64_t mix_seed_bytes(std::uint64_t seed, const void* bytes, std::size_t len) {
    std::uint64_t h = fnv1a64(bytes, len);
    std::uint64_t sm = seed ^ rotl(h, 29);
    return splitmix64(sm);
}

std::vector<double> gaussian_sample(RandomSource& rng, std::span<const double> mean,
                                    std::span<const double> std_dev) {
    require(mean.size() == std_dev.size(), ErrorKind::invalid_argument,
            "gaussian_sample: mean/std length mismatch");
    std::vector<double> out(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        require(std_dev[i] >= 0.0, ErrorKind::invalid_argument,
                "gaussian_sample: negative std entry");
        out[i] = mean[i] + std_dev[i] * rng.next_gaussian();
    }
    return out;
}

}  // namespace vgc
