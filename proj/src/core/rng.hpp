#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace vgc {

// Splittable, seeded random source. The generator is xoshiro256++ seeded
// through splitmix64, so draw sequences are identical across platforms and
// independent of the standard library.
//
// Child streams are derived from the construction seed and a label, never
// from the current draw state. Deriving the same child twice, in any order
// and after any number of draws, yields the same stream.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    RandomSource child(std::uint64_t label) const;
    RandomSource child(std::string_view label) const;

    std::uint64_t next_u64();
    // Uniform on [0, 1).
    double next_uniform();
    // Uniform on (0, 1]; safe as a log() argument.
    double next_uniform_open();
    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double next_gaussian();
    // Uniform integer in [0, bound) without modulo bias.
    std::uint64_t next_below(std::uint64_t bound);

    // Random k-subset of {0..n-1}, uniform without replacement.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
    void shuffle(std::span<std::size_t> items);

private:
    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> s_{};
};

// Combines a seed with raw bytes into a new stream seed. Used to derive
// per-point streams that depend on the point's value rather than its
// position, so dataset-level maps commute with row permutations.
std::uint64_t mix_seed_bytes(std::uint64_t seed, const void* bytes, std::size_t len);

// mean + std (elementwise) * standard normal draws. std entries must be >= 0.
std::vector<double> gaussian_sample(RandomSource& rng, std::span<const double> mean,
                                    std::span<const double> std_dev);

}  // namespace vgc
