#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random number generation. Every variate is a pure
// function of (seed, stream, counter), so any draw can be reconstructed
// in isolation and parallel consumers see identical values regardless of
// scheduling.

namespace rph {

namespace detail {

/// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Raw 64 random bits for (seed, stream, counter).
inline std::uint64_t rng_bits(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter) {
    std::uint64_t h = detail::mix64(seed ^ 0xd1b54a32d192ed03ull);
    h = detail::mix64(h + stream);
    return detail::mix64(h + counter);
}

/// Uniform double in the open interval (0, 1).
inline double rng_uniform(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter) {
    return (static_cast<double>(rng_bits(seed, stream, counter) >> 11) + 0.5) *
           0x1.0p-53;
}

/// Standard normal variate at a fixed index of a stream (Box-Muller;
/// variates are generated in pairs sharing two uniforms).
inline double rng_normal_at(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t index) {
    const std::uint64_t pair = index >> 1;
    const double u1 = rng_uniform(seed, stream, 2 * pair);
    const double u2 = rng_uniform(seed, stream, 2 * pair + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return (index & 1) ? r * std::sin(t) : r * std::cos(t);
}

/// Sequential view over one (seed, stream) gaussian stream.
class GaussianSource {
public:
    GaussianSource(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = rng_uniform(seed_, stream_, counter_++);
        const double u2 = rng_uniform(seed_, stream_, counter_++);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    double uniform() { return rng_uniform(seed_, stream_, counter_++); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Derives a child seed for a labelled substream (e.g. one trial).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label,
                                 std::uint64_t purpose = 0) {
    return rng_bits(seed, label, purpose);
}

}  // namespace rph
