#pragma once

#include <cstdint>
#include <limits>

#include "merton/normal.hpp"

namespace merton {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Seed for child stream `index` of `seed`. Used to give every replica,
/// path and chain its own independent generator.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed ^ 0x6a09e667f3bcc909ull) + mix64(index + 0x9e3779b97f4a7c15ull));
}

/*!
 * Counter-based generator: the j-th output of stream (seed, stream) is a
 * hash of (key, j) and depends on nothing else, so draws for path i are the
 * same whichever thread produces them and in whatever order.
 *
 * Satisfies UniformRandomBitGenerator.
 */
class CounterRng {
  public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(derive_seed(seed, stream)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ull);
    }

    /// Uniform on the open interval (0,1) with 53-bit resolution.
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by inversion, one uniform per draw.
    double normal() noexcept { return std_normal_quantile_as241(uniform()); }

    std::uint64_t counter() const noexcept { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace merton
