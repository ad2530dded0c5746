#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace fixprice {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// A single-owner stream of random numbers.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; floating-point and index draws are derived from raw 64-bit words
/// here rather than through <random> distributions so that results are
/// identical across standard library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}

    /// Stream for replicate `index` of a run keyed by `master_seed`. Streams for
    /// different indices are decorrelated and independent of scheduling.
    static RngStream for_replicate(std::uint64_t master_seed, std::uint64_t index) {
        return RngStream(detail::splitmix64(master_seed) ^ detail::splitmix64(~index));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on {0, ..., n-1}; n must be positive.
    std::size_t index_below(std::size_t n) {
        const auto bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return static_cast<std::size_t>(x % bound);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace fixprice
