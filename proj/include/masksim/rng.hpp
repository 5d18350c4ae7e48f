#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace masksim {

namespace detail {

// SplitMix64 finalizer; used to mix stream tags into seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// One pseudo-random stream. Distribution helpers are hand-rolled on top of
/// the raw mt19937_64 output so that draws are identical across standard
/// library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) via rejection (bound > 0).
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Geometric number of trials until first success, support {1, 2, ...}.
    std::uint64_t geometric_trials(double p) {
        if (p >= 1.0) return 1;
        if (p <= 0.0) throw std::invalid_argument("geometric_trials: p must be > 0");
        const double u = 1.0 - uniform(); // in (0, 1]
        return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
    }

    /// Poisson draw by Knuth multiplication, chunked so large means do not
    /// underflow exp(-lambda).
    std::uint64_t poisson(double lambda) {
        std::uint64_t total = 0;
        while (lambda > 30.0) {
            total += poisson_small(30.0);
            lambda -= 30.0;
        }
        return total + poisson_small(lambda);
    }

    /// Fisher-Yates draw of k distinct indices from [0, n).
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k) {
        std::vector<std::uint32_t> pool(n);
        for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
        for (std::uint32_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::uint32_t>(uniform_below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::uint64_t poisson_small(double lambda) {
        if (lambda <= 0.0) return 0;
        const double threshold = std::exp(-lambda);
        std::uint64_t k = 0;
        double prod = uniform();
        while (prod > threshold) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    std::mt19937_64 engine_;
};

/// Derives independent, reproducible sub-streams from one master seed.
/// Streams are keyed by a purpose tag plus integer coordinates (replicate,
/// day, trial, ...), so any stream can be reconstructed in isolation.
class RngFactory {
public:
    explicit RngFactory(std::uint64_t master_seed) : master_(master_seed) {}

    std::uint64_t master_seed() const { return master_; }

    RngStream stream(std::uint64_t purpose, std::uint64_t a = 0, std::uint64_t b = 0) const {
        std::uint64_t h = detail::mix64(master_ ^ detail::mix64(purpose));
        h = detail::mix64(h ^ detail::mix64(a));
        h = detail::mix64(h ^ detail::mix64(b));
        return RngStream(h);
    }

private:
    std::uint64_t master_;
};

/// Stream purpose tags. Fixed values are part of the reproducibility
/// contract: changing them changes every output.
namespace streams {
inline constexpr std::uint64_t graph_gen = 1;
inline constexpr std::uint64_t rewire = 2;
inline constexpr std::uint64_t outbreak = 3;
inline constexpr std::uint64_t init_masks = 4;
inline constexpr std::uint64_t network_transmission = 5;
inline constexpr std::uint64_t mixing_transmission = 6;
inline constexpr std::uint64_t progression = 7;
inline constexpr std::uint64_t decision = 8;
inline constexpr std::uint64_t r0_trial = 9;
} // namespace streams

} // namespace masksim
