#pragma once

#include <cstdint>
#include <vector>

#include "wued/error.hpp"
#include "wued/matrix.hpp"

namespace wued {

/// Deterministic 64-bit generator (SplitMix64, Steele et al. 2014).
///
/// The state advances by the golden-gamma constant and each output is a
/// finalising mix of the state, so the value stream depends only on the
/// seed, never on platform or standard-library internals. Identical seed,
/// identical stream, everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform integer in [0, n). Rejection over the smallest covering
    /// power-of-two mask keeps the draw unbiased and portable.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw ArgError("Rng::below: n must be positive");
        std::uint64_t mask = n - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        std::uint64_t v;
        do {
            v = next_u64() & mask;
        } while (v >= n);
        return v;
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Matrix of i.i.d. uniform values in [-limit, limit], drawn row-major.
inline Matrix rng_uniform(Rng& rng, std::size_t rows, std::size_t cols, double limit) {
    if (!(limit > 0.0)) throw ArgError("rng_uniform: limit must be positive");
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = rng.uniform(-limit, limit);
    }
    return out;
}

} // namespace wued
