#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>

namespace optrf {

/// Seeded random stream with a pinned bit-level contract.
///
/// All randomness in the library flows through this wrapper so that seeded
/// runs are byte-identical across platforms: mt19937_64 output is fixed by
/// the standard, and the uniform-double and categorical draws below avoid
/// the implementation-defined std::*_distribution adapters.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("RandomStream::next_below: n must be positive");
        // rejection keeps the draw exactly uniform
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / n * n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    /// Inverse-CDF draw from a probability vector (tolerates unnormalized input).
    std::size_t next_categorical(std::span<const double> probs) {
        double total = 0.0;
        for (double p : probs) total += p;
        const double u = next_unit() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size() - 1;  // roundoff: land on the final cell
    }

    /// Independent stream for a tagged sub-task of this stream's seed.
    RandomStream split(std::uint64_t tag) const { return RandomStream(mix(seed_ ^ mix(tag))); }

    /// splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Derived seed for (root seed, tag) pairs.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag) {
    return RandomStream::mix(root ^ RandomStream::mix(tag));
}

}  // namespace optrf
