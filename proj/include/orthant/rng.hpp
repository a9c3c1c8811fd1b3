#pragma once

#include <cstdint>

namespace orthant {

/**
 * Counter-based SplitMix64 stream.  Each draw hashes an incrementing counter
 * through the SplitMix64 finalizer, so a stream is a pure function of its
 * initial state: there is no hidden large state and streams can be created
 * cheaply anywhere.
 *
 * Simulation replicates use `replicate_stream(seed, replicate)`, which
 * derives the stream state by hashing the pair (seed, replicate).  Replicate
 * r therefore produces the same bytes no matter which thread runs it or in
 * which order replicates are scheduled — the basis of the thread-count
 * independence guarantee for all Monte Carlo output.
 */
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    std::uint64_t operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection (unbiased).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (~bound + 1) % bound; // 2^64 mod bound
        for (;;) {
            std::uint64_t r = (*this)();
            if (r >= threshold)
                return r % bound;
        }
    }

private:
    std::uint64_t state_;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/**
 * The stream for one simulation replicate: state = mix(mix(seed) ^ golden *
 * (replicate + 1)).  Distinct (seed, replicate) pairs map to distinct states
 * in practice; consecutive replicates are decorrelated by the double mix.
 */
inline SplitMix64 replicate_stream(std::uint64_t seed, std::uint64_t replicate) {
    std::uint64_t h = detail::mix64(seed);
    h = detail::mix64(h ^ (0x9e3779b97f4a7c15ULL * (replicate + 1)));
    return SplitMix64(h);
}

} // namespace orthant
