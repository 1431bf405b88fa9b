#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace ppinv {

// Counter-based stream: output k of stream (seed, stream_id) is a pure
// function of (seed, stream_id, k), so identical keys reproduce identical
// sequences on every platform and streams can be handed to workers without
// coordination.  The mixer is the splitmix64 finalizer.
inline constexpr const char* rng_algorithm_id = "splitmix64-ctr/v1";

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

class rng_stream {
public:
    rng_stream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id),
          base_(detail::mix64(seed + 0x9E3779B97F4A7C15ull * detail::mix64(stream_id + 1))) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        ++counter_;
        return detail::mix64(base_ + counter_ * 0x9E3779B97F4A7C15ull);
    }

    // Uniform in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1); safe under log().
    double uniform_open() {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return u;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Poisson count by Knuth's product method; means above 30 are split into
    // chunks so the exp() product stays well-scaled.
    long poisson(double lambda) {
        long total = 0;
        while (lambda > 30.0) {
            total += poisson_small(30.0);
            lambda -= 30.0;
        }
        return total + poisson_small(lambda);
    }

private:
    long poisson_small(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        double prod = 1.0;
        long k = 0;
        for (;;) {
            prod *= uniform_open();
            if (prod <= limit) return k;
            ++k;
        }
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

} // namespace ppinv
