#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace betamm {

// Thin wrapper over mt19937_64 with hand-rolled transforms, so that streams
// are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), rejection-sampled.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do x = eng_();
        while (x >= limit);
        return x % n;
    }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    bool bernoulli(double p) { return uniform() < p; }

    // Shifted geometric on {1, 2, ...} with the given mean (>= 1).
    std::int64_t geometric(double mean) {
        if (mean <= 1.0) return 1;
        const double q = 1.0 - 1.0 / mean;
        return 1 + static_cast<std::int64_t>(std::floor(std::log1p(-uniform()) / std::log(q)));
    }

private:
    std::mt19937_64 eng_;
};

// Derives independent stream seeds from a master seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
    return mix_seed(mix_seed(a) ^ (b * 0xd1b54a32d192ed03ULL));
}

}  // namespace betamm
