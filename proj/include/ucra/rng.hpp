#pragma once

// Deterministic random stream used by the channel model and the Monte Carlo
// oracles.  All distributions are derived from raw mt19937_64 output through
// fixed arithmetic (no std::*_distribution, whose draw counts vary across
// standard library implementations), so a seed pins the exact sequence on
// every platform.

#include <cmath>
#include <cstdint>
#include <random>

namespace ucra {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes two uniforms per pair and
    // caches the second value so draw order stays fixed.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        double a = 2.0 * pi_ * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Exponential with the given mean (inverse CDF).
    double exponential(double mean) {
        return -mean * std::log1p(-uniform());
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t raw() { return gen_(); }

private:
    static constexpr double pi_ = 3.14159265358979323846;
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace ucra
