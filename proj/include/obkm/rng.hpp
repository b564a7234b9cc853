#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace obkm {

// Sub-seed derivation stream (Steele, Lea & Flood's SplitMix64). Used wherever
// one user-facing seed has to fan out into several independent seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Seeded random source with pinned sampling algorithms. The generator is
// std::mt19937_64 (fully specified by the standard, so the raw stream is
// identical everywhere); the transforms are fixed here rather than delegated
// to std::*_distribution<>, whose algorithms are implementation-defined:
//
//   - unit uniforms take the top 53 bits of one output: (x >> 11) * 2^-53
//   - normal(mean, std) is the trigonometric Box-Muller transform; values are
//     produced in pairs and the second one is cached
//   - gamma(shape, scale) is Marsaglia-Tsang's squeeze method for shape >= 1,
//     boosted via gamma(shape+1) * u^(1/shape) for shape < 1
//   - bounded integers use the modulo reduction of one raw output
//
// Every helper consumes a documented number of raw outputs (normal: 2 per
// pair; gamma: variable, rejection-based), so streams replay exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // (0, 1]
    double next_unit_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // [0, bound)
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::next_below: zero bound");
        return next_u64() % bound;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    double normal(double mean, double stddev) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + stddev * (r * std::cos(theta));
    }

    double gamma(double shape, double scale) {
        if (shape <= 0.0 || scale <= 0.0)
            throw std::invalid_argument("Rng::gamma: shape and scale must be positive");
        if (shape < 1.0) {
            const double g = gamma_shape_ge1(shape + 1.0);
            const double u = next_unit_open();
            return scale * g * std::pow(u, 1.0 / shape);
        }
        return scale * gamma_shape_ge1(shape);
    }

private:
    double gamma_shape_ge1(double shape) {
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal(0.0, 1.0);
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_unit_open();
            if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace obkm
