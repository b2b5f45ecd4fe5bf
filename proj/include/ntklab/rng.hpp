#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ntklab {

// Deterministic random stream. All sampling goes through the raw 64-bit
// output of mt19937_64 so that identical seeds give bit-identical draws on
// every platform (std::normal_distribution makes no such promise).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform on [0,1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform on [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller; pairs are cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // fair coin as +1/-1
    double sign() { return (engine_() & 1u) ? 1.0 : -1.0; }

    std::uint64_t raw() { return engine_(); }

    // Derive an independent stream for a sweep cell. SplitMix64 scramble of
    // (seed, index) keeps cell streams decorrelated and reproducible.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ntklab
