#pragma once

#include <cstdint>
#include <random>

namespace surreal {

// Seeded random stream. One instance per training run or generator call;
// never shared between threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform on (0, 1).
    double uniform_open()
    {
        double u = uniform();
        while (u == 0.0) {
            u = uniform();
        }
        return u;
    }

    double normal(double mean, double stddev) { return mean + stddev * standard_normal_(engine_); }

    std::uint64_t next() { return engine_(); }

    // Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> standard_normal_{0.0, 1.0};
};

}  // namespace surreal
