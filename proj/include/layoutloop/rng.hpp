// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace layoutloop
{

/// mt19937_64 with hand-rolled distributions, so streams are identical across standard libraries.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed): _engine(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(_engine() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    bool bernoulli(double p) { return uniform() < p; }

    /// Box-Muller; one draw per call (the paired value is discarded for simplicity of replay).
    double normal(double mean = 0.0, double stddev = 1.0)
    {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : static_cast<std::uint64_t>(uniform() * n); }

    std::uint64_t bits() { return _engine(); }

  private:
    std::mt19937_64 _engine;
};

/// Stream seed for one document: splitmix64 over the base seed mixed with FNV-1a of the id.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view id)
{
    std::uint64_t h = 1469598103934665603ull;
    for (char c: id)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace layoutloop
