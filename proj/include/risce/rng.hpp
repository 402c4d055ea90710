// risce - RIS-aided mmWave MIMO channel estimation and simulation library
// Copyright (C) 2026 The risce authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RISCE_RNG_HPP
#define RISCE_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace risce
{

namespace detail
{
// SplitMix64 finalizer, used to derive well-separated child seeds
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
} // namespace detail

// Seeded random stream with a deterministic hierarchical substream scheme.
// All distributions are built from the raw 64-bit output of std::mt19937_64,
// so identical seeds give identical draws on every standard library.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(detail::splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    // Independent child stream; (seed, id) -> child seed is a fixed bijective mix
    Rng child(std::uint64_t id) const
    {
        return Rng(detail::splitmix64(seed_ ^ detail::splitmix64(id + 0x632BE59BD9B4E019ULL)));
    }

    // Uniform on [0, 1) with 53-bit resolution
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on (lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller (cosine branch; both uniforms consumed)
    double gaussian()
    {
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 0.0)
            u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Circularly symmetric complex normal CN(0, var)
    std::complex<double> cgaussian(double var = 1.0)
    {
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 0.0)
            u1 = uniform01();
        double r = std::sqrt(-var * std::log(u1));
        double ph = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(ph), r * std::sin(ph)};
    }

    // Unit-modulus complex value with uniform phase
    std::complex<double> unit_phase()
    {
        double ph = 2.0 * std::numbers::pi * uniform01();
        return {std::cos(ph), std::sin(ph)};
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace risce

#endif
