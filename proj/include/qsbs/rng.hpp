#pragma once

#include "qsbs/family.hpp"

#include <cstdint>
#include <random>

namespace qsbs {

/// Deterministic random source. All draws are built from the raw mt19937_64
/// output stream, so a given seed yields identical sequences on every
/// platform (std::normal_distribution and friends are deliberately avoided).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0,1).
    double uniform() {
        const std::uint64_t bits = engine_() >> 11;  // top 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double normal();

    /// Gamma(shape, rate) via Marsaglia-Tsang squeeze.
    double gamma(double shape, double rate);

    /// One draw of the variance inflation factor 1/U for the given family.
    double mixing_scale(const MixtureFamily& family);

  private:
    std::mt19937_64 engine_;
};

/// Mixes (seed, index) into an independent stream seed so that parallel
/// replications are reproducible regardless of execution order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace qsbs
