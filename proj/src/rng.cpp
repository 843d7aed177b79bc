#include "qsbs/rng.hpp"

#include "qsbs/smn.hpp"

#include <cmath>

namespace qsbs {

double Rng::normal() { return normal_quantile(uniform()); }

double Rng::gamma(double shape, double rate) {
    if (shape < 1.0) {
        // Boost the shape and correct with a uniform power.
        const double u = uniform();
        return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
    }
}

double Rng::mixing_scale(const MixtureFamily& family) {
    switch (family.kind) {
        case Kind::Normal:
            return 1.0;
        case Kind::ContaminatedNormal:
            return uniform() < family.nu ? 1.0 / family.delta : 1.0;
        case Kind::Slash:
            // U = V^(1/nu) with V uniform, so 1/U = V^(-1/nu).
            return std::pow(uniform(), -1.0 / family.nu);
        case Kind::StudentT:
            return 1.0 / gamma(0.5 * family.nu, 0.5 * family.nu);
    }
    return 1.0;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over the combined words.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace qsbs
