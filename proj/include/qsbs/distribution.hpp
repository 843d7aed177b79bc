#pragma once

#include "qsbs/family.hpp"

#include <cstdint>
#include <vector>

namespace qsbs {

double gamma_alpha(double alpha, double y_q);
double gamma_alpha_prime(double alpha, double y_q);

/// One quantile-parameterized law: `quantile_value` is the 100*level-th
/// quantile of the distribution, `alpha` the shape, `family` the kernel.
/// Immutable after construction; y_q and gamma_alpha are cached.
class QsbsDistribution {
  public:
    QsbsDistribution(double alpha, double quantile_value, double quantile_level,
                     MixtureFamily family);

    double alpha() const { return alpha_; }
    double quantile_value() const { return quantile_value_; }
    double quantile_level() const { return quantile_level_; }
    const MixtureFamily& family() const { return family_; }
    double y_q() const { return y_q_; }
    double gamma_alpha() const { return gamma_alpha_; }

    /// Standardizing transform a(t) and its derivative da/dt, both on t > 0.
    double a_of_t(double t) const;
    double a_deriv(double t) const;

    double pdf(double t) const;
    double log_pdf(double t) const;
    double cdf(double t) const;
    double quantile(double p) const;

  private:
    double alpha_;
    double quantile_value_;
    double quantile_level_;
    MixtureFamily family_;
    double y_q_;
    double gamma_alpha_;
};

/// n independent draws via the stochastic representation
/// T = (Q/gamma^2) [alpha sqrt(g) Z + sqrt((alpha sqrt(g) Z)^2 + 4)]^2.
std::vector<double> qsbs_sample(std::size_t n, const QsbsDistribution& dist, std::uint64_t seed);

/// r-th moment of the variance inflation factor 1/U. Throws when the moment
/// does not exist (slash needs nu > r, Student-t needs nu > 2r).
double mixing_moment(const MixtureFamily& family, int r);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double cv = 0.0;
    double skewness = 0.0;
    double kurtosis_excess = 0.0;
    std::vector<double> raw;  // raw[k-1] = E[T^k], k = 1..k_max
};

/// Closed-form moments from the even moments of the kernel. k_max >= 4 is
/// required for the shape coefficients.
Moments qsbs_moments(const QsbsDistribution& dist, int k_max = 4);

/// Raw moment E[T^k] alone (used when higher moments do not exist).
double qsbs_raw_moment(const QsbsDistribution& dist, int k);

}  // namespace qsbs
