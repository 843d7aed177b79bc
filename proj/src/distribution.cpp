#include "qsbs/distribution.hpp"

#include "qsbs/rng.hpp"
#include "qsbs/smn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qsbs {

double gamma_alpha(double alpha, double y_q) {
    const double ay = alpha * y_q;
    return ay + std::sqrt(ay * ay + 4.0);
}

double gamma_alpha_prime(double alpha, double y_q) {
    const double ay = alpha * y_q;
    return y_q + alpha * y_q * y_q / std::sqrt(ay * ay + 4.0);
}

QsbsDistribution::QsbsDistribution(double alpha, double quantile_value, double quantile_level,
                                   MixtureFamily family)
    : alpha_(alpha),
      quantile_value_(quantile_value),
      quantile_level_(quantile_level),
      family_(family) {
    if (!(alpha > 0.0)) throw std::invalid_argument("shape alpha must be positive");
    if (!(quantile_value > 0.0)) throw std::invalid_argument("quantile value must be positive");
    if (!(quantile_level > 0.0 && quantile_level < 1.0))
        throw std::invalid_argument("quantile level must lie in (0,1)");
    family_.validate();
    y_q_ = smn_quantile(quantile_level_, family_);
    gamma_alpha_ = qsbs::gamma_alpha(alpha_, y_q_);
}

double QsbsDistribution::a_of_t(double t) const {
    if (!(t > 0.0)) throw std::domain_error("support is t > 0");
    const double g2 = gamma_alpha_ * gamma_alpha_;
    return std::sqrt(4.0 * quantile_value_ / t) * (g2 * t / (4.0 * quantile_value_) - 1.0) /
           (alpha_ * gamma_alpha_);
}

double QsbsDistribution::a_deriv(double t) const {
    if (!(t > 0.0)) throw std::domain_error("support is t > 0");
    const double g2 = gamma_alpha_ * gamma_alpha_;
    return (0.5 * g2 + 2.0 * quantile_value_ / t) /
           (alpha_ * gamma_alpha_ * std::sqrt(4.0 * quantile_value_ * t));
}

double QsbsDistribution::pdf(double t) const { return smn_pdf(a_of_t(t), family_) * a_deriv(t); }

double QsbsDistribution::log_pdf(double t) const {
    return smn_log_pdf(a_of_t(t), family_) + std::log(a_deriv(t));
}

double QsbsDistribution::cdf(double t) const { return smn_cdf(a_of_t(t), family_); }

double QsbsDistribution::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile level must lie in (0,1)");
    const double y = smn_quantile(p, family_);
    const double ay = alpha_ * y;
    const double root = ay + std::sqrt(ay * ay + 4.0);
    return quantile_value_ / (gamma_alpha_ * gamma_alpha_) * root * root;
}

std::vector<double> qsbs_sample(std::size_t n, const QsbsDistribution& dist, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    const double scale = dist.quantile_value() / (dist.gamma_alpha() * dist.gamma_alpha());
    for (std::size_t i = 0; i < n; ++i) {
        const double g = rng.mixing_scale(dist.family());
        const double w = dist.alpha() * std::sqrt(g) * rng.normal();
        const double root = w + std::sqrt(w * w + 4.0);
        out[i] = scale * root * root;
    }
    return out;
}

double mixing_moment(const MixtureFamily& family, int r) {
    if (r == 0) return 1.0;
    switch (family.kind) {
        case Kind::Normal:
            return 1.0;
        case Kind::ContaminatedNormal:
            return family.nu * std::pow(family.delta, -r) + (1.0 - family.nu);
        case Kind::Slash:
            if (!(family.nu > r))
                throw std::domain_error("slash mixing moment of order " + std::to_string(r) +
                                        " requires nu > " + std::to_string(r));
            return family.nu / (family.nu - r);
        case Kind::StudentT:
            if (!(family.nu > 2.0 * r))
                throw std::domain_error("student-t mixing moment of order " + std::to_string(r) +
                                        " requires nu > " + std::to_string(2 * r));
            return std::pow(0.5 * family.nu, r) *
                   std::exp(std::lgamma(0.5 * family.nu - r) - std::lgamma(0.5 * family.nu));
    }
    return 1.0;
}

namespace {

double binomial(int n, int k) {
    double v = 1.0;
    for (int j = 1; j <= k; ++j) v *= static_cast<double>(n - k + j) / j;
    return v;
}

// E[(T / beta)^k] with beta = 4Q/gamma^2, expanding the stochastic
// representation: 4^k (T/beta)^k = sum_i C(2k,2i) W^{2i} (W^2+4)^{k-i} with
// W = alpha sqrt(1/U) Z, whose even moments are
// E[W^{2m}] = alpha^{2m} * omega_m * (2m-1)!!.
double scaled_raw_moment(const QsbsDistribution& dist, int k) {
    const MixtureFamily& family = dist.family();
    const double alpha = dist.alpha();
    double even_moment[16];
    double dfact = 1.0;  // (2m-1)!!
    for (int m = 0; m <= k; ++m) {
        if (m > 0) dfact *= 2 * m - 1;
        even_moment[m] = std::pow(alpha, 2 * m) * mixing_moment(family, m) * dfact;
    }
    double total = 0.0;
    for (int i = 0; i <= k; ++i) {
        for (int l = 0; l <= k - i; ++l) {
            total += binomial(2 * k, 2 * i) * binomial(k - i, l) *
                     std::pow(4.0, k - i - l) * even_moment[i + l];
        }
    }
    return total / std::pow(4.0, k);
}

}  // namespace

double qsbs_raw_moment(const QsbsDistribution& dist, int k) {
    if (k < 1 || k > 8) throw std::domain_error("raw moment order must lie in 1..8");
    const double beta = 4.0 * dist.quantile_value() / (dist.gamma_alpha() * dist.gamma_alpha());
    return std::pow(beta, k) * scaled_raw_moment(dist, k);
}

Moments qsbs_moments(const QsbsDistribution& dist, int k_max) {
    if (k_max < 4) throw std::domain_error("k_max must be at least 4");
    Moments m;
    m.raw.resize(k_max);
    for (int k = 1; k <= k_max; ++k) m.raw[k - 1] = qsbs_raw_moment(dist, k);

    const double mu = m.raw[0];
    const double mu2 = m.raw[1] - mu * mu;
    const double mu3 = m.raw[2] - 3.0 * mu * m.raw[1] + 2.0 * mu * mu * mu;
    const double mu4 =
        m.raw[3] - 4.0 * mu * m.raw[2] + 6.0 * mu * mu * m.raw[1] - 3.0 * std::pow(mu, 4);

    m.mean = mu;
    m.variance = mu2;
    m.cv = std::sqrt(mu2) / mu;
    m.skewness = mu3 / std::pow(mu2, 1.5);
    m.kurtosis_excess = mu4 / (mu2 * mu2) - 3.0;
    return m;
}

}  // namespace qsbs
