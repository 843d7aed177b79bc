#include "qsbs/smn.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qsbs {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kSqrtTwoPi = 2.5066282746310005024;

void require_finite(double y) {
    if (!std::isfinite(y)) throw std::domain_error("non-finite argument");
}

// nu * u^(nu - 1/2) * phi(y * sqrt(u)) on u in (0,1].
double slash_pdf_integrand(double u, double y, double nu) {
    return nu * std::pow(u, nu - 0.5) * normal_pdf(y * std::sqrt(u));
}

double slash_cdf_integrand(double u, double y, double nu) {
    return nu * std::pow(u, nu - 1.0) * normal_cdf(y * std::sqrt(u));
}

template <typename F>
double slash_quadrature(F integrand) {
    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    double value = gauss_kronrod<double, 15>::integrate(integrand, 0.0, 1.0, 15, 1e-12, &error);
    if (!std::isfinite(value) || error > 1e-8)
        throw std::runtime_error("slash quadrature failed to converge (error estimate " +
                                 std::to_string(error) + ")");
    return value;
}

}  // namespace

double normal_pdf(double y) { return std::exp(-0.5 * y * y) / kSqrtTwoPi; }

double normal_log_pdf(double y) { return -0.5 * y * y - 0.5 * kLogTwoPi; }

double normal_cdf(double y) { return 0.5 * std::erfc(-y / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile level must lie in (0,1)");
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double regularized_gamma_cdf(double x, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw std::domain_error("gamma parameters must be positive");
    if (!(x >= 0.0)) throw std::domain_error("gamma CDF argument must be nonnegative");
    return boost::math::gamma_p(shape, rate * x);
}

double smn_pdf(double y, const MixtureFamily& family) {
    require_finite(y);
    family.validate();
    switch (family.kind) {
        case Kind::Normal:
            return normal_pdf(y);
        case Kind::ContaminatedNormal: {
            const double root_delta = std::sqrt(family.delta);
            return family.nu * root_delta * normal_pdf(root_delta * y) +
                   (1.0 - family.nu) * normal_pdf(y);
        }
        case Kind::Slash:
            return slash_quadrature(
                [&](double u) { return slash_pdf_integrand(u, y, family.nu); });
        case Kind::StudentT:
            return boost::math::pdf(boost::math::students_t(family.nu), y);
    }
    return 0.0;
}

double smn_log_pdf(double y, const MixtureFamily& family) {
    require_finite(y);
    family.validate();
    switch (family.kind) {
        case Kind::Normal:
            return normal_log_pdf(y);
        case Kind::ContaminatedNormal: {
            const double la = std::log(family.nu) + 0.5 * std::log(family.delta) +
                              normal_log_pdf(std::sqrt(family.delta) * y);
            const double lb = std::log1p(-family.nu) + normal_log_pdf(y);
            const double m = std::max(la, lb);
            return m + std::log(std::exp(la - m) + std::exp(lb - m));
        }
        case Kind::Slash: {
            // nu/sqrt(2pi) * Gamma(nu+1/2) * P(nu+1/2, y^2/2) / (y^2/2)^(nu+1/2)
            const double s = family.nu + 0.5;
            const double x = 0.5 * y * y;
            if (x < 1e-200) return std::log(family.nu / s) - 0.5 * kLogTwoPi;
            return std::log(family.nu) - 0.5 * kLogTwoPi + std::lgamma(s) +
                   std::log(boost::math::gamma_p(s, x)) - s * std::log(x);
        }
        case Kind::StudentT: {
            const double nu = family.nu;
            return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                   0.5 * std::log(nu * M_PI) - 0.5 * (nu + 1.0) * std::log1p(y * y / nu);
        }
    }
    return -std::numeric_limits<double>::infinity();
}

double smn_cdf(double y, const MixtureFamily& family) {
    require_finite(y);
    family.validate();
    switch (family.kind) {
        case Kind::Normal:
            return normal_cdf(y);
        case Kind::ContaminatedNormal:
            return family.nu * normal_cdf(std::sqrt(family.delta) * y) +
                   (1.0 - family.nu) * normal_cdf(y);
        case Kind::Slash: {
            // Exploit symmetry so the quadrature only sees the lower tail,
            // where the integrand stays well scaled.
            if (y > 0.0) return 1.0 - smn_cdf(-y, family);
            if (y == 0.0) return 0.5;
            double v = slash_quadrature(
                [&](double u) { return slash_cdf_integrand(u, y, family.nu); });
            return std::min(std::max(v, 0.0), 1.0);
        }
        case Kind::StudentT:
            return boost::math::cdf(boost::math::students_t(family.nu), y);
    }
    return 0.0;
}

double smn_quantile(double p, const MixtureFamily& family) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile level must lie in (0,1)");
    family.validate();
    switch (family.kind) {
        case Kind::Normal:
            return normal_quantile(p);
        case Kind::StudentT:
            return boost::math::quantile(boost::math::students_t(family.nu), p);
        case Kind::ContaminatedNormal:
        case Kind::Slash:
            break;
    }

    // Expanding bracket followed by a bisection/secant hybrid. The CDF is
    // strictly increasing, so once the bracket straddles p convergence is
    // guaranteed.
    double lo = -1.0, hi = 1.0;
    double flo = smn_cdf(lo, family), fhi = smn_cdf(hi, family);
    while (flo > p) {
        hi = lo;
        fhi = flo;
        lo *= 2.0;
        flo = smn_cdf(lo, family);
        if (lo < -1e12) throw std::runtime_error("quantile bracket expansion failed (lower)");
    }
    while (fhi < p) {
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = smn_cdf(hi, family);
        if (hi > 1e12) throw std::runtime_error("quantile bracket expansion failed (upper)");
    }

    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(x)); ++iter) {
        // Secant proposal, clipped to the current bracket interior.
        double xs = (fhi > flo)
                        ? lo + (p - flo) * (hi - lo) / (fhi - flo)
                        : 0.5 * (lo + hi);
        const double margin = 0.01 * (hi - lo);
        if (!(xs > lo + margin && xs < hi - margin)) xs = 0.5 * (lo + hi);
        const double fs = smn_cdf(xs, family);
        if (fs < p) {
            lo = xs;
            flo = fs;
        } else {
            hi = xs;
            fhi = fs;
        }
        x = 0.5 * (lo + hi);
    }
    return x;
}

}  // namespace qsbs
