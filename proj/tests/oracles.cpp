#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracles {

namespace {

double simpson_rule(const Fn& f, double a, double fa, double b, double fb, double* fm) {
    const double m = 0.5 * (a + b);
    *fm = f(m);
    return (b - a) / 6.0 * (fa + 4.0 * *fm + fb);
}

double simpson_recurse(const Fn& f, double a, double fa, double b, double fb, double m,
                       double fm, double whole, double tol, int depth) {
    double flm, frm;
    const double left = simpson_rule(f, a, fa, m, fm, &flm);
    const double right = simpson_rule(f, m, fm, b, fb, &frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_recurse(f, a, fa, m, fm, 0.5 * (a + m), flm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, fm, b, fb, 0.5 * (m + b), frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const Fn& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b);
    double fm;
    const double whole = simpson_rule(f, a, fa, b, fb, &fm);
    return simpson_recurse(f, a, fa, b, fb, 0.5 * (a + b), fm, whole, tol, 48);
}

double integrate_real_line(const Fn& f, double tol) {
    const double half_pi = std::asin(1.0);
    auto transformed = [&](double u) {
        const double c = std::cos(u);
        if (c < 1e-154) return 0.0;
        const double t = std::tan(u);
        const double v = f(t) / (c * c);
        return std::isfinite(v) ? v : 0.0;
    };
    return adaptive_simpson(transformed, -half_pi + 1e-12, half_pi - 1e-12, tol);
}

double integrate_positive_line(const Fn& f, double tol) {
    auto transformed = [&](double x) {
        const double t = std::exp(x);
        const double v = f(t) * t;
        return std::isfinite(v) ? v : 0.0;
    };
    // exp(+-700) covers the full double range of t.
    return adaptive_simpson(transformed, -700.0, 700.0, tol);
}

double bisect(const Fn& g, double target, double lo, double hi, double tol) {
    double flo = g(lo), fhi = g(hi);
    if (!(flo <= target && target <= fhi)) throw std::runtime_error("bisect: target not bracketed");
    for (int i = 0; i < 400 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = g(mid);
        if (fm < target) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return 0.5 * (lo + hi);
}

double central_difference(const Fn& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

double posterior_weight(double a, const qsbs::MixtureFamily& family) {
    using qsbs::Kind;
    const double half_a2 = 0.5 * a * a;
    switch (family.kind) {
        case Kind::Normal:
            return 1.0;
        case Kind::ContaminatedNormal: {
            // Discrete posterior over {delta, 1}.
            const double w_delta =
                family.nu * std::sqrt(family.delta) * std::exp(-family.delta * half_a2);
            const double w_one = (1.0 - family.nu) * std::exp(-half_a2);
            return (family.delta * w_delta + w_one) / (w_delta + w_one);
        }
        case Kind::Slash: {
            auto numer = [&](double u) {
                return std::pow(u, family.nu + 0.5) * std::exp(-u * half_a2);
            };
            auto denom = [&](double u) {
                return std::pow(u, family.nu - 0.5) * std::exp(-u * half_a2);
            };
            return adaptive_simpson(numer, 0.0, 1.0, 1e-14) /
                   adaptive_simpson(denom, 0.0, 1.0, 1e-14);
        }
        case Kind::StudentT: {
            const double shape = 0.5 * family.nu;
            auto density = [&](double u) {
                return std::pow(u, shape - 1.0) * std::exp(-shape * u - u * half_a2);
            };
            auto numer = [&](double u) { return u * std::sqrt(u) * density(u) * std::exp(-0.0); };
            auto denom = [&](double u) { return std::sqrt(u) * density(u); };
            return integrate_positive_line(numer, 1e-14) / integrate_positive_line(denom, 1e-14);
        }
    }
    return 1.0;
}

double mixing_moment(const qsbs::MixtureFamily& family, int r) {
    using qsbs::Kind;
    switch (family.kind) {
        case Kind::Normal:
            return 1.0;
        case Kind::ContaminatedNormal:
            return family.nu * std::pow(family.delta, -r) + (1.0 - family.nu);
        case Kind::Slash: {
            auto f = [&](double u) { return family.nu * std::pow(u, family.nu - 1.0 - r); };
            return adaptive_simpson(f, 1e-12, 1.0, 1e-13);
        }
        case Kind::StudentT: {
            const double shape = 0.5 * family.nu;
            const double norm = std::pow(shape, shape) / std::tgamma(shape);
            auto f = [&](double u) {
                return norm * std::pow(u, shape - 1.0 - r) * std::exp(-shape * u);
            };
            return integrate_positive_line(f, 1e-13);
        }
    }
    return 1.0;
}

double ks_statistic(const std::vector<double>& sorted_draws, const Fn& cdf) {
    const double n = static_cast<double>(sorted_draws.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted_draws.size(); ++i) {
        const double value = cdf(sorted_draws[i]);
        worst = std::max(worst, std::abs(value - static_cast<double>(i) / n));
        worst = std::max(worst, std::abs(static_cast<double>(i + 1) / n - value));
    }
    return worst;
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, double scale, double tol,
                             int max_iterations) {
    const Eigen::Index d = x0.size();
    std::vector<Eigen::VectorXd> simplex(d + 1, x0);
    std::vector<double> values(d + 1);
    for (Eigen::Index j = 0; j < d; ++j) simplex[j + 1](j) += scale;
    for (Eigen::Index j = 0; j <= d; ++j) values[j] = f(simplex[j]);

    NelderMeadResult result;
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        std::vector<std::size_t> order(d + 1);
        for (std::size_t j = 0; j <= static_cast<std::size_t>(d); ++j) order[j] = j;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front(), worst = order.back(),
                          second = order[order.size() - 2];
        if (std::abs(values[worst] - values[best]) <
            tol * (std::abs(values[best]) + std::abs(values[worst]) + 1e-30))
            break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
        for (std::size_t j = 0; j <= static_cast<std::size_t>(d); ++j)
            if (j != worst) centroid += simplex[j];
        centroid /= static_cast<double>(d);

        const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
        const double fr = f(reflected);
        if (fr < values[best]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[worst] - centroid);
            const double fc = f(contracted);
            if (fc < values[worst]) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for (std::size_t j = 0; j <= static_cast<std::size_t>(d); ++j) {
                    if (j == best) continue;
                    simplex[j] = simplex[best] + 0.5 * (simplex[j] - simplex[best]);
                    values[j] = f(simplex[j]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j <= static_cast<std::size_t>(d); ++j)
        if (values[j] < values[best]) best = j;
    result.x = simplex[best];
    result.value = values[best];
    result.iterations = iter;
    return result;
}

}  // namespace oracles
