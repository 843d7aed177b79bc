#pragma once

// Independent numerical routes used only by the tests: everything here is
// implemented with different algorithms from the library paths it checks
// (adaptive Simpson instead of Gauss-Kronrod, bisection instead of the
// secant hybrid, Nelder-Mead instead of EM/BFGS).

#include "qsbs/family.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace oracles {

using Fn = std::function<double(double)>;

/// Recursive adaptive Simpson on [a, b].
double adaptive_simpson(const Fn& f, double a, double b, double tol = 1e-12);

/// Integral over the whole real line via the tangent substitution.
double integrate_real_line(const Fn& f, double tol = 1e-12);

/// Integral over (0, inf) via the exponential substitution.
double integrate_positive_line(const Fn& f, double tol = 1e-12);

/// Pure bisection for a monotone increasing g: finds g(x) = target.
double bisect(const Fn& g, double target, double lo, double hi, double tol = 1e-12);

/// Central finite difference of f at x.
double central_difference(const Fn& f, double x, double h = 1e-5);

/// E[U | a(T) = a] by direct posterior integration of the mixing law.
double posterior_weight(double a, const qsbs::MixtureFamily& family);

/// E[(1/U)^r] by direct integration/summation of the mixing law.
double mixing_moment(const qsbs::MixtureFamily& family, int r);

/// Kolmogorov-Smirnov distance between sorted draws and a CDF.
double ks_statistic(const std::vector<double>& sorted_draws, const Fn& cdf);

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
};

/// Derivative-free simplex minimizer.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, double scale = 0.25,
                             double tol = 1e-10, int max_iterations = 20000);

}  // namespace oracles
