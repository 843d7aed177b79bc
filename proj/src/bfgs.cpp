#include "qsbs/bfgs.hpp"

#include <cmath>
#include <limits>

namespace qsbs {

namespace {

using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct Probe {
    double value = std::numeric_limits<double>::infinity();
    double slope = 0.0;
    Eigen::VectorXd gradient;
    bool finite = false;
};

Probe probe(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& direction,
            double step) {
    Probe p;
    p.gradient.resize(x.size());
    const double v = f(x + step * direction, p.gradient);
    if (std::isfinite(v) && p.gradient.allFinite()) {
        p.value = v;
        p.slope = p.gradient.dot(direction);
        p.finite = true;
    }
    return p;
}

// Strong-Wolfe line search (bracket + zoom). Returns step <= 0 on failure.
double wolfe_search(const Objective& f, const Eigen::VectorXd& x, double f0, double slope0,
                    const Eigen::VectorXd& direction, const BfgsOptions& opt, Probe& out) {
    double lo = 0.0, lo_value = f0, lo_slope = slope0;
    double step = 1.0;
    double hi = 0.0, hi_value = 0.0;
    bool bracketed = false;

    for (int iter = 0; iter < 60; ++iter) {
        Probe p = probe(f, x, direction, step);
        if (!p.finite || p.value > f0 + opt.c1 * step * slope0 ||
            (iter > 0 && p.value >= lo_value)) {
            hi = step;
            hi_value = p.finite ? p.value : std::numeric_limits<double>::infinity();
            bracketed = true;
            break;
        }
        if (std::abs(p.slope) <= -opt.c2 * slope0) {
            out = p;
            return step;
        }
        if (p.slope >= 0.0) {
            hi = lo;
            hi_value = lo_value;
            lo = step;
            lo_value = p.value;
            lo_slope = p.slope;
            bracketed = true;
            break;
        }
        lo = step;
        lo_value = p.value;
        lo_slope = p.slope;
        step *= 2.0;
    }
    if (!bracketed) return -1.0;

    for (int iter = 0; iter < 60; ++iter) {
        // Bisection zoom; robust even when interpolation would stall.
        step = 0.5 * (lo + hi);
        if (step <= 0.0 || std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
        Probe p = probe(f, x, direction, step);
        if (!p.finite || p.value > f0 + opt.c1 * step * slope0 || p.value >= lo_value) {
            hi = step;
            hi_value = p.finite ? p.value : std::numeric_limits<double>::infinity();
            continue;
        }
        if (std::abs(p.slope) <= -opt.c2 * slope0) {
            out = p;
            return step;
        }
        if (p.slope * (hi - lo) >= 0.0) {
            hi = lo;
            hi_value = lo_value;
        }
        lo = step;
        lo_value = p.value;
        lo_slope = p.slope;
    }
    // Accept a plain Armijo point if the curvature condition never held.
    if (lo > 0.0) {
        Probe p = probe(f, x, direction, lo);
        if (p.finite && p.value <= f0 + opt.c1 * lo * slope0) {
            out = p;
            return lo;
        }
    }
    (void)hi_value;
    (void)lo_slope;
    return -1.0;
}

}  // namespace

BfgsResult bfgs_minimize(const Objective& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& options) {
    const Eigen::Index d = x0.size();
    BfgsResult result;
    result.x = x0;
    result.gradient.resize(d);
    result.value = f(result.x, result.gradient);
    if (!std::isfinite(result.value) || !result.gradient.allFinite()) {
        result.line_search_failed = true;
        return result;
    }

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d);
    bool reset_since_failure = false;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter;
        if (result.gradient.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
            result.converged = true;
            return result;
        }

        Eigen::VectorXd direction = -(H * result.gradient);
        double slope = direction.dot(result.gradient);
        if (slope >= -1e-14 * direction.norm() * result.gradient.norm()) {
            H.setIdentity();
            direction = -result.gradient;
            slope = direction.dot(result.gradient);
        }

        Probe accepted;
        double step = wolfe_search(f, result.x, result.value, slope, direction, options, accepted);
        if (step <= 0.0) {
            if (!reset_since_failure) {
                // Damped restart: steepest descent from a fresh Hessian.
                H.setIdentity();
                reset_since_failure = true;
                direction = -result.gradient;
                slope = direction.dot(result.gradient);
                step = wolfe_search(f, result.x, result.value, slope, direction, options, accepted);
            }
            if (step <= 0.0) {
                result.line_search_failed = true;
                return result;
            }
        }
        reset_since_failure = false;

        const Eigen::VectorXd s = step * direction;
        const Eigen::VectorXd y = accepted.gradient - result.gradient;
        result.x += s;
        result.value = accepted.value;
        result.gradient = accepted.gradient;

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
                rho * s * s.transpose();
        }
    }
    result.converged = result.gradient.lpNorm<Eigen::Infinity>() <= options.grad_tol;
    return result;
}

}  // namespace qsbs
