#pragma once

#include <Eigen/Dense>

#include <functional>

namespace qsbs {

struct BfgsOptions {
    double grad_tol = 1e-8;      // stop on max-norm of the gradient
    int max_iterations = 200;
    double c1 = 1e-4;            // Armijo constant
    double c2 = 0.9;             // curvature constant
};

struct BfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
};

/// Minimizes f with inverse-Hessian BFGS updates and a strong-Wolfe line
/// search. Non-finite objective values are treated as line-search rejections,
/// so f may safely blow up outside its effective domain.
BfgsResult bfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& value_and_gradient,
    const Eigen::VectorXd& x0, const BfgsOptions& options);

}  // namespace qsbs
