#pragma once

#include "qsbs/regression.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qsbs {

struct MStepControls {
    double grad_tol = 1e-7;
    int max_iterations = 200;
};

struct EmSettings {
    double tolerance = 1e-6;   // stopping rule on successive Q-function values
    int max_iterations = 1000;
    std::vector<MixtureFamily> nu_grid;  // candidates for the profile search
    MStepControls m_step;
};

/// Holds selected regression coefficients at fixed values during a fit
/// (restricted estimation for the hypothesis tests).
struct FixedMask {
    std::vector<Eigen::Index> indices;
    std::vector<double> values;
};

struct FitResult {
    Theta theta;
    MixtureFamily family;
    Eigen::VectorXd weights;       // conditional expectations at the optimum
    double loglik = 0.0;           // observed-data log-likelihood
    double q_value = 0.0;          // surrogate value at convergence
    Eigen::MatrixXd info;          // empirical information, (p+2) x (p+2)
    Eigen::VectorXd std_errors;
    int iterations = 0;
    int n_free_beta = 0;  // coefficients estimated (intercept included)
    bool converged = false;
    std::string message;
};

/// Conditional expectation E[U | T = t] as a function of the standardized
/// residual a(t). Equals 1 under the normal kernel; downweights large |a|
/// for the heavy-tailed kernels.
double mixing_weight(double a, const MixtureFamily& family);

/// Spec-shaped wrapper computing a(t) from (t, alpha, fitted quantile).
double conditional_weight(double t, const Theta& theta, double fitted_quantile,
                          const ModelSpec& spec);

/// Surrogate objective maximized in the M-step (expected complete-data
/// log-likelihood up to a parameter-free constant).
double q_function(const Theta& theta, const Eigen::VectorXd& weights, const ModelSpec& spec,
                  const Dataset& data);

/// Analytic gradient of q_function, ordered [alpha, beta_0, ..., beta_p].
Eigen::VectorXd q_gradient(const Theta& theta, const Eigen::VectorXd& weights,
                           const ModelSpec& spec, const Dataset& data);

/// Least-squares starting values: beta from OLS of log(t) on the design,
/// alpha from a moment-style ratio of arithmetic to geometric means.
Theta initial_values(const ModelSpec& spec, const Dataset& data);

/// EM estimation of (alpha, beta) with the family's extra parameter fixed.
FitResult em_fit(const ModelSpec& spec, const Dataset& data, const EmSettings& settings,
                 std::optional<Theta> init = std::nullopt, const FixedMask* mask = nullptr);

struct ProfilePoint {
    MixtureFamily family;
    double loglik = 0.0;
    bool converged = false;
};

struct ProfileResult {
    FitResult fit;  // refit at the grid maximizer
    std::vector<ProfilePoint> trace;
};

/// Fits every candidate in settings.nu_grid and keeps the log-likelihood
/// maximizer. Throws if no grid point converges.
ProfileResult profile_nu(const ModelSpec& spec, const Dataset& data, const EmSettings& settings);

/// Per-observation empirical scores (rows) at the given parameters, with the
/// conditional weights held fixed; columns ordered [alpha, beta_0..beta_p].
Eigen::MatrixXd empirical_scores(const Theta& theta, const Eigen::VectorXd& weights,
                                 const ModelSpec& spec, const Dataset& data);

/// Sum of outer products of the per-observation scores.
Eigen::MatrixXd empirical_info(const Theta& theta, const Eigen::VectorXd& weights,
                               const ModelSpec& spec, const Dataset& data);

/// Square roots of the diagonal of info^{-1}; `names` (alpha first, then the
/// design columns) is used to report the offending direction when singular.
Eigen::VectorXd standard_errors(const Eigen::MatrixXd& info,
                                const std::vector<std::string>& names);

}  // namespace qsbs
