#pragma once

#include "qsbs/family.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qsbs {

/// Positive responses with a full-rank design matrix whose first column is
/// the intercept. Construction validates; instances are immutable in use.
struct Dataset {
    Eigen::VectorXd response;
    Eigen::MatrixXd design;  // n x (p+1), leading column of ones
    std::vector<std::string> column_names;

    Eigen::Index n() const { return design.rows(); }
    Eigen::Index n_coef() const { return design.cols(); }

    /// Prepends the intercept column and checks positivity, rank and size.
    static Dataset make(Eigen::VectorXd response, const Eigen::MatrixXd& covariates,
                        std::vector<std::string> covariate_names);
};

enum class Link { Log };

struct ModelSpec {
    double quantile_level = 0.5;
    MixtureFamily family;
    Link link = Link::Log;
};

struct Theta {
    double alpha = 1.0;
    Eigen::VectorXd beta;
};

/// eta_i = x_i' beta.
Eigen::VectorXd linear_predictor(const ModelSpec& spec, const Dataset& data,
                                 const Eigen::VectorXd& beta);

/// Q_i = exp(eta_i) under the log link.
Eigen::VectorXd fitted_quantiles(const ModelSpec& spec, const Dataset& data,
                                 const Eigen::VectorXd& beta);

/// Observed-data log-likelihood, accumulated in log space. Throws on a
/// non-finite result rather than returning -inf.
double observed_loglik(const Theta& theta, const ModelSpec& spec, const Dataset& data);

/// a(t_i) under the given parameters; the kernel-scale residuals that feed
/// the conditional weights, the fitted CDF values and the diagnostics.
Eigen::VectorXd standardized_residuals(const Theta& theta, const ModelSpec& spec,
                                       const Dataset& data);

}  // namespace qsbs
