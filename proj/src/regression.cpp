#include "qsbs/regression.hpp"

#include "qsbs/distribution.hpp"
#include "qsbs/smn.hpp"

#include <cmath>
#include <stdexcept>

namespace qsbs {

Dataset Dataset::make(Eigen::VectorXd response, const Eigen::MatrixXd& covariates,
                      std::vector<std::string> covariate_names) {
    const Eigen::Index n = response.size();
    if (covariates.rows() != n)
        throw std::invalid_argument("response and covariate row counts differ");
    if (static_cast<Eigen::Index>(covariate_names.size()) != covariates.cols())
        throw std::invalid_argument("covariate name count does not match column count");

    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(response(i) > 0.0))
            throw std::invalid_argument("response must be strictly positive (row " +
                                        std::to_string(i + 1) + ")");
        if (!std::isfinite(response(i)))
            throw std::invalid_argument("non-finite response (row " + std::to_string(i + 1) + ")");
    }

    Dataset data;
    data.response = std::move(response);
    data.design.resize(n, covariates.cols() + 1);
    data.design.col(0).setOnes();
    data.design.rightCols(covariates.cols()) = covariates;
    data.column_names.reserve(covariate_names.size() + 1);
    data.column_names.push_back("intercept");
    for (auto& name : covariate_names) data.column_names.push_back(std::move(name));

    if (n <= data.design.cols())
        throw std::invalid_argument("need more observations than coefficients");

    Eigen::FullPivLU<Eigen::MatrixXd> lu(data.design);
    lu.setThreshold(1e-10);
    if (lu.rank() < data.design.cols()) {
        // Use a kernel vector to point at the columns driving the deficiency.
        Eigen::VectorXd null_dir = lu.kernel().col(0).cwiseAbs();
        Eigen::Index first = 0, second = 0;
        null_dir.maxCoeff(&first);
        double best = -1.0;
        for (Eigen::Index j = 0; j < null_dir.size(); ++j) {
            if (j != first && null_dir(j) > best) {
                best = null_dir(j);
                second = j;
            }
        }
        throw std::invalid_argument("design matrix is rank deficient (columns '" +
                                    data.column_names[first] + "' and '" +
                                    data.column_names[second] + "' are linearly dependent)");
    }
    return data;
}

Eigen::VectorXd linear_predictor(const ModelSpec& spec, const Dataset& data,
                                 const Eigen::VectorXd& beta) {
    (void)spec;
    if (beta.size() != data.n_coef())
        throw std::invalid_argument("coefficient vector length does not match design");
    return data.design * beta;
}

Eigen::VectorXd fitted_quantiles(const ModelSpec& spec, const Dataset& data,
                                 const Eigen::VectorXd& beta) {
    return linear_predictor(spec, data, beta).array().exp();
}

Eigen::VectorXd standardized_residuals(const Theta& theta, const ModelSpec& spec,
                                       const Dataset& data) {
    if (!(theta.alpha > 0.0)) throw std::domain_error("shape alpha must be positive");
    const double y_q = smn_quantile(spec.quantile_level, spec.family);
    const double gamma = gamma_alpha(theta.alpha, y_q);
    const double g2 = gamma * gamma;
    const Eigen::VectorXd eta = linear_predictor(spec, data, theta.beta);
    Eigen::VectorXd a(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double t = data.response(i);
        const double q_i = std::exp(eta(i));
        a(i) = std::sqrt(4.0 * q_i / t) * (g2 * t / (4.0 * q_i) - 1.0) / (theta.alpha * gamma);
    }
    return a;
}

double observed_loglik(const Theta& theta, const ModelSpec& spec, const Dataset& data) {
    if (!(theta.alpha > 0.0)) throw std::domain_error("shape alpha must be positive");
    const double y_q = smn_quantile(spec.quantile_level, spec.family);
    const double gamma = gamma_alpha(theta.alpha, y_q);
    const double g2 = gamma * gamma;
    const Eigen::VectorXd eta = linear_predictor(spec, data, theta.beta);

    double total = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double t = data.response(i);
        const double q_i = std::exp(eta(i));
        const double r = g2 * t / (4.0 * q_i);
        const double a = std::sqrt(4.0 * q_i / t) * (r - 1.0) / (theta.alpha * gamma);
        // log A(t) = log(g2/2 * (1 + 1/r)) - log(alpha*gamma) - 0.5*log(4 Q t)
        const double log_deriv = std::log(0.5 * g2 * (1.0 + 1.0 / r)) -
                                 std::log(theta.alpha * gamma) -
                                 0.5 * (std::log(4.0 * t) + eta(i));
        total += smn_log_pdf(a, spec.family) + log_deriv;
    }
    if (!std::isfinite(total))
        throw std::runtime_error("log-likelihood evaluation failed (non-finite)");
    return total;
}

}  // namespace qsbs
