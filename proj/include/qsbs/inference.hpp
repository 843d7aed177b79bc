#pragma once

#include "qsbs/em.hpp"

#include <cstdint>
#include <span>

namespace qsbs {

/// Restrictions on regression coefficients: beta[indices[k]] = values[k].
struct HypothesisSpec {
    std::vector<Eigen::Index> beta_indices;
    std::vector<double> values;

    int df() const { return static_cast<int>(beta_indices.size()); }
};

struct TestReport {
    double wald = 0.0;
    double score = 0.0;
    double lr = 0.0;
    double gradient = 0.0;
    double p_wald = 1.0, p_score = 1.0, p_lr = 1.0, p_gradient = 1.0;
    int df = 0;
    bool clamped = false;  // a statistic was negative by numerical noise
    double loglik_unrestricted = 0.0;
    double loglik_restricted = 0.0;
    double lr_observed = 0.0;  // same contrast on the observed-data likelihood
    FitResult unrestricted;
    FitResult restricted;
};

/// Wald, score, likelihood-ratio and gradient statistics for the given
/// restriction, each referred to a chi-square with df() degrees of freedom.
TestReport run_tests(const ModelSpec& spec, const Dataset& data, const EmSettings& settings,
                     const HypothesisSpec& hyp);

/// Fitted CDF values clipped away from {0,1} so both residual transforms
/// stay finite.
Eigen::VectorXd fitted_cdf_values(const FitResult& fit, const ModelSpec& spec,
                                  const Dataset& data);

/// -log survival transform; unit exponential reference when the model holds.
Eigen::VectorXd gcs_residuals(const FitResult& fit, const ModelSpec& spec, const Dataset& data);

/// Normal-quantile transform; standard normal reference when the model holds.
Eigen::VectorXd rq_residuals(const FitResult& fit, const ModelSpec& spec, const Dataset& data);

struct EnvelopeBand {
    std::vector<double> theoretical;  // reference quantiles at plotting positions
    std::vector<double> observed;     // sorted observed residuals
    std::vector<double> lower, median, upper;
};

struct Envelope {
    EnvelopeBand gcs;
    EnvelopeBand rq;
    int bands = 0;
};

/// Simulates `bands` replicate datasets from the fitted model (no refitting)
/// and returns pointwise 2.5/50/97.5 percent bands per order statistic.
Envelope simulated_envelope(const FitResult& fit, const ModelSpec& spec, const Dataset& data,
                            int bands, std::uint64_t seed);

struct CriteriaReport {
    double aic = 0.0, bic = 0.0, aicc = 0.0, hic = 0.0, rmse = 0.0;
    int k = 0;
    Eigen::Index n = 0;
};

/// Information criteria on the observed-data likelihood plus the root mean
/// squared error of the fitted quantiles. k counts alpha and the free
/// coefficients; profiled extra parameters are not counted.
CriteriaReport criteria(const FitResult& fit, const ModelSpec& spec, const Dataset& data);

struct SummaryStats {
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
    double skewness = 0.0;
    double kurtosis_excess = 0.0;
};

SummaryStats summarize(std::span<const double> values);

double chi_squared_upper_tail(double statistic, int df);

}  // namespace qsbs
