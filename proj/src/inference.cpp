#include "qsbs/inference.hpp"

#include "qsbs/distribution.hpp"
#include "qsbs/rng.hpp"
#include "qsbs/smn.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qsbs {

namespace {

constexpr double kCdfClip = 1e-12;

Eigen::VectorXd theta_vector(const Theta& theta) {
    Eigen::VectorXd v(1 + theta.beta.size());
    v(0) = theta.alpha;
    v.tail(theta.beta.size()) = theta.beta;
    return v;
}

double quantile_of_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double pos = p * (static_cast<double>(n) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

double chi_squared_upper_tail(double statistic, int df) {
    return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

TestReport run_tests(const ModelSpec& spec, const Dataset& data, const EmSettings& settings,
                     const HypothesisSpec& hyp) {
    if (hyp.beta_indices.empty()) throw std::invalid_argument("hypothesis restricts nothing");
    if (hyp.beta_indices.size() != hyp.values.size())
        throw std::invalid_argument("hypothesis indices/values size mismatch");
    std::set<Eigen::Index> distinct(hyp.beta_indices.begin(), hyp.beta_indices.end());
    if (distinct.size() != hyp.beta_indices.size())
        throw std::invalid_argument("hypothesis indices must be distinct");
    for (Eigen::Index j : hyp.beta_indices)
        if (j < 0 || j >= data.n_coef())
            throw std::invalid_argument("hypothesis index out of range");

    FitResult unrestricted = em_fit(spec, data, settings);
    if (!unrestricted.converged)
        throw std::runtime_error("unrestricted fit did not converge: " + unrestricted.message);

    FixedMask mask{hyp.beta_indices, hyp.values};
    FitResult restricted = em_fit(spec, data, settings, std::nullopt, &mask);
    if (!restricted.converged)
        throw std::runtime_error("restricted fit did not converge: " + restricted.message);

    const Eigen::VectorXd diff = theta_vector(unrestricted.theta) - theta_vector(restricted.theta);
    const Eigen::VectorXd score_r =
        empirical_scores(restricted.theta, restricted.weights, spec, data).colwise().sum();

    TestReport report;
    report.df = hyp.df();
    report.unrestricted = unrestricted;
    report.restricted = restricted;
    report.loglik_unrestricted = unrestricted.loglik;
    report.loglik_restricted = restricted.loglik;

    report.wald = diff.dot(unrestricted.info * diff);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(restricted.info);
    lu.setThreshold(1e-12);
    if (lu.rank() < restricted.info.rows())
        throw std::runtime_error("restricted information matrix is singular");
    report.score = score_r.dot(lu.solve(score_r));

    report.lr = -2.0 * (restricted.q_value - unrestricted.q_value);
    report.lr_observed = -2.0 * (restricted.loglik - unrestricted.loglik);
    report.gradient = score_r.dot(diff);

    for (double* s : {&report.wald, &report.score, &report.lr, &report.gradient}) {
        if (*s < 0.0) {
            *s = 0.0;
            report.clamped = true;
        }
    }
    report.p_wald = chi_squared_upper_tail(report.wald, report.df);
    report.p_score = chi_squared_upper_tail(report.score, report.df);
    report.p_lr = chi_squared_upper_tail(report.lr, report.df);
    report.p_gradient = chi_squared_upper_tail(report.gradient, report.df);
    return report;
}

Eigen::VectorXd fitted_cdf_values(const FitResult& fit, const ModelSpec& spec,
                                  const Dataset& data) {
    ModelSpec local = spec;
    local.family = fit.family;
    const Eigen::VectorXd a = standardized_residuals(fit.theta, local, data);
    Eigen::VectorXd cdf(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        cdf(i) = std::clamp(smn_cdf(a(i), local.family), kCdfClip, 1.0 - kCdfClip);
    return cdf;
}

Eigen::VectorXd gcs_residuals(const FitResult& fit, const ModelSpec& spec, const Dataset& data) {
    const Eigen::VectorXd cdf = fitted_cdf_values(fit, spec, data);
    return (-(1.0 - cdf.array()).log()).matrix();
}

Eigen::VectorXd rq_residuals(const FitResult& fit, const ModelSpec& spec, const Dataset& data) {
    const Eigen::VectorXd cdf = fitted_cdf_values(fit, spec, data);
    Eigen::VectorXd out(cdf.size());
    for (Eigen::Index i = 0; i < cdf.size(); ++i) out(i) = normal_quantile(cdf(i));
    return out;
}

Envelope simulated_envelope(const FitResult& fit, const ModelSpec& spec, const Dataset& data,
                            int bands, std::uint64_t seed) {
    if (bands < 2) throw std::invalid_argument("need at least two simulated bands");
    ModelSpec local = spec;
    local.family = fit.family;
    const Eigen::Index n = data.n();
    const double y_q = smn_quantile(local.quantile_level, local.family);
    const double gamma = gamma_alpha(fit.theta.alpha, y_q);
    const Eigen::VectorXd fitted = fitted_quantiles(local, data, fit.theta.beta);

    // One sorted residual vector per band, residuals computed under the
    // fitted parameters (no refitting).
    std::vector<std::vector<double>> sim_gcs(bands), sim_rq(bands);
    for (int b = 0; b < bands; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        Dataset replica = data;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double g = rng.mixing_scale(local.family);
            const double w = fit.theta.alpha * std::sqrt(g) * rng.normal();
            const double root = w + std::sqrt(w * w + 4.0);
            replica.response(i) = fitted(i) / (gamma * gamma) * root * root;
        }
        const Eigen::VectorXd cdf = fitted_cdf_values(fit, local, replica);
        sim_gcs[b].resize(n);
        sim_rq[b].resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            sim_gcs[b][i] = -std::log(1.0 - cdf(i));
            sim_rq[b][i] = normal_quantile(cdf(i));
        }
        std::sort(sim_gcs[b].begin(), sim_gcs[b].end());
        std::sort(sim_rq[b].begin(), sim_rq[b].end());
    }

    Envelope env;
    env.bands = bands;
    auto fill = [&](EnvelopeBand& band, const std::vector<std::vector<double>>& sims,
                    const Eigen::VectorXd& observed, bool exponential_reference) {
        band.observed.assign(observed.data(), observed.data() + observed.size());
        std::sort(band.observed.begin(), band.observed.end());
        band.theoretical.resize(n);
        band.lower.resize(n);
        band.median.resize(n);
        band.upper.resize(n);
        std::vector<double> column(bands);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = (static_cast<double>(i) + 1.0 - 0.375) /
                             (static_cast<double>(n) + 0.25);
            band.theoretical[i] =
                exponential_reference ? -std::log(1.0 - p) : normal_quantile(p);
            for (int b = 0; b < bands; ++b) column[b] = sims[b][i];
            std::sort(column.begin(), column.end());
            band.lower[i] = quantile_of_sorted(column, 0.025);
            band.median[i] = quantile_of_sorted(column, 0.5);
            band.upper[i] = quantile_of_sorted(column, 0.975);
        }
    };
    fill(env.gcs, sim_gcs, gcs_residuals(fit, local, data), true);
    fill(env.rq, sim_rq, rq_residuals(fit, local, data), false);
    return env;
}

CriteriaReport criteria(const FitResult& fit, const ModelSpec& spec, const Dataset& data) {
    CriteriaReport report;
    report.n = data.n();
    report.k = 1 + fit.n_free_beta;
    const double n = static_cast<double>(report.n);
    const double k = static_cast<double>(report.k);
    if (report.n <= report.k + 1)
        throw std::invalid_argument("corrected criterion undefined: n <= k + 1");
    const double deviance = -2.0 * fit.loglik;
    report.aic = deviance + 2.0 * k;
    report.bic = deviance + k * std::log(n);
    report.aicc = deviance + 2.0 * k * n / (n - k - 1.0);
    report.hic = deviance + 2.0 * k * std::log(std::log(n));

    ModelSpec local = spec;
    local.family = fit.family;
    const Eigen::VectorXd fitted = fitted_quantiles(local, data, fit.theta.beta);
    report.rmse = std::sqrt((data.response - fitted).squaredNorm() / n);
    return report;
}

SummaryStats summarize(std::span<const double> values) {
    SummaryStats s;
    const std::size_t n = values.size();
    if (n == 0) return s;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double median = (n % 2 == 1) ? sorted[n / 2]
                                       : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    s.mean = mean;
    s.median = median;
    s.sd = n > 1 ? std::sqrt(m2 * static_cast<double>(n) / static_cast<double>(n - 1)) : 0.0;
    s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    s.kurtosis_excess = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    return s;
}

}  // namespace qsbs
