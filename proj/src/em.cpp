#include "qsbs/em.hpp"

#include "qsbs/bfgs.hpp"
#include "qsbs/distribution.hpp"
#include "qsbs/smn.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <stdexcept>

namespace qsbs {

namespace {

// All M-step quantities reduce to functions of r_i = gamma^2 t_i / (4 Q_i):
//   a_i^2 = (r_i + 1/r_i - 2) / alpha^2,
//   surrogate = -n log(alpha gamma) + n log 4 + (1/2) sum eta_i
//               + sum log1p(r_i) - (1/(2 alpha^2)) sum w_i (r_i + 1/r_i - 2).
struct Terms {
    double y_q;
    Eigen::ArrayXd log_t;

    Terms(const ModelSpec& spec, const Dataset& data)
        : y_q(smn_quantile(spec.quantile_level, spec.family)),
          log_t(data.response.array().log()) {}

    Eigen::ArrayXd ratios(const Theta& theta, const Dataset& data) const {
        const double gamma = gamma_alpha(theta.alpha, y_q);
        const Eigen::ArrayXd eta = (data.design * theta.beta).array();
        return (std::log(0.25 * gamma * gamma) + log_t - eta).exp();
    }

    Eigen::ArrayXd standardized(const Theta& theta, const Dataset& data) const {
        const Eigen::ArrayXd r = ratios(theta, data);
        return (r - 1.0).sign() * ((r + r.inverse() - 2.0).max(0.0)).sqrt() / theta.alpha;
    }

    double value(const Theta& theta, const Eigen::VectorXd& weights, const Dataset& data) const {
        const double gamma = gamma_alpha(theta.alpha, y_q);
        const Eigen::ArrayXd eta = (data.design * theta.beta).array();
        const Eigen::ArrayXd r = (std::log(0.25 * gamma * gamma) + log_t - eta).exp();
        const double n = static_cast<double>(data.n());
        return -n * std::log(theta.alpha * gamma) + n * std::log(4.0) + 0.5 * eta.sum() +
               r.log1p().sum() -
               0.5 / (theta.alpha * theta.alpha) *
                   (weights.array() * (r + r.inverse() - 2.0)).sum();
    }

    // Gradient ordered [alpha, beta]; also exposes the per-observation
    // pieces so the empirical scores reuse the same code path.
    void gradient(const Theta& theta, const Eigen::VectorXd& weights, const Dataset& data,
                  double* d_alpha, Eigen::VectorXd* d_beta, Eigen::ArrayXd* alpha_terms,
                  Eigen::ArrayXd* beta_terms) const {
        const double alpha = theta.alpha;
        const double gamma = gamma_alpha(alpha, y_q);
        const double gamma_prime = gamma_alpha_prime(alpha, y_q);
        const Eigen::ArrayXd r = ratios(theta, data);
        const Eigen::ArrayXd w = weights.array();
        const Eigen::ArrayXd r_inv = r.inverse();
        const Eigen::ArrayXd frac = r / (1.0 + r);

        const double a2 = alpha * alpha;
        const Eigen::ArrayXd s_alpha =
            -(gamma + alpha * gamma_prime) / (alpha * gamma) +
            (2.0 * gamma_prime / gamma) * frac +
            w * (r + r_inv - 2.0) / (a2 * alpha) -
            w * (gamma_prime / (a2 * gamma)) * (r - r_inv);
        const Eigen::ArrayXd v = -0.5 + (1.0 - frac) + w / (2.0 * a2) * (r - r_inv);

        if (d_alpha) *d_alpha = s_alpha.sum();
        if (d_beta) *d_beta = data.design.transpose() * v.matrix();
        if (alpha_terms) *alpha_terms = s_alpha;
        if (beta_terms) *beta_terms = v;
    }
};

// Free-coordinate parameterization of the M-step: z = [log alpha, beta_free].
struct MStepSpace {
    std::vector<Eigen::Index> free_beta;
    Eigen::VectorXd fixed_beta;  // full-length template with fixed values set

    MStepSpace(Eigen::Index n_coef, const FixedMask* mask) {
        fixed_beta = Eigen::VectorXd::Zero(n_coef);
        std::vector<bool> fixed(n_coef, false);
        if (mask) {
            if (mask->indices.size() != mask->values.size())
                throw std::invalid_argument("fixed mask indices/values size mismatch");
            for (std::size_t k = 0; k < mask->indices.size(); ++k) {
                const Eigen::Index j = mask->indices[k];
                if (j < 0 || j >= n_coef) throw std::invalid_argument("fixed mask index out of range");
                if (fixed[j]) throw std::invalid_argument("fixed mask index repeated");
                fixed[j] = true;
                fixed_beta(j) = mask->values[k];
            }
        }
        for (Eigen::Index j = 0; j < n_coef; ++j)
            if (!fixed[j]) free_beta.push_back(j);
    }

    Eigen::VectorXd pack(const Theta& theta) const {
        Eigen::VectorXd z(1 + free_beta.size());
        z(0) = std::log(theta.alpha);
        for (std::size_t k = 0; k < free_beta.size(); ++k) z(1 + k) = theta.beta(free_beta[k]);
        return z;
    }

    Theta unpack(const Eigen::VectorXd& z) const {
        Theta theta;
        theta.alpha = std::exp(z(0));
        theta.beta = fixed_beta;
        for (std::size_t k = 0; k < free_beta.size(); ++k) theta.beta(free_beta[k]) = z(1 + k);
        return theta;
    }
};

BfgsResult maximize_surrogate(const Terms& terms, const MStepSpace& space, const Dataset& data,
                              const Eigen::VectorXd& weights, const Theta& start,
                              const MStepControls& controls) {
    auto objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) -> double {
        const Theta theta = space.unpack(z);
        if (!std::isfinite(theta.alpha) || theta.alpha <= 0.0)
            return std::numeric_limits<double>::infinity();
        double d_alpha = 0.0;
        Eigen::VectorXd d_beta;
        terms.gradient(theta, weights, data, &d_alpha, &d_beta, nullptr, nullptr);
        grad.resize(z.size());
        grad(0) = -d_alpha * theta.alpha;  // chain rule through log alpha
        for (std::size_t k = 0; k < space.free_beta.size(); ++k)
            grad(1 + k) = -d_beta(space.free_beta[k]);
        return -terms.value(theta, weights, data);
    };
    BfgsOptions options;
    options.grad_tol = controls.grad_tol;
    options.max_iterations = controls.max_iterations;
    return bfgs_minimize(objective, space.pack(start), options);
}

}  // namespace

double mixing_weight(double a, const MixtureFamily& family) {
    switch (family.kind) {
        case Kind::Normal:
            return 1.0;
        case Kind::StudentT:
            return (family.nu + 1.0) / (family.nu + a * a);
        case Kind::ContaminatedNormal: {
            // Scaled by exp(-(1-delta) a^2 / 2) so large |a| cannot overflow.
            const double e = std::exp(-0.5 * (1.0 - family.delta) * a * a);
            const double base = e * (1.0 - family.nu);
            return (base + family.nu * std::pow(family.delta, 1.5)) /
                   (base + family.nu * std::sqrt(family.delta));
        }
        case Kind::Slash: {
            const double a2 = a * a;
            if (a2 < 1e-8) return (1.0 + 2.0 * family.nu) / (3.0 + 2.0 * family.nu);
            const double x = 0.5 * a2;
            return (1.0 + 2.0 * family.nu) / a2 * boost::math::gamma_p(family.nu + 1.5, x) /
                   boost::math::gamma_p(family.nu + 0.5, x);
        }
    }
    return 1.0;
}

double conditional_weight(double t, const Theta& theta, double fitted_quantile,
                          const ModelSpec& spec) {
    if (!(t > 0.0)) throw std::domain_error("support is t > 0");
    const double y_q = smn_quantile(spec.quantile_level, spec.family);
    const double gamma = gamma_alpha(theta.alpha, y_q);
    const double r = gamma * gamma * t / (4.0 * fitted_quantile);
    const double a = std::sqrt(4.0 * fitted_quantile / t) * (r - 1.0) / (theta.alpha * gamma);
    return mixing_weight(a, spec.family);
}

double q_function(const Theta& theta, const Eigen::VectorXd& weights, const ModelSpec& spec,
                  const Dataset& data) {
    if (weights.size() != data.n()) throw std::invalid_argument("weight vector length mismatch");
    const double v = Terms(spec, data).value(theta, weights, data);
    if (!std::isfinite(v)) throw std::runtime_error("surrogate evaluation failed (non-finite)");
    return v;
}

Eigen::VectorXd q_gradient(const Theta& theta, const Eigen::VectorXd& weights,
                           const ModelSpec& spec, const Dataset& data) {
    if (weights.size() != data.n()) throw std::invalid_argument("weight vector length mismatch");
    double d_alpha = 0.0;
    Eigen::VectorXd d_beta;
    Terms(spec, data).gradient(theta, weights, data, &d_alpha, &d_beta, nullptr, nullptr);
    Eigen::VectorXd grad(1 + d_beta.size());
    grad(0) = d_alpha;
    grad.tail(d_beta.size()) = d_beta;
    return grad;
}

Theta initial_values(const ModelSpec& spec, const Dataset& data) {
    Theta theta;
    const Eigen::VectorXd log_t = data.response.array().log();
    theta.beta = data.design.colPivHouseholderQr().solve(log_t);
    const Eigen::ArrayXd ratio =
        data.response.array() / (data.design * theta.beta).array().exp();
    const double arith = ratio.mean();
    const double geom = std::exp(ratio.log().mean());
    const double excess = arith / geom - 1.0;
    theta.alpha = std::clamp(std::sqrt(std::max(4.0 * excess, 0.0)), 0.05, 5.0);
    (void)spec;
    return theta;
}

FitResult em_fit(const ModelSpec& spec, const Dataset& data, const EmSettings& settings,
                 std::optional<Theta> init, const FixedMask* mask) {
    spec.family.validate();
    const Terms terms(spec, data);
    const MStepSpace space(data.n_coef(), mask);

    Theta theta = init ? *init : initial_values(spec, data);
    if (mask) {
        for (std::size_t k = 0; k < mask->indices.size(); ++k)
            theta.beta(mask->indices[k]) = mask->values[k];
    }

    FitResult result;
    result.family = spec.family;
    result.theta = theta;
    result.n_free_beta = static_cast<int>(space.free_beta.size());

    auto weights_at = [&](const Theta& th) {
        const Eigen::ArrayXd a = terms.standardized(th, data);
        Eigen::VectorXd w(a.size());
        for (Eigen::Index i = 0; i < a.size(); ++i) w(i) = mixing_weight(a(i), spec.family);
        return w;
    };

    Eigen::VectorXd weights = weights_at(theta);
    bool stopped = false;
    int iter = 0;
    for (; iter < settings.max_iterations; ++iter) {
        const double q_before = terms.value(theta, weights, data);
        BfgsResult step =
            maximize_surrogate(terms, space, data, weights, theta, settings.m_step);
        if (step.line_search_failed && step.iterations == 0) {
            result.message = "M-step line search failed to improve the surrogate";
            break;
        }
        const Theta updated = space.unpack(step.x);
        const double q_after = -step.value;
        if (!std::isfinite(q_after)) {
            result.message = "surrogate became non-finite";
            break;
        }
        theta = updated;
        if (std::abs(q_after - q_before) < settings.tolerance) {
            stopped = true;
            ++iter;
            break;
        }
        weights = weights_at(theta);
    }

    if (stopped) {
        // Polish: iterate a few more cycles until the observed-data score
        // (the surrogate gradient at the self-consistent weights) is small.
        const double score_tol = 1e-6 * static_cast<double>(data.n());
        for (int extra = 0; extra < 40; ++extra) {
            weights = weights_at(theta);
            double d_alpha = 0.0;
            Eigen::VectorXd d_beta;
            terms.gradient(theta, weights, data, &d_alpha, &d_beta, nullptr, nullptr);
            double worst = std::abs(d_alpha);
            for (auto j : space.free_beta) worst = std::max(worst, std::abs(d_beta(j)));
            if (worst <= score_tol) break;
            BfgsResult step =
                maximize_surrogate(terms, space, data, weights, theta, settings.m_step);
            if (step.line_search_failed && step.iterations == 0) break;
            theta = space.unpack(step.x);
            ++iter;
        }
    }

    weights = weights_at(theta);
    result.theta = theta;
    result.weights = weights;
    result.iterations = iter;
    result.converged = stopped;
    if (!stopped && result.message.empty())
        result.message = "stopping criterion not met within the iteration budget";
    result.q_value = terms.value(theta, weights, data);
    try {
        result.loglik = observed_loglik(theta, spec, data);
    } catch (const std::exception& e) {
        result.converged = false;
        result.message = e.what();
        return result;
    }
    result.info = empirical_info(theta, weights, spec, data);
    try {
        result.std_errors = standard_errors(result.info, [&] {
            std::vector<std::string> names{"alpha"};
            names.insert(names.end(), data.column_names.begin(), data.column_names.end());
            return names;
        }());
    } catch (const std::exception&) {
        result.std_errors = Eigen::VectorXd::Constant(1 + data.n_coef(),
                                                      std::numeric_limits<double>::quiet_NaN());
    }
    return result;
}

ProfileResult profile_nu(const ModelSpec& spec, const Dataset& data, const EmSettings& settings) {
    if (settings.nu_grid.empty()) throw std::invalid_argument("profile grid is empty");
    ProfileResult out;
    bool have_best = false;
    double best_loglik = 0.0;
    MixtureFamily best_family;
    std::optional<Theta> warm;

    for (const MixtureFamily& candidate : settings.nu_grid) {
        ModelSpec local = spec;
        local.family = candidate;
        ProfilePoint point{candidate, 0.0, false};
        try {
            FitResult fit = em_fit(local, data, settings, warm);
            point.loglik = fit.loglik;
            point.converged = fit.converged;
            if (fit.converged) {
                warm = fit.theta;
                if (!have_best || fit.loglik > best_loglik) {
                    have_best = true;
                    best_loglik = fit.loglik;
                    best_family = candidate;
                }
            }
        } catch (const std::exception&) {
            point.converged = false;
        }
        out.trace.push_back(point);
    }
    if (!have_best) throw std::runtime_error("no profile grid point produced a converged fit");

    ModelSpec local = spec;
    local.family = best_family;
    out.fit = em_fit(local, data, settings);
    return out;
}

Eigen::MatrixXd empirical_scores(const Theta& theta, const Eigen::VectorXd& weights,
                                 const ModelSpec& spec, const Dataset& data) {
    const Terms terms(spec, data);
    Eigen::ArrayXd alpha_terms, beta_terms;
    terms.gradient(theta, weights, data, nullptr, nullptr, &alpha_terms, &beta_terms);
    Eigen::MatrixXd scores(data.n(), 1 + data.n_coef());
    scores.col(0) = alpha_terms.matrix();
    scores.rightCols(data.n_coef()) =
        data.design.array().colwise() * beta_terms;
    return scores;
}

Eigen::MatrixXd empirical_info(const Theta& theta, const Eigen::VectorXd& weights,
                               const ModelSpec& spec, const Dataset& data) {
    const Eigen::MatrixXd scores = empirical_scores(theta, weights, spec, data);
    return scores.transpose() * scores;
}

Eigen::VectorXd standard_errors(const Eigen::MatrixXd& info,
                                const std::vector<std::string>& names) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    lu.setThreshold(1e-12);
    if (lu.rank() < info.rows()) {
        Eigen::VectorXd null_dir = lu.kernel().col(0).cwiseAbs();
        Eigen::Index worst = 0;
        null_dir.maxCoeff(&worst);
        const std::string label = (worst < static_cast<Eigen::Index>(names.size()))
                                      ? names[worst]
                                      : std::to_string(worst);
        throw std::runtime_error("information matrix is singular along '" + label +
                                 "' (collinear design?)");
    }
    const Eigen::MatrixXd cov = lu.inverse();
    return cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace qsbs
