#include "qsbs/mc.hpp"

#include "qsbs/distribution.hpp"
#include "qsbs/rng.hpp"
#include "qsbs/smn.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace qsbs {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<bool> failed{false};
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("a study worker threw; see per-item handling");
}

Dataset generate_dataset(const StudyConfig& config, int replication_index) {
    if (config.beta.size() < 1) throw std::invalid_argument("beta must include an intercept");
    config.family.validate();
    const int p = static_cast<int>(config.beta.size()) - 1;
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(replication_index)));

    Eigen::MatrixXd covariates(config.n, p);
    for (Eigen::Index i = 0; i < covariates.rows(); ++i)
        for (Eigen::Index j = 0; j < covariates.cols(); ++j) covariates(i, j) = rng.uniform();

    const double y_q = smn_quantile(config.quantile_level, config.family);
    const double gamma = gamma_alpha(config.alpha, y_q);

    Eigen::VectorXd response(config.n);
    for (int i = 0; i < config.n; ++i) {
        double eta = config.beta(0);
        for (int j = 0; j < p; ++j) eta += config.beta(j + 1) * covariates(i, j);
        const double g = rng.mixing_scale(config.family);
        const double w = config.alpha * std::sqrt(g) * rng.normal();
        const double root = w + std::sqrt(w * w + 4.0);
        response(i) = std::exp(eta) / (gamma * gamma) * root * root;
    }

    std::vector<std::string> names;
    names.reserve(p);
    for (int j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
    return Dataset::make(std::move(response), covariates, std::move(names));
}

namespace {

struct EstimationDraw {
    bool ok = false;
    Eigen::VectorXd estimate;  // [alpha, beta...]
    Eigen::VectorXd std_error;
    SummaryStats gcs, rq;
};

}  // namespace

EstimationSummary run_estimation_study(const StudyConfig& config, const EmSettings& settings) {
    ModelSpec spec{config.quantile_level, config.family};
    const int n_params = 1 + static_cast<int>(config.beta.size());
    std::vector<EstimationDraw> draws(config.replications);

    parallel_for(config.replications, config.threads, [&](int r) {
        EstimationDraw& draw = draws[r];
        try {
            const Dataset data = generate_dataset(config, r);
            const FitResult fit = em_fit(spec, data, settings);
            if (!fit.converged || !fit.std_errors.allFinite()) return;
            draw.estimate.resize(n_params);
            draw.estimate(0) = fit.theta.alpha;
            draw.estimate.tail(config.beta.size()) = fit.theta.beta;
            draw.std_error = fit.std_errors;
            const Eigen::VectorXd gcs = gcs_residuals(fit, spec, data);
            const Eigen::VectorXd rq = rq_residuals(fit, spec, data);
            draw.gcs = summarize({gcs.data(), static_cast<std::size_t>(gcs.size())});
            draw.rq = summarize({rq.data(), static_cast<std::size_t>(rq.size())});
            draw.ok = true;
        } catch (const std::exception&) {
            draw.ok = false;
        }
    });

    EstimationSummary summary;
    Eigen::VectorXd truth(n_params);
    truth(0) = config.alpha;
    truth.tail(config.beta.size()) = config.beta;
    const double z = normal_quantile(0.975);

    Eigen::VectorXd bias = Eigen::VectorXd::Zero(n_params);
    Eigen::VectorXd mse = Eigen::VectorXd::Zero(n_params);
    Eigen::VectorXd covered = Eigen::VectorXd::Zero(n_params);
    double count = 0.0;
    for (const auto& draw : draws) {
        if (!draw.ok) {
            ++summary.failures;
            continue;
        }
        ++count;
        for (int j = 0; j < n_params; ++j) {
            const double err = draw.estimate(j) - truth(j);
            bias(j) += err;
            mse(j) += err * err;
            const double half = z * draw.std_error(j);
            if (truth(j) >= draw.estimate(j) - half && truth(j) <= draw.estimate(j) + half)
                covered(j) += 1.0;
        }
        summary.gcs.mean += draw.gcs.mean;
        summary.gcs.median += draw.gcs.median;
        summary.gcs.sd += draw.gcs.sd;
        summary.gcs.skewness += draw.gcs.skewness;
        summary.gcs.kurtosis_excess += draw.gcs.kurtosis_excess;
        summary.rq.mean += draw.rq.mean;
        summary.rq.median += draw.rq.median;
        summary.rq.sd += draw.rq.sd;
        summary.rq.skewness += draw.rq.skewness;
        summary.rq.kurtosis_excess += draw.rq.kurtosis_excess;
    }
    if (count == 0.0) throw std::runtime_error("estimation study: no replication converged");
    summary.used = static_cast<int>(count);
    for (auto* stats : {&summary.gcs, &summary.rq}) {
        stats->mean /= count;
        stats->median /= count;
        stats->sd /= count;
        stats->skewness /= count;
        stats->kurtosis_excess /= count;
    }

    std::vector<std::string> names{"alpha", "beta0"};
    for (int j = 1; j < static_cast<int>(config.beta.size()); ++j)
        names.push_back("beta" + std::to_string(j));
    for (int j = 0; j < n_params; ++j) {
        ParameterSummary ps;
        ps.name = names[j];
        ps.truth = truth(j);
        ps.bias = bias(j) / count;
        ps.mse = mse(j) / count;
        ps.coverage = covered(j) / count;
        summary.parameters.push_back(ps);
    }
    return summary;
}

SelectionSummary run_selection_study(const StudyConfig& config, const EmSettings& settings,
                                     const std::vector<std::vector<MixtureFamily>>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("no candidate families");
    static constexpr std::array<const char*, 5> kCriteria{"aic", "bic", "aicc", "hic", "rmse"};

    struct Draw {
        bool ok = false;
        std::array<int, 5> pick{};  // candidate index per criterion
        bool ic_agree = true;
    };
    std::vector<Draw> draws(config.replications);

    parallel_for(config.replications, config.threads, [&](int r) {
        Draw& draw = draws[r];
        try {
            const Dataset data = generate_dataset(config, r);
            std::vector<CriteriaReport> reports;
            for (const auto& grid : candidates) {
                EmSettings local = settings;
                local.nu_grid = grid;
                ModelSpec spec{config.quantile_level, grid.front()};
                ProfileResult profiled = profile_nu(spec, data, local);
                reports.push_back(criteria(profiled.fit, spec, data));
            }
            auto pick_by = [&](auto member) {
                int best = 0;
                for (int c = 1; c < static_cast<int>(reports.size()); ++c)
                    if (reports[c].*member < reports[best].*member) best = c;
                return best;
            };
            draw.pick[0] = pick_by(&CriteriaReport::aic);
            draw.pick[1] = pick_by(&CriteriaReport::bic);
            draw.pick[2] = pick_by(&CriteriaReport::aicc);
            draw.pick[3] = pick_by(&CriteriaReport::hic);
            draw.pick[4] = pick_by(&CriteriaReport::rmse);
            draw.ic_agree = draw.pick[0] == draw.pick[1] && draw.pick[1] == draw.pick[2] &&
                            draw.pick[2] == draw.pick[3];
            draw.ok = true;
        } catch (const std::exception&) {
            draw.ok = false;
        }
    });

    SelectionSummary summary;
    for (const auto& grid : candidates) summary.candidate_names.push_back(grid.front().name());
    int correct_candidate = -1;
    for (int c = 0; c < static_cast<int>(candidates.size()); ++c)
        if (candidates[c].front().kind == config.family.kind) correct_candidate = c;
    if (correct_candidate < 0)
        throw std::invalid_argument("generating family missing from the candidate set");

    std::array<double, 5> success{};
    double agree = 0.0, count = 0.0;
    for (const auto& draw : draws) {
        if (!draw.ok) {
            ++summary.failures;
            continue;
        }
        ++count;
        for (int m = 0; m < 5; ++m)
            if (draw.pick[m] == correct_candidate) success[m] += 1.0;
        if (draw.ic_agree) agree += 1.0;
    }
    if (count == 0.0) throw std::runtime_error("selection study: no replication converged");
    summary.used = static_cast<int>(count);
    for (int m = 0; m < 5; ++m) summary.success_rate[kCriteria[m]] = success[m] / count;
    summary.criteria_agreement = agree / count;
    return summary;
}

RejectionSummary run_test_study(const StudyConfig& config, const EmSettings& settings,
                                const HypothesisSpec& hyp, const std::vector<double>& deltas) {
    RejectionSummary summary;
    summary.deltas = deltas;
    summary.rates.resize(deltas.size());
    summary.used.resize(deltas.size(), 0);
    summary.failures.resize(deltas.size(), 0);

    std::array<double, 3> critical{};
    for (int l = 0; l < 3; ++l) {
        // chi2 upper quantile via the gamma inverse.
        const double target = summary.levels[l];
        double lo = 0.0, hi = 100.0;
        while (chi_squared_upper_tail(hi, hyp.df()) > target) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (chi_squared_upper_tail(mid, hyp.df()) > target ? lo : hi) = mid;
        }
        critical[l] = 0.5 * (lo + hi);
    }

    ModelSpec spec{config.quantile_level, config.family};
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        StudyConfig generating = config;
        for (std::size_t k = 0; k < hyp.beta_indices.size(); ++k)
            generating.beta(hyp.beta_indices[k]) = deltas[d];

        struct Draw {
            bool ok = false;
            std::array<double, 4> stat{};
        };
        std::vector<Draw> draws(config.replications);
        parallel_for(config.replications, config.threads, [&](int r) {
            Draw& draw = draws[r];
            try {
                const Dataset data = generate_dataset(generating, r);
                const TestReport report = run_tests(spec, data, settings, hyp);
                draw.stat = {report.wald, report.lr, report.score, report.gradient};
                draw.ok = true;
            } catch (const std::exception&) {
                draw.ok = false;
            }
        });

        auto& rates = summary.rates[d];
        for (auto& per_stat : rates) per_stat.fill(0.0);
        double count = 0.0;
        for (const auto& draw : draws) {
            if (!draw.ok) {
                ++summary.failures[d];
                continue;
            }
            ++count;
            for (int s = 0; s < 4; ++s)
                for (int l = 0; l < 3; ++l)
                    if (draw.stat[s] > critical[l]) rates[s][l] += 1.0;
        }
        if (count == 0.0) throw std::runtime_error("test study: no replication converged");
        summary.used[d] = static_cast<int>(count);
        for (int s = 0; s < 4; ++s)
            for (int l = 0; l < 3; ++l) rates[s][l] /= count;
    }
    return summary;
}

}  // namespace qsbs
