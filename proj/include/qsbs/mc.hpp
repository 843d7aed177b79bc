#pragma once

#include "qsbs/inference.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>

namespace qsbs {

struct StudyConfig {
    int n = 100;
    double quantile_level = 0.5;
    double alpha = 0.5;
    Eigen::VectorXd beta;  // intercept first
    MixtureFamily family;
    int replications = 500;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
};

/// Fresh uniform(0,1) covariates and model responses for one replication.
/// Deterministic in (config.seed, replication_index) and independent of
/// execution order.
Dataset generate_dataset(const StudyConfig& config, int replication_index);

struct ParameterSummary {
    std::string name;
    double truth = 0.0;
    double bias = 0.0;
    double mse = 0.0;
    double coverage = 0.0;
};

struct EstimationSummary {
    std::vector<ParameterSummary> parameters;
    SummaryStats gcs;  // per-replication residual summaries, averaged
    SummaryStats rq;
    int used = 0;
    int failures = 0;
};

/// Bias / MSE / coverage of the estimates with the family's extra parameter
/// held at its generating value, plus residual summary statistics.
EstimationSummary run_estimation_study(const StudyConfig& config, const EmSettings& settings);

struct SelectionSummary {
    std::vector<std::string> candidate_names;
    std::map<std::string, double> success_rate;  // per criterion
    double criteria_agreement = 0.0;  // fraction where the four IC picks agree
    int used = 0;
    int failures = 0;
};

/// Fits every candidate family (profiling its extra parameter over the given
/// grid) and scores how often each criterion selects the generating family.
SelectionSummary run_selection_study(const StudyConfig& config, const EmSettings& settings,
                                     const std::vector<std::vector<MixtureFamily>>& candidates);

struct RejectionSummary {
    std::vector<double> levels{0.01, 0.05, 0.1};
    std::vector<double> deltas;
    // rates[d][statistic][level]; statistics ordered wald, lr, score, gradient.
    std::vector<std::array<std::array<double, 3>, 4>> rates;
    std::vector<int> used;
    std::vector<int> failures;
    static constexpr std::array<const char*, 4> statistic_names{"wald", "lr", "score",
                                                                "gradient"};
};

/// Size (delta = 0) and power of the four tests. The tested coefficients are
/// set to delta when generating, then constrained to hyp.values when fitting
/// the restricted model.
RejectionSummary run_test_study(const StudyConfig& config, const EmSettings& settings,
                                const HypothesisSpec& hyp, const std::vector<double>& deltas);

/// Runs fn(0..count-1) on the requested number of workers; any schedule
/// produces identical results because work items only touch their own slot.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace qsbs
