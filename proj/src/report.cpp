#include "qsbs/report.hpp"

#include "qsbs/version.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qsbs {

std::string format_double(double v) {
    char buf[32];
    // Shortest round-trip: try increasing precision until strtod agrees.
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

namespace {

nlohmann::json family_to_json(const MixtureFamily& family) {
    nlohmann::json j{{"family", family.name()}};
    if (family.kind == Kind::Slash || family.kind == Kind::StudentT) j["nu"] = family.nu;
    if (family.kind == Kind::ContaminatedNormal) {
        j["nu"] = family.nu;
        j["delta"] = family.delta;
    }
    return j;
}

}  // namespace

nlohmann::json fit_to_json(const FitOutput& out, const Dataset& data) {
    nlohmann::json j;
    j["q"] = out.quantile_level;
    j["model"] = family_to_json(out.fit.family);
    j["estimates"]["alpha"] = out.fit.theta.alpha;
    nlohmann::json beta = nlohmann::json::object();
    for (Eigen::Index k = 0; k < out.fit.theta.beta.size(); ++k)
        beta[data.column_names[k]] = out.fit.theta.beta(k);
    j["estimates"]["beta"] = beta;
    nlohmann::json se = nlohmann::json::object();
    se["alpha"] = out.fit.std_errors(0);
    for (Eigen::Index k = 0; k < out.fit.theta.beta.size(); ++k)
        se[data.column_names[k]] = out.fit.std_errors(k + 1);
    j["std_errors"] = se;
    j["loglik"] = out.fit.loglik;
    j["surrogate_value"] = out.fit.q_value;
    j["criteria"] = {{"aic", out.crit.aic},   {"bic", out.crit.bic}, {"aicc", out.crit.aicc},
                     {"hic", out.crit.hic},   {"rmse", out.crit.rmse}, {"k", out.crit.k},
                     {"n", out.crit.n}};
    j["convergence"] = {{"converged", out.fit.converged},
                        {"iterations", out.fit.iterations},
                        {"message", out.fit.message}};
    if (!out.trace.empty()) {
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& point : out.trace) {
            nlohmann::json row = family_to_json(point.family);
            row["loglik"] = point.loglik;
            row["converged"] = point.converged;
            trace.push_back(row);
        }
        j["profile_trace"] = trace;
    }
    return j;
}

nlohmann::json tests_to_json(const TestReport& report, const std::vector<std::string>& names) {
    nlohmann::json j;
    j["df"] = report.df;
    j["restricted_columns"] = names;
    j["statistics"] = {{"wald", report.wald},
                       {"lr", report.lr},
                       {"score", report.score},
                       {"gradient", report.gradient}};
    j["p_values"] = {{"wald", report.p_wald},
                     {"lr", report.p_lr},
                     {"score", report.p_score},
                     {"gradient", report.p_gradient}};
    j["clamped"] = report.clamped;
    j["loglik"] = {{"unrestricted", report.loglik_unrestricted},
                   {"restricted", report.loglik_restricted},
                   {"lr_observed", report.lr_observed}};
    return j;
}

nlohmann::json summary_stats_to_json(const SummaryStats& s) {
    return {{"mean", s.mean},
            {"median", s.median},
            {"sd", s.sd},
            {"skewness", s.skewness},
            {"kurtosis_excess", s.kurtosis_excess}};
}

nlohmann::json estimation_to_json(const EstimationSummary& s) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : s.parameters)
        params.push_back({{"parameter", p.name},
                          {"truth", p.truth},
                          {"bias", p.bias},
                          {"mse", p.mse},
                          {"cp", p.coverage}});
    return {{"parameters", params},
            {"gcs", summary_stats_to_json(s.gcs)},
            {"rq", summary_stats_to_json(s.rq)},
            {"used", s.used},
            {"failures", s.failures}};
}

nlohmann::json selection_to_json(const SelectionSummary& s) {
    return {{"candidates", s.candidate_names},
            {"success_rate", s.success_rate},
            {"criteria_agreement", s.criteria_agreement},
            {"used", s.used},
            {"failures", s.failures}};
}

nlohmann::json rejection_to_json(const RejectionSummary& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t d = 0; d < s.deltas.size(); ++d) {
        for (int stat = 0; stat < 4; ++stat) {
            for (int l = 0; l < 3; ++l) {
                rows.push_back({{"delta", s.deltas[d]},
                                {"statistic", RejectionSummary::statistic_names[stat]},
                                {"level", s.levels[l]},
                                {"rate", s.rates[d][stat][l]},
                                {"used", s.used[d]},
                                {"failures", s.failures[d]}});
            }
        }
    }
    return {{"rates", rows}};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

void write_json_file(const std::string& path, const nlohmann::json& body) {
    write_text_file(path, body.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    return j;
}

void write_csv_file(const std::string& path, const std::string& hash,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    out << "# config_hash=" << hash << "\n";
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
        out << "\n";
    }
    write_text_file(path, out.str());
}

std::string render_fit_table(const std::vector<FitOutput>& fits, const Dataset& data) {
    std::ostringstream out;
    out << kToolName << " " << kToolVersion << " fit report\n";
    for (const auto& fit : fits) {
        out << "\nq = " << fit.quantile_level << "  family = " << fit.fit.family.name();
        if (fit.fit.family.kind != Kind::Normal) out << "  nu = " << fit.fit.family.nu;
        if (fit.fit.family.kind == Kind::ContaminatedNormal)
            out << "  delta = " << fit.fit.family.delta;
        out << (fit.fit.converged ? "" : "  [NOT CONVERGED]") << "\n";
        char line[128];
        std::snprintf(line, sizeof(line), "  %-12s %14s %12s\n", "parameter", "estimate", "se");
        out << line;
        auto print_row = [&](const std::string& name, double est, double se) {
            std::snprintf(line, sizeof(line), "  %-12s %14.6f %12.6f\n", name.c_str(), est, se);
            out << line;
        };
        print_row("alpha", fit.fit.theta.alpha, fit.fit.std_errors(0));
        for (Eigen::Index k = 0; k < fit.fit.theta.beta.size(); ++k)
            print_row(data.column_names[k], fit.fit.theta.beta(k), fit.fit.std_errors(k + 1));
        std::snprintf(line, sizeof(line),
                      "  loglik %.4f  AIC %.3f  BIC %.3f  AICc %.3f  HIC %.3f  RMSE %.4f\n",
                      fit.fit.loglik, fit.crit.aic, fit.crit.bic, fit.crit.aicc, fit.crit.hic,
                      fit.crit.rmse);
        out << line;
    }
    return out.str();
}

void write_envelope_csv(const std::string& path, const std::string& hash,
                        const EnvelopeBand& band) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < band.observed.size(); ++i) {
        rows.push_back({std::to_string(i + 1), format_double(band.theoretical[i]),
                        format_double(band.observed[i]), format_double(band.lower[i]),
                        format_double(band.median[i]), format_double(band.upper[i])});
    }
    write_csv_file(path, hash, {"order", "theoretical", "observed", "lower", "median", "upper"},
                   rows);
}

nlohmann::json error_object(const std::string& type, const std::string& message) {
    return {{"error", {{"type", type}, {"message", message}}}};
}

}  // namespace qsbs
