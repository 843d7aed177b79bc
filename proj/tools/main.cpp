#include "qsbs/config.hpp"
#include "qsbs/csv.hpp"
#include "qsbs/distribution.hpp"
#include "qsbs/em.hpp"
#include "qsbs/inference.hpp"
#include "qsbs/mc.hpp"
#include "qsbs/report.hpp"
#include "qsbs/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

using qsbs::format_double;

// Flag values override config-file values; both funnel through one map so
// the config hash covers the effective settings.
struct Options {
    std::map<std::string, std::string> values;

    void set_default(const std::string& key, const std::string& value) {
        if (!values.count(key)) values[key] = value;
    }
    std::string get(const std::string& key) const {
        auto it = values.find(key);
        return it == values.end() ? std::string{} : it->second;
    }
    bool has(const std::string& key) const {
        auto it = values.find(key);
        return it != values.end() && !it->second.empty();
    }
    double number(const std::string& key) const { return std::stod(values.at(key)); }
};

struct FlagSpec {
    std::string name;
    std::string help;
};

void add_string_option(CLI::App* cmd, const std::string& name, const std::string& help,
                       std::map<std::string, std::string>* flags) {
    cmd->add_option_function<std::string>(
        "--" + name, [flags, name](const std::string& v) { (*flags)[name] = v; }, help);
}

Options merge_options(const std::map<std::string, std::string>& flags) {
    Options opt;
    if (auto it = flags.find("config"); it != flags.end())
        opt.values = qsbs::read_config_file(it->second);
    for (const auto& [key, value] : flags) opt.values[key] = value;
    return opt;
}

qsbs::MixtureFamily fixed_family(qsbs::Kind kind, const Options& opt) {
    switch (kind) {
        case qsbs::Kind::Normal:
            return qsbs::MixtureFamily::normal();
        case qsbs::Kind::StudentT:
            return qsbs::MixtureFamily::student_t(opt.number("nu"));
        case qsbs::Kind::Slash:
            return qsbs::MixtureFamily::slash(opt.number("nu"));
        case qsbs::Kind::ContaminatedNormal:
            return qsbs::MixtureFamily::contaminated_normal(opt.number("nu"),
                                                            opt.number("delta"));
    }
    throw std::invalid_argument("unreachable family kind");
}

std::vector<qsbs::MixtureFamily> family_grid(const Options& opt) {
    const qsbs::Kind kind = qsbs::parse_family_kind(opt.get("family"));
    if (kind == qsbs::Kind::Normal) return {qsbs::MixtureFamily::normal()};
    if (opt.has("nu") && (kind != qsbs::Kind::ContaminatedNormal || opt.has("delta")))
        return {fixed_family(kind, opt)};
    return qsbs::build_nu_grid(kind, opt.get("nu-grid"), opt.get("delta-grid"));
}

qsbs::IngestResult load_dataset(const Options& opt) {
    if (!opt.has("input")) throw std::invalid_argument("--input is required");
    if (!opt.has("response")) throw std::invalid_argument("--response is required");
    return qsbs::ingest_csv(opt.get("input"), opt.get("response"),
                            qsbs::parse_name_list(opt.get("covariates")));
}

std::filesystem::path output_dir(const Options& opt) {
    const std::string dir = opt.has("out") ? opt.get("out") : ".";
    std::filesystem::create_directories(dir);
    return dir;
}

bool wants_format(const Options& opt, const std::string& format) {
    const std::string formats = opt.has("format") ? opt.get("format") : "json,txt,csv";
    for (const auto& f : qsbs::parse_name_list(formats))
        if (f == format) return true;
    return false;
}

qsbs::EmSettings em_settings(const Options& opt) {
    qsbs::EmSettings settings;
    if (opt.has("tolerance")) settings.tolerance = opt.number("tolerance");
    if (opt.has("max-iterations")) settings.max_iterations = std::stoi(opt.get("max-iterations"));
    return settings;
}

std::vector<qsbs::FitOutput> run_fits(const Options& opt, const qsbs::Dataset& data) {
    const std::vector<double> q_list = qsbs::parse_number_list(
        opt.has("q") ? opt.get("q") : std::string("0.5"));
    if (q_list.empty()) throw std::invalid_argument("--q needs at least one level");
    qsbs::EmSettings settings = em_settings(opt);
    settings.nu_grid = family_grid(opt);

    std::vector<qsbs::FitOutput> fits;
    for (double q : q_list) {
        qsbs::ModelSpec spec{q, settings.nu_grid.front()};
        qsbs::ProfileResult profiled = qsbs::profile_nu(spec, data, settings);
        qsbs::FitOutput out;
        out.quantile_level = q;
        out.fit = profiled.fit;
        out.trace = std::move(profiled.trace);
        out.crit = qsbs::criteria(out.fit, spec, data);
        fits.push_back(std::move(out));
    }
    return fits;
}

nlohmann::json report_header(const Options& opt) {
    return {{"tool", qsbs::kToolName},
            {"version", qsbs::kToolVersion},
            {"config_hash", qsbs::config_hash(opt.values)}};
}

void write_trace_csv(const std::filesystem::path& dir, const Options& opt,
                     const std::vector<qsbs::FitOutput>& fits, const qsbs::Dataset& data) {
    std::vector<std::string> header{"q", "alpha", "alpha_se"};
    for (Eigen::Index k = 0; k < data.n_coef(); ++k) {
        header.push_back(data.column_names[k]);
        header.push_back(data.column_names[k] + "_se");
    }
    header.insert(header.end(), {"nu", "delta", "loglik"});
    std::vector<std::vector<std::string>> rows;
    for (const auto& fit : fits) {
        std::vector<std::string> row{format_double(fit.quantile_level),
                                     format_double(fit.fit.theta.alpha),
                                     format_double(fit.fit.std_errors(0))};
        for (Eigen::Index k = 0; k < data.n_coef(); ++k) {
            row.push_back(format_double(fit.fit.theta.beta(k)));
            row.push_back(format_double(fit.fit.std_errors(k + 1)));
        }
        row.push_back(format_double(fit.fit.family.nu));
        row.push_back(format_double(fit.fit.family.delta));
        row.push_back(format_double(fit.fit.loglik));
        rows.push_back(std::move(row));
    }
    qsbs::write_csv_file(dir / "trace_q.csv", qsbs::config_hash(opt.values), header, rows);
}

int cmd_fit(const Options& opt) {
    const qsbs::IngestResult loaded = load_dataset(opt);
    const auto fits = run_fits(opt, loaded.data);
    const auto dir = output_dir(opt);

    nlohmann::json body = report_header(opt);
    body["response_summary"] = {{"mean", loaded.summary.stats.mean},
                                {"median", loaded.summary.stats.median},
                                {"sd", loaded.summary.stats.sd},
                                {"cv", loaded.summary.cv},
                                {"skewness", loaded.summary.stats.skewness},
                                {"kurtosis_excess", loaded.summary.stats.kurtosis_excess},
                                {"min", loaded.summary.min},
                                {"max", loaded.summary.max},
                                {"range", loaded.summary.range},
                                {"n", loaded.summary.n}};
    nlohmann::json fit_array = nlohmann::json::array();
    for (const auto& fit : fits) fit_array.push_back(qsbs::fit_to_json(fit, loaded.data));
    body["fits"] = fit_array;
    if (wants_format(opt, "json")) qsbs::write_json_file(dir / "fit.json", body);
    if (wants_format(opt, "txt"))
        qsbs::write_text_file(dir / "fit.txt", qsbs::render_fit_table(fits, loaded.data));
    if (wants_format(opt, "csv") && fits.size() > 1)
        write_trace_csv(dir, opt, fits, loaded.data);

    bool all_converged = true;
    for (const auto& fit : fits) all_converged = all_converged && fit.fit.converged;
    if (!all_converged) {
        std::cerr << qsbs::error_object("non-convergence", "one or more fits did not converge")
                         .dump()
                  << "\n";
        return 2;
    }
    return 0;
}

int cmd_test(const Options& opt) {
    const qsbs::IngestResult loaded = load_dataset(opt);
    const qsbs::Dataset& data = loaded.data;
    if (!opt.has("restrict")) throw std::invalid_argument("--restrict is required");

    qsbs::HypothesisSpec hyp;
    std::vector<std::string> restricted_names = qsbs::parse_name_list(opt.get("restrict"));
    for (const auto& name : restricted_names) {
        auto it = std::find(data.column_names.begin(), data.column_names.end(), name);
        if (it == data.column_names.end())
            throw std::invalid_argument("hypothesis column '" + name + "' is not in the model");
        hyp.beta_indices.push_back(it - data.column_names.begin());
    }
    const std::vector<double> values =
        opt.has("values") ? qsbs::parse_number_list(opt.get("values"))
                          : std::vector<double>(hyp.beta_indices.size(), 0.0);
    if (values.size() != hyp.beta_indices.size())
        throw std::invalid_argument("--values length must match --restrict");
    hyp.values = values;

    const std::vector<double> q_list =
        qsbs::parse_number_list(opt.has("q") ? opt.get("q") : std::string("0.5"));
    qsbs::EmSettings settings = em_settings(opt);
    settings.nu_grid = family_grid(opt);

    nlohmann::json body = report_header(opt);
    nlohmann::json tests = nlohmann::json::array();
    for (double q : q_list) {
        qsbs::ModelSpec spec{q, settings.nu_grid.front()};
        // Profile the extra parameter on the unrestricted model, then test
        // with it held fixed.
        qsbs::ProfileResult profiled = qsbs::profile_nu(spec, data, settings);
        spec.family = profiled.fit.family;
        qsbs::TestReport report = qsbs::run_tests(spec, data, settings, hyp);
        nlohmann::json row = qsbs::tests_to_json(report, restricted_names);
        row["q"] = q;
        row["model"] = {{"family", spec.family.name()},
                        {"nu", spec.family.nu},
                        {"delta", spec.family.delta}};
        tests.push_back(row);
    }
    body["tests"] = tests;
    const auto dir = output_dir(opt);
    qsbs::write_json_file(dir / "tests.json", body);
    return 0;
}

int cmd_residuals(const Options& opt) {
    const qsbs::IngestResult loaded = load_dataset(opt);
    const auto fits = run_fits(opt, loaded.data);
    if (fits.size() != 1)
        throw std::invalid_argument("residuals expects a single --q level");
    const auto& fit = fits.front();
    qsbs::ModelSpec spec{fit.quantile_level, fit.fit.family};

    const Eigen::VectorXd gcs = qsbs::gcs_residuals(fit.fit, spec, loaded.data);
    const Eigen::VectorXd rq = qsbs::rq_residuals(fit.fit, spec, loaded.data);
    const int bands = opt.has("bands") ? std::stoi(opt.get("bands")) : 100;
    const std::uint64_t seed = opt.has("seed") ? std::stoull(opt.get("seed")) : 1;
    const qsbs::Envelope env =
        qsbs::simulated_envelope(fit.fit, spec, loaded.data, bands, seed);

    const auto dir = output_dir(opt);
    const std::string hash = qsbs::config_hash(opt.values);
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < gcs.size(); ++i)
        rows.push_back({std::to_string(i + 1), format_double(gcs(i)), format_double(rq(i))});
    qsbs::write_csv_file(dir / "residuals.csv", hash, {"index", "gcs", "rq"}, rows);
    qsbs::write_envelope_csv(dir / "envelope_gcs.csv", hash, env.gcs);
    qsbs::write_envelope_csv(dir / "envelope_rq.csv", hash, env.rq);

    nlohmann::json body = report_header(opt);
    body["fit"] = qsbs::fit_to_json(fit, loaded.data);
    body["gcs_summary"] = qsbs::summary_stats_to_json(
        qsbs::summarize({gcs.data(), static_cast<std::size_t>(gcs.size())}));
    body["rq_summary"] = qsbs::summary_stats_to_json(
        qsbs::summarize({rq.data(), static_cast<std::size_t>(rq.size())}));
    body["bands"] = bands;
    qsbs::write_json_file(dir / "residuals.json", body);
    return 0;
}

qsbs::StudyConfig study_config(const Options& opt) {
    qsbs::StudyConfig config;
    config.n = std::stoi(opt.get("n"));
    config.quantile_level = opt.number("q");
    config.alpha = opt.number("alpha");
    const std::vector<double> beta = qsbs::parse_number_list(opt.get("beta"));
    config.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
    config.family = fixed_family(qsbs::parse_family_kind(opt.get("family")), opt);
    config.replications = std::stoi(opt.get("replications"));
    config.seed = opt.has("seed") ? std::stoull(opt.get("seed")) : 1;
    config.threads = opt.has("threads") ? std::stoi(opt.get("threads")) : 0;
    return config;
}

int cmd_simulate(const Options& opt) {
    const std::string study = opt.get("study");
    const qsbs::StudyConfig config = study_config(opt);
    const qsbs::EmSettings settings = em_settings(opt);
    const auto dir = output_dir(opt);
    const std::string hash = qsbs::config_hash(opt.values);

    nlohmann::json body = report_header(opt);
    nlohmann::json config_echo;
    for (const auto& [key, value] : opt.values) config_echo[key] = value;
    body["config"] = config_echo;

    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    const std::string family = config.family.name();
    auto cell_prefix = [&](std::vector<std::string>& row) {
        row.insert(row.end(),
                   {study, family, std::to_string(config.n),
                    format_double(config.quantile_level), format_double(config.alpha)});
    };

    if (study == "estimation") {
        const qsbs::EstimationSummary summary = qsbs::run_estimation_study(config, settings);
        body["results"] = qsbs::estimation_to_json(summary);
        header = {"study", "family", "n",  "q",  "alpha_true", "parameter",
                  "truth", "bias",   "mse", "cp", "used",       "failures"};
        for (const auto& p : summary.parameters) {
            std::vector<std::string> row;
            cell_prefix(row);
            row.insert(row.end(),
                       {p.name, format_double(p.truth), format_double(p.bias),
                        format_double(p.mse), format_double(p.coverage),
                        std::to_string(summary.used), std::to_string(summary.failures)});
            rows.push_back(std::move(row));
        }
    } else if (study == "selection") {
        std::vector<std::vector<qsbs::MixtureFamily>> candidates;
        for (const auto& name : qsbs::parse_name_list(
                 opt.has("candidates") ? opt.get("candidates") : std::string("cn,slash,t"))) {
            const qsbs::Kind kind = qsbs::parse_family_kind(name);
            candidates.push_back(qsbs::build_nu_grid(kind, opt.get("nu-grid-" + name),
                                                     opt.get("delta-grid-" + name)));
        }
        const qsbs::SelectionSummary summary =
            qsbs::run_selection_study(config, settings, candidates);
        body["results"] = qsbs::selection_to_json(summary);
        header = {"study", "family", "n", "q", "alpha_true", "criterion", "success_rate",
                  "used",  "failures"};
        for (const auto& [criterion, rate] : summary.success_rate) {
            std::vector<std::string> row;
            cell_prefix(row);
            row.insert(row.end(), {criterion, format_double(rate), std::to_string(summary.used),
                                   std::to_string(summary.failures)});
            rows.push_back(std::move(row));
        }
    } else if (study == "test-size") {
        qsbs::HypothesisSpec hyp;
        const std::vector<double> hyp_index = qsbs::parse_number_list(
            opt.has("hypothesis") ? opt.get("hypothesis")
                                  : std::to_string(config.beta.size() - 1));
        for (double raw : hyp_index) {
            hyp.beta_indices.push_back(static_cast<Eigen::Index>(raw));
            hyp.values.push_back(0.0);
        }
        const std::vector<double> deltas = qsbs::parse_number_list(
            opt.has("deltas") ? opt.get("deltas") : std::string("0"));
        const qsbs::RejectionSummary summary =
            qsbs::run_test_study(config, settings, hyp, deltas);
        body["results"] = qsbs::rejection_to_json(summary);
        header = {"study", "family", "n",    "q",    "alpha_true", "delta", "statistic",
                  "level", "rate",   "used", "failures"};
        for (std::size_t d = 0; d < summary.deltas.size(); ++d) {
            for (int s = 0; s < 4; ++s) {
                for (int l = 0; l < 3; ++l) {
                    std::vector<std::string> row;
                    cell_prefix(row);
                    row.insert(row.end(),
                               {format_double(summary.deltas[d]),
                                qsbs::RejectionSummary::statistic_names[s],
                                format_double(summary.levels[l]),
                                format_double(summary.rates[d][s][l]),
                                std::to_string(summary.used[d]),
                                std::to_string(summary.failures[d])});
                    rows.push_back(std::move(row));
                }
            }
        }
    } else {
        throw std::invalid_argument("unknown study '" + study +
                                    "' (expected estimation, selection or test-size)");
    }

    qsbs::write_json_file(dir / "study_summary.json", body);
    qsbs::write_csv_file(dir / "study_summary.csv", hash, header, rows);
    return 0;
}

int cmd_ingest_check(const Options& opt) {
    if (!opt.has("input")) throw std::invalid_argument("--input is required");
    const std::vector<std::string> expected = qsbs::parse_name_list(
        opt.has("columns") ? opt.get("columns") : std::string("amount,optime,legrep,month"));
    const auto header = qsbs::validate_csv_schema(opt.get("input"), expected);
    nlohmann::json body = report_header(opt);
    body["header"] = header;
    body["validated_columns"] = expected;
    if (opt.has("response")) {
        std::vector<std::string> covariates;
        for (const auto& c : expected)
            if (c != opt.get("response")) covariates.push_back(c);
        const qsbs::IngestResult loaded =
            qsbs::ingest_csv(opt.get("input"), opt.get("response"), covariates);
        body["response_summary"] = {{"mean", loaded.summary.stats.mean},
                                    {"median", loaded.summary.stats.median},
                                    {"sd", loaded.summary.stats.sd},
                                    {"cv", loaded.summary.cv},
                                    {"skewness", loaded.summary.stats.skewness},
                                    {"kurtosis_excess", loaded.summary.stats.kurtosis_excess},
                                    {"min", loaded.summary.min},
                                    {"max", loaded.summary.max},
                                    {"range", loaded.summary.range},
                                    {"n", loaded.summary.n}};
    }
    std::cout << body.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(qsbs::kToolName) + " " + qsbs::kToolVersion +
                 " - quantile regression for positive, heavy-tailed responses"};
    app.require_subcommand(1);

    std::map<std::string, std::map<std::string, std::string>> flags;
    const std::vector<FlagSpec> common{
        {"config", "flat key = value file; flags override its entries"},
        {"input", "CSV file with a header row"},
        {"response", "response column name"},
        {"covariates", "comma-separated covariate column names"},
        {"q", "quantile level(s): list or start:stop:step"},
        {"family", "normal, cn, slash or t"},
        {"nu", "fixed extra parameter"},
        {"delta", "fixed contamination scale (cn only)"},
        {"nu-grid", "profile grid for nu: list or start:stop:step"},
        {"delta-grid", "profile grid for delta (cn only)"},
        {"seed", "random seed"},
        {"out", "output directory"},
        {"format", "any of json,txt,csv (default all)"},
        {"tolerance", "EM stopping tolerance"},
        {"max-iterations", "EM iteration budget"},
    };

    auto add_common = [&](CLI::App* cmd, const std::string& name) {
        for (const auto& spec : common) add_string_option(cmd, spec.name, spec.help, &flags[name]);
    };

    CLI::App* fit = app.add_subcommand("fit", "estimate the model at one or more quantile levels");
    add_common(fit, "fit");

    CLI::App* test = app.add_subcommand("test", "Wald, score, LR and gradient tests");
    add_common(test, "test");
    add_string_option(test, "restrict", "comma-separated coefficient columns under the null",
                      &flags["test"]);
    add_string_option(test, "values", "restricted values (default all zero)", &flags["test"]);

    CLI::App* residuals =
        app.add_subcommand("residuals", "GCS and RQ residuals with simulated envelopes");
    add_common(residuals, "residuals");
    add_string_option(residuals, "bands", "simulated envelope bands (default 100)",
                      &flags["residuals"]);

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo studies from a config file");
    add_common(simulate, "simulate");
    for (const char* key : {"study", "n", "alpha", "beta", "replications", "threads",
                            "candidates", "hypothesis", "deltas"})
        add_string_option(simulate, key, "study parameter", &flags["simulate"]);

    CLI::App* ingest = app.add_subcommand("ingest-check", "validate a CSV against a column schema");
    add_common(ingest, "ingest-check");
    add_string_option(ingest, "columns", "expected numeric columns", &flags["ingest-check"]);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return cmd_fit(merge_options(flags["fit"]));
        if (test->parsed()) return cmd_test(merge_options(flags["test"]));
        if (residuals->parsed()) return cmd_residuals(merge_options(flags["residuals"]));
        if (simulate->parsed()) return cmd_simulate(merge_options(flags["simulate"]));
        if (ingest->parsed()) return cmd_ingest_check(merge_options(flags["ingest-check"]));
    } catch (const std::invalid_argument& e) {
        std::cerr << qsbs::error_object("invalid-argument", e.what()).dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << qsbs::error_object("runtime", e.what()).dump() << "\n";
        return 1;
    }
    return 0;
}
