#pragma once

#include "qsbs/csv.hpp"
#include "qsbs/em.hpp"
#include "qsbs/inference.hpp"
#include "qsbs/mc.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace qsbs {

/// Shortest representation that parses back to the identical double.
std::string format_double(double v);

struct FitOutput {
    double quantile_level = 0.5;
    FitResult fit;
    CriteriaReport crit;
    std::vector<ProfilePoint> trace;
};

nlohmann::json fit_to_json(const FitOutput& out, const Dataset& data);
nlohmann::json tests_to_json(const TestReport& report, const std::vector<std::string>& names);
nlohmann::json summary_stats_to_json(const SummaryStats& s);
nlohmann::json estimation_to_json(const EstimationSummary& s);
nlohmann::json selection_to_json(const SelectionSummary& s);
nlohmann::json rejection_to_json(const RejectionSummary& s);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& body);
nlohmann::json read_json_file(const std::string& path);

/// Every CSV starts with `# config_hash=<hex>` then a header row.
void write_csv_file(const std::string& path, const std::string& hash,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

std::string render_fit_table(const std::vector<FitOutput>& fits, const Dataset& data);
void write_envelope_csv(const std::string& path, const std::string& hash,
                        const EnvelopeBand& band);

nlohmann::json error_object(const std::string& type, const std::string& message);

}  // namespace qsbs
