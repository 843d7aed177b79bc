#pragma once

#include "qsbs/inference.hpp"
#include "qsbs/regression.hpp"

#include <string>
#include <vector>

namespace qsbs {

struct ResponseSummary {
    SummaryStats stats;
    double cv = 0.0;  // sd / mean
    double min = 0.0, max = 0.0, range = 0.0;
    Eigen::Index n = 0;
};

struct IngestResult {
    Dataset data;
    ResponseSummary summary;
};

/// Loads a comma-separated file with a header row, selects the response and
/// covariate columns by name, prepends the intercept and validates the
/// design. Missing or non-numeric cells, nonpositive responses and rank
/// deficiency raise errors naming the offending line or columns.
IngestResult ingest_csv(const std::string& path, const std::string& response_column,
                        const std::vector<std::string>& covariate_columns);

/// Checks that the file's header contains the expected columns and that the
/// named columns parse as numeric; returns the header actually found.
std::vector<std::string> validate_csv_schema(const std::string& path,
                                             const std::vector<std::string>& expected_columns);

}  // namespace qsbs
