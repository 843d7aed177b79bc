#include "qsbs/csv.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qsbs {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto begin = s.begin(), end = s.end();
    while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
    return {begin, end};
}

bool parse_double(const std::string& raw, double* out) {
    const std::string s = trim(raw);
    if (s.empty()) return false;
    std::size_t used = 0;
    try {
        *out = std::stod(s, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == s.size();
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;   // raw cells
    std::vector<std::size_t> line_numbers;        // physical line per row
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            for (auto& h : split_line(line)) table.header.push_back(trim(h));
            continue;
        }
        if (trim(line).empty()) continue;
        table.rows.push_back(split_line(line));
        table.line_numbers.push_back(line_no);
    }
    if (table.header.empty()) throw std::runtime_error("'" + path + "' has no header row");
    return table;
}

std::size_t column_index(const Table& table, const std::string& name, const std::string& path) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end())
        throw std::runtime_error("column '" + name + "' not found in '" + path + "'");
    return static_cast<std::size_t>(it - table.header.begin());
}

}  // namespace

IngestResult ingest_csv(const std::string& path, const std::string& response_column,
                        const std::vector<std::string>& covariate_columns) {
    const Table table = read_table(path);
    const std::size_t response_idx = column_index(table, response_column, path);
    std::vector<std::size_t> covariate_idx;
    for (const auto& name : covariate_columns) covariate_idx.push_back(column_index(table, name, path));

    const std::size_t n = table.rows.size();
    Eigen::VectorXd response(n);
    Eigen::MatrixXd covariates(n, covariate_columns.size());
    std::vector<std::size_t> bad_lines;

    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        const std::size_t line = table.line_numbers[i];
        bool row_ok = true;
        auto cell = [&](std::size_t j) -> const std::string& {
            static const std::string empty;
            return j < row.size() ? row[j] : empty;
        };
        double value = 0.0;
        if (!parse_double(cell(response_idx), &value)) {
            row_ok = false;
        } else {
            if (!(value > 0.0))
                throw std::runtime_error("nonpositive response at line " + std::to_string(line) +
                                         " of '" + path + "'");
            response(i) = value;
        }
        for (std::size_t k = 0; k < covariate_idx.size() && row_ok; ++k) {
            if (!parse_double(cell(covariate_idx[k]), &value))
                row_ok = false;
            else
                covariates(i, k) = value;
        }
        if (!row_ok) bad_lines.push_back(line);
    }
    if (!bad_lines.empty()) {
        std::string msg = "missing or non-numeric cells at line";
        msg += bad_lines.size() > 1 ? "s " : " ";
        for (std::size_t k = 0; k < bad_lines.size() && k < 10; ++k) {
            if (k) msg += ", ";
            msg += std::to_string(bad_lines[k]);
        }
        if (bad_lines.size() > 10) msg += ", ...";
        throw std::runtime_error(msg + " of '" + path + "'");
    }

    IngestResult result{Dataset::make(response, covariates, covariate_columns), {}};
    result.summary.stats = summarize({response.data(), static_cast<std::size_t>(response.size())});
    result.summary.cv = result.summary.stats.sd / result.summary.stats.mean;
    result.summary.min = response.minCoeff();
    result.summary.max = response.maxCoeff();
    result.summary.range = result.summary.max - result.summary.min;
    result.summary.n = response.size();
    return result;
}

std::vector<std::string> validate_csv_schema(const std::string& path,
                                             const std::vector<std::string>& expected_columns) {
    const Table table = read_table(path);
    for (const auto& name : expected_columns) {
        const std::size_t idx = column_index(table, name, path);
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            double value;
            const std::string cell =
                idx < table.rows[i].size() ? table.rows[i][idx] : std::string{};
            if (!parse_double(cell, &value))
                throw std::runtime_error("column '" + name + "' is not numeric at line " +
                                         std::to_string(table.line_numbers[i]) + " of '" + path +
                                         "'");
        }
    }
    return table.header;
}

}  // namespace qsbs
