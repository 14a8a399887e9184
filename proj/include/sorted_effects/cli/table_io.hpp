#pragma once

#include "sorted_effects/dataset.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sorted_effects::cli {

struct ColumnSchema {
    // Columns listed here are read as factors; everything else is numeric.
    std::vector<std::string> factors;
    std::optional<std::string> weight;
};

/// {"factors": [...], "weight": "w"} or {"columns": {"name": "factor"|"numeric"}, "weight": "w"}.
ColumnSchema load_schema(const std::string& path);

struct CsvTable {
    std::vector<std::string> header;
    // Row-major cells; a missing cell is nullopt.
    std::vector<std::vector<std::optional<std::string>>> rows;
};

/// RFC 4180 style: comma separated, double-quote quoting, optional CR.
/// Empty and "NA" cells are missing.
CsvTable parse_csv(std::string_view text);

Dataset load_csv(const std::string& path, const ColumnSchema& schema, bool drop_na,
                 std::vector<std::string>* warnings = nullptr);
Dataset table_to_dataset(const CsvTable& table, const ColumnSchema& schema, bool drop_na,
                         std::vector<std::string>* warnings = nullptr);

/// 6 significant digits, "NA" for NaN, "Inf"/"-Inf" for infinities.
std::string format_number(double v);

/// Cell quoted when it contains a comma, quote, or newline.
std::string csv_cell(std::string_view text);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

/// Writes `content` to `path`, replacing it; throws an io error on failure.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace sorted_effects::cli
