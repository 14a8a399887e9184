#include "sorted_effects/cli/table_io.hpp"

#include "sorted_effects/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace sorted_effects::cli {

namespace {

bool is_missing(std::string_view cell) { return cell.empty() || cell == "NA"; }

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t')) --b;
    return std::string(s.substr(a, b - a));
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
    return v;
}

}  // namespace

ColumnSchema load_schema(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCategory::config, "schema " + path + ": " + e.what());
    }
    ColumnSchema schema;
    try {
        if (j.contains("factors")) schema.factors = j.at("factors").get<std::vector<std::string>>();
        if (j.contains("columns")) {
            for (const auto& [name, kind] : j.at("columns").items()) {
                const auto k = kind.get<std::string>();
                if (k == "factor") schema.factors.push_back(name);
                else if (k != "numeric") throw Error(ErrorCategory::config, "schema: unknown kind '" + k + "' for " + name);
            }
        }
        if (j.contains("weight") && !j.at("weight").is_null()) schema.weight = j.at("weight").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCategory::config, "schema " + path + ": " + e.what());
    }
    return schema;
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::vector<std::optional<std::string>> record;
    std::string cell;
    bool quoted_cell = false;
    bool in_quotes = false;
    bool row_has_content = false;
    std::size_t line = 1;

    auto end_cell = [&]() {
        if (quoted_cell) record.emplace_back(cell);
        else {
            std::string t = trim(cell);
            if (is_missing(t)) record.emplace_back(std::nullopt);
            else record.emplace_back(std::move(t));
        }
        cell.clear();
        quoted_cell = false;
    };
    auto end_record = [&]() {
        end_cell();
        if (table.header.empty()) {
            for (auto& c : record) {
                if (!c) throw Error(ErrorCategory::data, "empty column name in header");
                table.header.push_back(*c);
            }
        } else {
            if (record.size() != table.header.size()) {
                throw Error(ErrorCategory::data, "line " + std::to_string(line) + ": expected " +
                                                     std::to_string(table.header.size()) + " fields, found " +
                                                     std::to_string(record.size()));
            }
            table.rows.push_back(std::move(record));
        }
        record.clear();
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                quoted_cell = true;
                row_has_content = true;
                break;
            case ',':
                end_cell();
                row_has_content = true;
                break;
            case '\r': break;
            case '\n':
                if (row_has_content || !cell.empty()) end_record();
                ++line;
                break;
            default:
                cell.push_back(c);
                row_has_content = true;
        }
    }
    if (in_quotes) throw Error(ErrorCategory::data, "unterminated quoted field");
    if (row_has_content || !cell.empty()) end_record();
    if (table.header.empty()) throw Error(ErrorCategory::data, "CSV has no header row");
    std::set<std::string> names(table.header.begin(), table.header.end());
    if (names.size() != table.header.size()) throw Error(ErrorCategory::data, "duplicate column names in header");
    return table;
}

Dataset table_to_dataset(const CsvTable& table, const ColumnSchema& schema, bool drop_na,
                         std::vector<std::string>* warnings) {
    const std::set<std::string> header(table.header.begin(), table.header.end());
    for (const auto& f : schema.factors) {
        if (!header.count(f)) throw Error(ErrorCategory::data, "schema declares unknown column '" + f + "'");
    }
    if (schema.weight && !header.count(*schema.weight)) {
        throw Error(ErrorCategory::data, "weight column '" + *schema.weight + "' not in the data");
    }

    std::vector<bool> keep(table.rows.size(), true);
    std::size_t dropped = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (table.rows[r][c]) continue;
            if (!drop_na) {
                throw Error(ErrorCategory::data, "missing value in column '" + table.header[c] + "' at data row " +
                                                     std::to_string(r + 1) + " (use --drop-na to drop incomplete rows)");
            }
            keep[r] = false;
        }
        if (!keep[r]) ++dropped;
    }
    if (dropped > 0 && warnings) {
        warnings->push_back("dropped " + std::to_string(dropped) + (dropped == 1 ? " row" : " rows") +
                            " with missing values");
    }

    Dataset data;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const std::string& name = table.header[c];
        const bool factor = std::find(schema.factors.begin(), schema.factors.end(), name) != schema.factors.end();
        if (factor) {
            std::vector<std::string> labels;
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                if (keep[r]) labels.push_back(*table.rows[r][c]);
            }
            data.add_factor(name, labels);
        } else {
            std::vector<double> values;
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                if (!keep[r]) continue;
                const auto v = parse_number(*table.rows[r][c]);
                if (!v) {
                    throw Error(ErrorCategory::data, "column '" + name + "', data row " + std::to_string(r + 1) +
                                                         ": cannot parse '" + *table.rows[r][c] +
                                                         "' as a number (declare the column as a factor?)");
                }
                values.push_back(*v);
            }
            data.add_numeric(name, std::move(values));
        }
    }
    if (data.rows() == 0) throw Error(ErrorCategory::data, "no data rows");
    if (schema.weight) data.set_weight_column(schema.weight);
    return data;
}

Dataset load_csv(const std::string& path, const ColumnSchema& schema, bool drop_na, std::vector<std::string>* warnings) {
    return table_to_dataset(parse_csv(read_file(path)), schema, drop_na, warnings);
}

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
    return buf;
}

std::string csv_cell(std::string_view text) {
    if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) out << ',';
        out << csv_cell(cells[k]);
    }
    out << '\n';
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::io, "cannot open " + path + " for writing");
    out << content;
    if (!out) throw Error(ErrorCategory::io, "failed writing " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace sorted_effects::cli
