#include "sorted_effects/dataset.hpp"

#include "sorted_effects/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>

namespace sorted_effects {

std::optional<int> Column::level_code(std::string_view label) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] == label) return static_cast<int>(i);
    }
    return std::nullopt;
}

std::string Column::cell_text(std::size_t row) const {
    if (kind == ColumnKind::factor) return levels.at(static_cast<std::size_t>(codes.at(row)));
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), values.at(row));
    return std::string(buf, res.ptr);
}

const Column& Dataset::column(std::string_view name) const {
    if (auto idx = index_of(name)) return columns_[*idx];
    throw Error(ErrorCategory::data, "unknown variable '" + std::string(name) + "'");
}

bool Dataset::has_column(std::string_view name) const { return index_of(name).has_value(); }

std::optional<std::size_t> Dataset::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::string> Dataset::column_names() const {
    std::vector<std::string> names;
    names.reserve(columns_.size());
    for (const auto& c : columns_) names.push_back(c.name);
    return names;
}

void Dataset::check_new_column(const std::string& name, std::size_t size) const {
    if (name.empty()) throw Error(ErrorCategory::data, "column name must be nonempty");
    if (has_column(name)) throw Error(ErrorCategory::data, "duplicate column '" + name + "'");
    if (!columns_.empty() && size != rows_) {
        throw Error(ErrorCategory::data, "column '" + name + "' has " + std::to_string(size) +
                                             " rows, expected " + std::to_string(rows_));
    }
}

void Dataset::add_numeric(std::string name, std::vector<double> values) {
    check_new_column(name, values.size());
    rows_ = values.size();
    Column c;
    c.name = std::move(name);
    c.kind = ColumnKind::numeric;
    c.values = std::move(values);
    columns_.push_back(std::move(c));
}

void Dataset::add_factor(std::string name, const std::vector<std::string>& labels) {
    std::vector<std::string> levels;
    std::unordered_map<std::string, int> lookup;
    std::vector<int> codes;
    codes.reserve(labels.size());
    for (const auto& label : labels) {
        auto [it, inserted] = lookup.try_emplace(label, static_cast<int>(levels.size()));
        if (inserted) levels.push_back(label);
        codes.push_back(it->second);
    }
    add_factor_codes(std::move(name), std::move(codes), std::move(levels));
}

void Dataset::add_factor_codes(std::string name, std::vector<int> codes, std::vector<std::string> levels) {
    check_new_column(name, codes.size());
    for (int code : codes) {
        if (code < 0 || static_cast<std::size_t>(code) >= levels.size()) {
            throw Error(ErrorCategory::data, "factor code out of range in column '" + name + "'");
        }
    }
    rows_ = codes.size();
    Column c;
    c.name = std::move(name);
    c.kind = ColumnKind::factor;
    c.codes = std::move(codes);
    c.levels = std::move(levels);
    columns_.push_back(std::move(c));
}

void Dataset::replace_column(Column column) {
    auto idx = index_of(column.name);
    if (!idx) throw Error(ErrorCategory::data, "unknown variable '" + column.name + "'");
    if (column.size() != rows_) throw Error(ErrorCategory::data, "replacement column has wrong length");
    columns_[*idx] = std::move(column);
}

void Dataset::set_weight_column(std::optional<std::string> name) {
    if (name) {
        const Column& c = column(*name);
        if (c.is_factor()) throw Error(ErrorCategory::data, "weight column '" + *name + "' must be numeric");
        for (double v : c.values) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw Error(ErrorCategory::data, "weight column '" + *name + "' must be finite and nonnegative");
            }
        }
    }
    weight_column_ = std::move(name);
}

Eigen::VectorXd Dataset::sampling_weights() const {
    if (!weight_column_) return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rows_));
    return numeric_column(*this, *weight_column_);
}

Dataset Dataset::select_rows(const RowMask& keep) const {
    if (keep.size() != rows_) throw Error(ErrorCategory::data, "row mask length does not match dataset");
    Dataset out;
    out.weight_column_ = weight_column_;
    for (const auto& c : columns_) {
        Column sub;
        sub.name = c.name;
        sub.kind = c.kind;
        sub.levels = c.levels;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (!keep[i]) continue;
            if (c.is_factor()) sub.codes.push_back(c.codes[i]);
            else sub.values.push_back(c.values[i]);
        }
        out.rows_ = sub.size();
        out.columns_.push_back(std::move(sub));
    }
    return out;
}

Dataset set_variable(const Dataset& data, std::string_view var, const VariableValue& value) {
    Column c = data.column(var);
    if (c.is_factor()) {
        const auto* label = std::get_if<std::string>(&value);
        std::string text;
        if (label) {
            text = *label;
        } else {
            // Numeric value against a factor: match a level spelled as that number.
            char buf[64];
            auto res = std::to_chars(buf, buf + sizeof(buf), std::get<double>(value));
            text.assign(buf, res.ptr);
        }
        auto code = c.level_code(text);
        if (!code) {
            throw Error(ErrorCategory::data, "unknown level '" + text + "' for factor '" + c.name + "'");
        }
        std::fill(c.codes.begin(), c.codes.end(), *code);
    } else {
        double v = 0.0;
        if (const auto* d = std::get_if<double>(&value)) {
            v = *d;
        } else {
            const std::string& s = std::get<std::string>(value);
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
                throw Error(ErrorCategory::data, "value '" + s + "' is not numeric for column '" + c.name + "'");
            }
        }
        std::fill(c.values.begin(), c.values.end(), v);
    }
    Dataset out = data;
    out.replace_column(std::move(c));
    return out;
}

Dataset shift_variable(const Dataset& data, std::string_view var, double shift) {
    Column c = data.column(var);
    if (c.is_factor()) {
        throw Error(ErrorCategory::data, "cannot shift factor '" + c.name + "'");
    }
    for (double& v : c.values) v += shift;
    Dataset out = data;
    out.replace_column(std::move(c));
    return out;
}

Eigen::VectorXd numeric_column(const Dataset& data, std::string_view name) {
    const Column& c = data.column(name);
    if (c.is_factor()) {
        throw Error(ErrorCategory::data, "variable '" + std::string(name) + "' must be numeric");
    }
    return Eigen::Map<const Eigen::VectorXd>(c.values.data(), static_cast<Eigen::Index>(c.values.size()));
}

}  // namespace sorted_effects
