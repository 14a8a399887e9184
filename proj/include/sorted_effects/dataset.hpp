#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sorted_effects {

enum class ColumnKind { numeric, factor };

using RowMask = std::vector<bool>;

// A factor stores integer codes into `levels`; level order is the order of
// first appearance in the source data and code 0 is the reference level.
struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<double> values;
    std::vector<int> codes;
    std::vector<std::string> levels;

    std::size_t size() const { return kind == ColumnKind::numeric ? values.size() : codes.size(); }
    bool is_factor() const { return kind == ColumnKind::factor; }
    // Index of `label` in levels, or nullopt.
    std::optional<int> level_code(std::string_view label) const;
    // Cell rendered as text (level label or shortest round-trip number).
    std::string cell_text(std::size_t row) const;
};

/// Columnar table with an optional sampling-weight column.
class Dataset {
public:
    Dataset() = default;

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return columns_.size(); }

    const std::vector<Column>& columns() const { return columns_; }
    const Column& column(std::string_view name) const;
    const Column& column(std::size_t index) const { return columns_.at(index); }
    bool has_column(std::string_view name) const;
    std::optional<std::size_t> index_of(std::string_view name) const;
    std::vector<std::string> column_names() const;

    void add_numeric(std::string name, std::vector<double> values);
    // Levels are assigned in order of first appearance.
    void add_factor(std::string name, const std::vector<std::string>& labels);
    void add_factor_codes(std::string name, std::vector<int> codes, std::vector<std::string> levels);
    void replace_column(Column column);

    void set_weight_column(std::optional<std::string> name);
    const std::optional<std::string>& weight_column() const { return weight_column_; }
    // Sampling weights, or a vector of ones when no weight column is set.
    Eigen::VectorXd sampling_weights() const;

    Dataset select_rows(const RowMask& keep) const;

private:
    void check_new_column(const std::string& name, std::size_t size) const;

    std::vector<Column> columns_;
    std::size_t rows_ = 0;
    std::optional<std::string> weight_column_;
};

// Counterfactual value: a factor level label or a real constant.
using VariableValue = std::variant<std::string, double>;

/// Returns a copy in which every row of `var` equals `value`.
Dataset set_variable(const Dataset& data, std::string_view var, const VariableValue& value);

/// Returns a copy in which the numeric column `var` is shifted by `shift`.
Dataset shift_variable(const Dataset& data, std::string_view var, double shift);

Eigen::VectorXd numeric_column(const Dataset& data, std::string_view name);

}  // namespace sorted_effects
