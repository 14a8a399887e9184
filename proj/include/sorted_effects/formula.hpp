#pragma once

#include "sorted_effects/dataset.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sorted_effects {

// Arithmetic inside I(...): numbers, numeric columns, + - * / ^ and unary minus.
struct ArithExpr {
    enum class Op { number, variable, add, sub, mul, div, pow, neg };
    Op op = Op::number;
    double number = 0.0;
    std::string name;
    std::shared_ptr<const ArithExpr> lhs;
    std::shared_ptr<const ArithExpr> rhs;
};

std::string to_string(const ArithExpr& expr);
// Row-wise evaluation; throws when a referenced column is a factor.
Eigen::VectorXd evaluate(const ArithExpr& expr, const Dataset& data);
void collect_variables(const ArithExpr& expr, std::vector<std::string>& out);

// Right-hand-side tree. `sum` is `+`, `cross` is `*`, `interaction` is `:`.
struct TermExpr {
    enum class Kind { variable, transform, sum, cross, interaction };
    Kind kind = Kind::variable;
    std::string name;
    std::shared_ptr<const ArithExpr> transform;
    std::shared_ptr<const TermExpr> lhs;
    std::shared_ptr<const TermExpr> rhs;
};

struct FormulaAst {
    std::string response;
    std::shared_ptr<const TermExpr> rhs;
};

/// Parses `lhs ~ rhs` in Wilkinson notation. Errors carry the byte offset.
FormulaAst parse_formula(std::string_view text);
std::string to_string(const FormulaAst& ast);

struct TermComponent {
    enum class Kind { variable, transform };
    Kind kind = Kind::variable;
    // Column name, or the canonical `I(...)` text for transforms.
    std::string name;
    std::shared_ptr<const ArithExpr> expr;
};

// A term is a set of components; components keep first-appearance order.
struct Term {
    std::vector<TermComponent> components;

    std::string label() const;
    bool same_set(const Term& other) const;
    bool contains(std::string_view component) const;
};

struct TermSchema {
    std::string response;
    std::vector<Term> terms;
    bool intercept = true;

    // Distinct data columns referenced on the right-hand side.
    std::vector<std::string> variables() const;
};

/// Distributes `*` and `:` into an ordered, duplicate-free term list.
TermSchema expand_terms(const FormulaAst& ast);

enum class ComponentRole { numeric, factor_contrast, factor_indicator, literal_transform };

struct DesignPiece {
    ComponentRole role = ComponentRole::numeric;
    std::string variable;
    std::shared_ptr<const ArithExpr> expr;
    int level = -1;
};

struct DesignColumnSpec {
    std::string name;
    // -1 for the intercept column.
    std::ptrdiff_t term = -1;
    std::vector<DesignPiece> pieces;
};

struct FactorLevels {
    std::string variable;
    std::vector<std::string> levels;
    int reference = 0;
};

// Recipe for rebuilding the same columns on counterfactual data.
struct DesignInfo {
    TermSchema schema;
    std::vector<DesignColumnSpec> columns;
    std::vector<FactorLevels> factors;
    std::vector<std::string> dropped;
    std::vector<std::string> warnings;

    std::vector<std::string> column_names() const;
    std::size_t size() const { return columns.size(); }
};

struct DesignMatrix {
    Eigen::MatrixXd values;
    std::shared_ptr<const DesignInfo> info;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

/// Treatment-coded design. Aliased columns are dropped with a warning when
/// `drop_aliased` is set and rejected otherwise.
DesignMatrix build_design(const TermSchema& schema, const Dataset& data, bool drop_aliased);

/// Rebuilds the columns recorded in `info` from `data` (no aliasing checks,
/// factor codes interpreted through the stored level lists).
DesignMatrix apply_design(std::shared_ptr<const DesignInfo> info, const Dataset& data);

Eigen::VectorXd response_vector(const TermSchema& schema, const Dataset& data);

}  // namespace sorted_effects
