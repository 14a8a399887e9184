#include "sorted_effects/formula.hpp"

#include "sorted_effects/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>

namespace sorted_effects {

namespace {

using ArithPtr = std::shared_ptr<const ArithExpr>;
using TermPtr = std::shared_ptr<const TermExpr>;

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

ArithPtr make_arith(ArithExpr::Op op, ArithPtr lhs, ArithPtr rhs) {
    auto e = std::make_shared<ArithExpr>();
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

TermPtr make_term(TermExpr::Kind kind, TermPtr lhs, TermPtr rhs) {
    auto t = std::make_shared<TermExpr>();
    t->kind = kind;
    t->lhs = std::move(lhs);
    t->rhs = std::move(rhs);
    return t;
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    FormulaAst parse() {
        std::size_t tilde = std::string_view::npos;
        for (std::size_t i = 0; i < s_.size(); ++i) {
            if (s_[i] != '~') continue;
            if (tilde != std::string_view::npos) throw FormulaError("formula has more than one '~'", i);
            tilde = i;
        }
        if (tilde == std::string_view::npos) throw FormulaError("formula has no '~'", s_.size());

        FormulaAst ast;
        skip_ws();
        if (pos_ == tilde) throw FormulaError("empty left-hand side", pos_);
        if (!ident_start(s_[pos_])) throw FormulaError("left-hand side must be a variable name", pos_);
        ast.response = identifier();
        skip_ws();
        if (pos_ != tilde) throw FormulaError("left-hand side must be a single variable", pos_);
        ++pos_;
        skip_ws();
        if (pos_ == s_.size()) throw FormulaError("empty right-hand side", pos_);
        ast.rhs = parse_sum();
        skip_ws();
        if (pos_ != s_.size()) unexpected();
        return ast;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void unexpected() {
        if (pos_ >= s_.size()) throw FormulaError("unexpected end of formula", pos_);
        const char c = s_[pos_];
        if (std::string_view("-/^%|&!=<>$@,;[]{}").find(c) != std::string_view::npos) {
            throw FormulaError(std::string("unknown operator '") + c + "'", pos_);
        }
        throw FormulaError(std::string("unexpected character '") + c + "'", pos_);
    }

    std::string identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    TermPtr parse_sum() {
        TermPtr lhs = parse_cross();
        while (accept('+')) lhs = make_term(TermExpr::Kind::sum, lhs, parse_cross());
        return lhs;
    }

    TermPtr parse_cross() {
        TermPtr lhs = parse_interaction();
        while (accept('*')) lhs = make_term(TermExpr::Kind::cross, lhs, parse_interaction());
        return lhs;
    }

    TermPtr parse_interaction() {
        TermPtr lhs = parse_atom();
        while (accept(':')) lhs = make_term(TermExpr::Kind::interaction, lhs, parse_atom());
        return lhs;
    }

    TermPtr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) unexpected();
        if (accept('(')) {
            TermPtr inner = parse_sum();
            if (!accept(')')) {
                skip_ws();
                if (pos_ < s_.size()) unexpected();
                throw FormulaError("missing ')'", pos_);
            }
            return inner;
        }
        if (!ident_start(s_[pos_])) unexpected();
        const std::size_t start = pos_;
        std::string name = identifier();
        skip_ws();
        if (name == "I" && pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            ArithPtr expr = arith_sum();
            if (!accept(')')) {
                skip_ws();
                if (pos_ < s_.size()) unexpected();
                throw FormulaError("missing ')' after I(", pos_);
            }
            auto t = std::make_shared<TermExpr>();
            t->kind = TermExpr::Kind::transform;
            t->transform = expr;
            t->name = "I(" + to_string(*expr) + ")";
            return t;
        }
        if (pos_ < s_.size() && s_[pos_] == '(') {
            throw FormulaError("function calls other than I() are not supported", start);
        }
        auto t = std::make_shared<TermExpr>();
        t->kind = TermExpr::Kind::variable;
        t->name = std::move(name);
        return t;
    }

    ArithPtr arith_sum() {
        ArithPtr lhs = arith_product();
        for (;;) {
            if (accept('+')) lhs = make_arith(ArithExpr::Op::add, lhs, arith_product());
            else if (accept('-')) lhs = make_arith(ArithExpr::Op::sub, lhs, arith_product());
            else return lhs;
        }
    }

    ArithPtr arith_product() {
        ArithPtr lhs = arith_unary();
        for (;;) {
            if (accept('*')) lhs = make_arith(ArithExpr::Op::mul, lhs, arith_unary());
            else if (accept('/')) lhs = make_arith(ArithExpr::Op::div, lhs, arith_unary());
            else return lhs;
        }
    }

    // Unary minus binds looser than '^', so -x^2 is -(x^2).
    ArithPtr arith_unary() {
        if (accept('-')) return make_arith(ArithExpr::Op::neg, arith_unary(), nullptr);
        if (accept('+')) return arith_unary();
        return arith_power();
    }

    ArithPtr arith_power() {
        ArithPtr base = arith_primary();
        if (accept('^')) return make_arith(ArithExpr::Op::pow, base, arith_unary());
        return base;
    }

    ArithPtr arith_primary() {
        skip_ws();
        if (pos_ >= s_.size()) unexpected();
        if (accept('(')) {
            ArithPtr inner = arith_sum();
            if (!accept(')')) throw FormulaError("missing ')'", pos_);
            return inner;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
            double v = 0.0;
            auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
            if (res.ec != std::errc()) throw FormulaError("malformed number", pos_);
            pos_ = static_cast<std::size_t>(res.ptr - s_.data());
            auto e = std::make_shared<ArithExpr>();
            e->op = ArithExpr::Op::number;
            e->number = v;
            return e;
        }
        if (ident_start(c)) {
            const std::size_t start = pos_;
            std::string name = identifier();
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == '(') {
                throw FormulaError("function calls are not supported inside I()", start);
            }
            auto e = std::make_shared<ArithExpr>();
            e->op = ArithExpr::Op::variable;
            e->name = std::move(name);
            return e;
        }
        unexpected();
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

int arith_precedence(const ArithExpr& e) {
    switch (e.op) {
        case ArithExpr::Op::add:
        case ArithExpr::Op::sub: return 1;
        case ArithExpr::Op::mul:
        case ArithExpr::Op::div: return 2;
        case ArithExpr::Op::neg: return 3;
        case ArithExpr::Op::pow: return 4;
        default: return 5;
    }
}

std::string wrap_if(bool wrap, std::string s) { return wrap ? "(" + s + ")" : s; }

int term_precedence(const TermExpr& t) {
    switch (t.kind) {
        case TermExpr::Kind::sum: return 1;
        case TermExpr::Kind::cross: return 2;
        case TermExpr::Kind::interaction: return 3;
        default: return 4;
    }
}

std::string term_to_string(const TermExpr& t) {
    const char* op = nullptr;
    switch (t.kind) {
        case TermExpr::Kind::variable:
        case TermExpr::Kind::transform: return t.name;
        case TermExpr::Kind::sum: op = " + "; break;
        case TermExpr::Kind::cross: op = "*"; break;
        case TermExpr::Kind::interaction: op = ":"; break;
    }
    const int p = term_precedence(t);
    // Right children of equal precedence keep their parentheses so a reparse
    // rebuilds the same tree.
    return wrap_if(term_precedence(*t.lhs) < p, term_to_string(*t.lhs)) + op +
           wrap_if(term_precedence(*t.rhs) <= p, term_to_string(*t.rhs));
}

void append_unique(std::vector<Term>& out, const Term& t) {
    for (const auto& existing : out) {
        if (existing.same_set(t)) return;
    }
    out.push_back(t);
}

std::vector<Term> interact(const std::vector<Term>& lhs, const std::vector<Term>& rhs) {
    std::vector<Term> out;
    for (const auto& a : lhs) {
        for (const auto& b : rhs) {
            Term merged = a;
            for (const auto& comp : b.components) {
                if (!merged.contains(comp.name)) merged.components.push_back(comp);
            }
            append_unique(out, merged);
        }
    }
    return out;
}

std::vector<Term> expand(const TermExpr& node) {
    switch (node.kind) {
        case TermExpr::Kind::variable:
        case TermExpr::Kind::transform: {
            TermComponent comp;
            comp.kind = node.kind == TermExpr::Kind::variable ? TermComponent::Kind::variable
                                                              : TermComponent::Kind::transform;
            comp.name = node.name;
            comp.expr = node.transform;
            return {Term{{comp}}};
        }
        case TermExpr::Kind::sum: {
            std::vector<Term> out;
            for (const auto& t : expand(*node.lhs)) append_unique(out, t);
            for (const auto& t : expand(*node.rhs)) append_unique(out, t);
            return out;
        }
        case TermExpr::Kind::interaction: return interact(expand(*node.lhs), expand(*node.rhs));
        case TermExpr::Kind::cross: {
            const auto lhs = expand(*node.lhs);
            const auto rhs = expand(*node.rhs);
            std::vector<Term> out;
            for (const auto& t : lhs) append_unique(out, t);
            for (const auto& t : rhs) append_unique(out, t);
            for (const auto& t : interact(lhs, rhs)) append_unique(out, t);
            return out;
        }
    }
    return {};
}

// Values of one component piece on `data`; factor pieces are level indicators.
Eigen::VectorXd piece_values(const DesignPiece& piece, const Dataset& data,
                             const std::map<std::string, std::vector<int>>& factor_codes,
                             std::unordered_map<std::string, Eigen::VectorXd>& transform_cache,
                             const std::string& transform_key) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    switch (piece.role) {
        case ComponentRole::numeric: return numeric_column(data, piece.variable);
        case ComponentRole::literal_transform: {
            auto it = transform_cache.find(transform_key);
            if (it == transform_cache.end()) {
                it = transform_cache.emplace(transform_key, evaluate(*piece.expr, data)).first;
            }
            return it->second;
        }
        case ComponentRole::factor_contrast:
        case ComponentRole::factor_indicator: {
            const auto& codes = factor_codes.at(piece.variable);
            Eigen::VectorXd out(n);
            for (Eigen::Index i = 0; i < n; ++i) out(i) = codes[static_cast<std::size_t>(i)] == piece.level ? 1.0 : 0.0;
            return out;
        }
    }
    return Eigen::VectorXd::Zero(n);
}

// Factor codes from `data`, expressed in the level numbering stored in `info`.
std::map<std::string, std::vector<int>> recode_factors(const DesignInfo& info, const Dataset& data) {
    std::map<std::string, std::vector<int>> out;
    for (const auto& f : info.factors) {
        const Column& col = data.column(f.variable);
        if (!col.is_factor()) {
            throw Error(ErrorCategory::design, "variable '" + f.variable + "' is no longer a factor");
        }
        std::vector<int> remap(col.levels.size(), -1);
        for (std::size_t k = 0; k < col.levels.size(); ++k) {
            for (std::size_t j = 0; j < f.levels.size(); ++j) {
                if (f.levels[j] == col.levels[k]) remap[k] = static_cast<int>(j);
            }
        }
        std::vector<int> codes(col.codes.size());
        for (std::size_t i = 0; i < codes.size(); ++i) {
            const int c = remap[static_cast<std::size_t>(col.codes[i])];
            if (c < 0) {
                throw Error(ErrorCategory::design, "level '" + col.levels[static_cast<std::size_t>(col.codes[i])] +
                                                       "' of factor '" + f.variable + "' was not present at fit time");
            }
            codes[i] = c;
        }
        out.emplace(f.variable, std::move(codes));
    }
    return out;
}

Eigen::MatrixXd materialize(const DesignInfo& info, const Dataset& data) {
    const auto codes = recode_factors(info, data);
    std::unordered_map<std::string, Eigen::VectorXd> cache;
    const auto n = static_cast<Eigen::Index>(data.rows());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(info.columns.size()));
    for (std::size_t j = 0; j < info.columns.size(); ++j) {
        const auto& spec = info.columns[j];
        Eigen::VectorXd col = Eigen::VectorXd::Ones(n);
        for (const auto& piece : spec.pieces) {
            const std::string key = piece.expr ? to_string(*piece.expr) : piece.variable;
            col.array() *= piece_values(piece, data, codes, cache, key).array();
        }
        X.col(static_cast<Eigen::Index>(j)) = col;
    }
    return X;
}

// Columns that are (numerically) linear combinations of earlier columns,
// found by Householder QR without pivoting: a column whose residual norm
// after projecting out the kept columns falls below tol * its own norm is
// aliased.
std::vector<bool> find_aliased(const Eigen::MatrixXd& X, double tol) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    std::vector<bool> aliased(static_cast<std::size_t>(p), false);
    std::vector<Eigen::VectorXd> reflectors;
    for (Eigen::Index j = 0; j < p; ++j) {
        Eigen::VectorXd v = X.col(j);
        const double original = v.norm();
        const auto rank = static_cast<Eigen::Index>(reflectors.size());
        for (Eigen::Index k = 0; k < rank; ++k) {
            const auto& h = reflectors[static_cast<std::size_t>(k)];
            auto seg = v.segment(k, n - k);
            seg -= (2.0 * h.dot(seg)) * h;
        }
        if (rank >= n || original == 0.0) {
            aliased[static_cast<std::size_t>(j)] = true;
            continue;
        }
        Eigen::VectorXd tail = v.segment(rank, n - rank);
        const double tail_norm = tail.norm();
        if (tail_norm <= tol * original) {
            aliased[static_cast<std::size_t>(j)] = true;
            continue;
        }
        tail(0) += (tail(0) >= 0.0 ? tail_norm : -tail_norm);
        tail.normalize();
        reflectors.push_back(std::move(tail));
    }
    return aliased;
}

}  // namespace

std::string to_string(const ArithExpr& e) {
    char buf[64];
    switch (e.op) {
        case ArithExpr::Op::number: {
            auto res = std::to_chars(buf, buf + sizeof(buf), e.number);
            return std::string(buf, res.ptr);
        }
        case ArithExpr::Op::variable: return e.name;
        case ArithExpr::Op::neg: return "-" + wrap_if(arith_precedence(*e.lhs) < 4, to_string(*e.lhs));
        case ArithExpr::Op::pow:
            return wrap_if(arith_precedence(*e.lhs) < 5, to_string(*e.lhs)) + "^" +
                   wrap_if(arith_precedence(*e.rhs) < 3, to_string(*e.rhs));
        default: break;
    }
    const int p = arith_precedence(e);
    const char* op = e.op == ArithExpr::Op::add ? "+" : e.op == ArithExpr::Op::sub ? "-"
                   : e.op == ArithExpr::Op::mul ? "*" : "/";
    return wrap_if(arith_precedence(*e.lhs) < p, to_string(*e.lhs)) + op +
           wrap_if(arith_precedence(*e.rhs) <= p, to_string(*e.rhs));
}

Eigen::VectorXd evaluate(const ArithExpr& e, const Dataset& data) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    switch (e.op) {
        case ArithExpr::Op::number: return Eigen::VectorXd::Constant(n, e.number);
        case ArithExpr::Op::variable: {
            const Column& c = data.column(e.name);
            if (c.is_factor()) {
                throw Error(ErrorCategory::design, "I() requires numeric data, but '" + e.name + "' is a factor");
            }
            return numeric_column(data, e.name);
        }
        case ArithExpr::Op::neg: return -evaluate(*e.lhs, data);
        default: break;
    }
    const Eigen::ArrayXd a = evaluate(*e.lhs, data).array();
    const Eigen::ArrayXd b = evaluate(*e.rhs, data).array();
    switch (e.op) {
        case ArithExpr::Op::add: return (a + b).matrix();
        case ArithExpr::Op::sub: return (a - b).matrix();
        case ArithExpr::Op::mul: return (a * b).matrix();
        case ArithExpr::Op::div: return (a / b).matrix();
        case ArithExpr::Op::pow: {
            Eigen::VectorXd out(n);
            for (Eigen::Index i = 0; i < n; ++i) out(i) = std::pow(a(i), b(i));
            return out;
        }
        default: break;
    }
    return Eigen::VectorXd::Zero(n);
}

void collect_variables(const ArithExpr& e, std::vector<std::string>& out) {
    if (e.op == ArithExpr::Op::variable) {
        if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
        return;
    }
    if (e.lhs) collect_variables(*e.lhs, out);
    if (e.rhs) collect_variables(*e.rhs, out);
}

FormulaAst parse_formula(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const FormulaAst& ast) { return ast.response + " ~ " + term_to_string(*ast.rhs); }

std::string Term::label() const {
    std::string out;
    for (const auto& c : components) {
        if (!out.empty()) out += ':';
        out += c.name;
    }
    return out;
}

bool Term::contains(std::string_view component) const {
    return std::any_of(components.begin(), components.end(),
                       [&](const TermComponent& c) { return c.name == component; });
}

bool Term::same_set(const Term& other) const {
    if (components.size() != other.components.size()) return false;
    return std::all_of(components.begin(), components.end(),
                       [&](const TermComponent& c) { return other.contains(c.name); });
}

std::vector<std::string> TermSchema::variables() const {
    std::vector<std::string> out;
    for (const auto& t : terms) {
        for (const auto& c : t.components) {
            if (c.kind == TermComponent::Kind::variable) {
                if (std::find(out.begin(), out.end(), c.name) == out.end()) out.push_back(c.name);
            } else {
                collect_variables(*c.expr, out);
            }
        }
    }
    return out;
}

TermSchema expand_terms(const FormulaAst& ast) {
    TermSchema schema;
    schema.response = ast.response;
    schema.terms = expand(*ast.rhs);
    schema.intercept = true;
    return schema;
}

std::vector<std::string> DesignInfo::column_names() const {
    std::vector<std::string> out;
    out.reserve(columns.size());
    for (const auto& c : columns) out.push_back(c.name);
    return out;
}

DesignMatrix build_design(const TermSchema& schema, const Dataset& data, bool drop_aliased) {
    for (const auto& var : schema.variables()) {
        if (!data.has_column(var)) throw Error(ErrorCategory::design, "unknown variable '" + var + "'");
    }

    auto info = std::make_shared<DesignInfo>();
    info->schema = schema;

    for (const auto& term : schema.terms) {
        for (const auto& comp : term.components) {
            if (comp.kind != TermComponent::Kind::variable) continue;
            const Column& col = data.column(comp.name);
            if (!col.is_factor()) continue;
            const bool known = std::any_of(info->factors.begin(), info->factors.end(),
                                           [&](const FactorLevels& f) { return f.variable == comp.name; });
            if (known) continue;
            std::vector<bool> seen(col.levels.size(), false);
            for (int code : col.codes) seen[static_cast<std::size_t>(code)] = true;
            FactorLevels f;
            f.variable = comp.name;
            for (std::size_t k = 0; k < col.levels.size(); ++k) {
                if (seen[k]) f.levels.push_back(col.levels[k]);
            }
            if (f.levels.size() < 2) {
                throw Error(ErrorCategory::design, "factor '" + comp.name + "' has only one observed level");
            }
            info->factors.push_back(std::move(f));
        }
    }
    auto levels_of = [&](const std::string& var) -> const FactorLevels& {
        for (const auto& f : info->factors) {
            if (f.variable == var) return f;
        }
        throw Error(ErrorCategory::design, "internal: factor '" + var + "' not registered");
    };

    DesignColumnSpec intercept;
    intercept.name = "(Intercept)";
    info->columns.push_back(intercept);

    for (std::size_t ti = 0; ti < schema.terms.size(); ++ti) {
        const Term& term = schema.terms[ti];
        // One option list per component; the column set is their product.
        std::vector<std::vector<std::pair<DesignPiece, std::string>>> options;
        for (const auto& comp : term.components) {
            std::vector<std::pair<DesignPiece, std::string>> opts;
            if (comp.kind == TermComponent::Kind::transform) {
                DesignPiece p;
                p.role = ComponentRole::literal_transform;
                p.expr = comp.expr;
                p.variable = comp.name;
                std::vector<std::string> vars;
                collect_variables(*comp.expr, vars);
                for (const auto& v : vars) {
                    if (data.column(v).is_factor()) {
                        throw Error(ErrorCategory::design, "I() requires numeric data, but '" + v + "' is a factor");
                    }
                }
                opts.emplace_back(p, comp.name);
            } else if (!data.column(comp.name).is_factor()) {
                DesignPiece p;
                p.role = ComponentRole::numeric;
                p.variable = comp.name;
                opts.emplace_back(p, comp.name);
            } else {
                // Contrasts when the term without this factor is in the model
                // (the empty term being the intercept), indicators otherwise.
                bool margin_present = term.components.size() == 1;
                if (!margin_present) {
                    Term reduced;
                    for (const auto& other : term.components) {
                        if (other.name != comp.name) reduced.components.push_back(other);
                    }
                    margin_present = std::any_of(schema.terms.begin(), schema.terms.end(),
                                                 [&](const Term& t) { return t.same_set(reduced); });
                }
                const FactorLevels& f = levels_of(comp.name);
                const int first = margin_present ? 1 : 0;
                for (int k = first; k < static_cast<int>(f.levels.size()); ++k) {
                    DesignPiece p;
                    p.role = margin_present ? ComponentRole::factor_contrast : ComponentRole::factor_indicator;
                    p.variable = comp.name;
                    p.level = k;
                    opts.emplace_back(p, comp.name + "_" + f.levels[static_cast<std::size_t>(k)]);
                }
            }
            options.push_back(std::move(opts));
        }
        // Odometer over the option lists, first component fastest.
        std::vector<std::size_t> idx(options.size(), 0);
        for (;;) {
            DesignColumnSpec spec;
            spec.term = static_cast<std::ptrdiff_t>(ti);
            for (std::size_t c = 0; c < options.size(); ++c) {
                const auto& [piece, label] = options[c][idx[c]];
                spec.pieces.push_back(piece);
                if (!spec.name.empty()) spec.name += ':';
                spec.name += label;
            }
            info->columns.push_back(std::move(spec));
            std::size_t c = 0;
            while (c < options.size() && ++idx[c] == options[c].size()) {
                idx[c] = 0;
                ++c;
            }
            if (c == options.size()) break;
        }
    }

    Eigen::MatrixXd X = materialize(*info, data);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (!X.col(j).allFinite()) {
            throw Error(ErrorCategory::design, "column '" + info->columns[static_cast<std::size_t>(j)].name +
                                                   "' contains NaN or infinite values");
        }
    }

    const auto aliased = find_aliased(X, 1e-7);
    std::vector<std::string> aliased_names;
    for (std::size_t j = 0; j < aliased.size(); ++j) {
        if (aliased[j]) aliased_names.push_back(info->columns[j].name);
    }
    if (!aliased_names.empty()) {
        if (!drop_aliased) {
            std::string msg = "design matrix is rank deficient; aliased columns:";
            for (const auto& name : aliased_names) msg += " " + name;
            throw Error(ErrorCategory::design, msg);
        }
        std::vector<DesignColumnSpec> kept;
        std::vector<Eigen::Index> keep_idx;
        for (std::size_t j = 0; j < aliased.size(); ++j) {
            if (aliased[j]) continue;
            kept.push_back(info->columns[j]);
            keep_idx.push_back(static_cast<Eigen::Index>(j));
        }
        Eigen::MatrixXd reduced(X.rows(), static_cast<Eigen::Index>(keep_idx.size()));
        for (std::size_t j = 0; j < keep_idx.size(); ++j) reduced.col(static_cast<Eigen::Index>(j)) = X.col(keep_idx[j]);
        X = std::move(reduced);
        info->columns = std::move(kept);
        for (const auto& name : aliased_names) {
            info->dropped.push_back(name);
            info->warnings.push_back("dropped aliased column '" + name + "'");
        }
    }

    return DesignMatrix{std::move(X), std::move(info)};
}

DesignMatrix apply_design(std::shared_ptr<const DesignInfo> info, const Dataset& data) {
    Eigen::MatrixXd X = materialize(*info, data);
    return DesignMatrix{std::move(X), std::move(info)};
}

Eigen::VectorXd response_vector(const TermSchema& schema, const Dataset& data) {
    if (!data.has_column(schema.response)) {
        throw Error(ErrorCategory::design, "unknown response variable '" + schema.response + "'");
    }
    Eigen::VectorXd y = numeric_column(data, schema.response);
    if (!y.allFinite()) throw Error(ErrorCategory::design, "response contains NaN or infinite values");
    return y;
}

}  // namespace sorted_effects
