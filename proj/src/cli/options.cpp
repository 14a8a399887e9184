#include "sorted_effects/cli/options.hpp"

#include "sorted_effects/error.hpp"

#include <cctype>
#include <charconv>
#include <cstring>

namespace sorted_effects::cli {

namespace {

std::string_view strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <typename T>
std::optional<T> parse_value(std::string_view s) {
    s = strip(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

enum class Cmp { eq, ne, lt, le, gt, ge };

bool compare(double a, Cmp op, double b) {
    switch (op) {
        case Cmp::eq: return a == b;
        case Cmp::ne: return a != b;
        case Cmp::lt: return a < b;
        case Cmp::le: return a <= b;
        case Cmp::gt: return a > b;
        case Cmp::ge: return a >= b;
    }
    return false;
}

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
    text = strip(text);
    const auto colon = text.find(':');
    std::vector<double> out;
    if (colon != std::string_view::npos) {
        const auto slash = text.find('/', colon);
        if (slash == std::string_view::npos) {
            throw Error(ErrorCategory::config, "range '" + std::string(text) + "' must look like a:b/d");
        }
        const auto a = parse_value<long>(text.substr(0, colon));
        const auto b = parse_value<long>(text.substr(colon + 1, slash - colon - 1));
        const auto d = parse_value<long>(text.substr(slash + 1));
        if (!a || !b || !d || *d <= 0 || *a > *b) {
            throw Error(ErrorCategory::config, "range '" + std::string(text) + "' needs integers a <= b and d > 0");
        }
        for (long k = *a; k <= *b; ++k) out.push_back(static_cast<double>(k) / static_cast<double>(*d));
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        const auto v = parse_value<double>(piece);
        if (!v) throw Error(ErrorCategory::config, "cannot parse '" + std::string(strip(piece)) + "' as a number");
        out.push_back(*v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<std::vector<double>> parse_optional_grid(std::string_view text) {
    text = strip(text);
    if (text.empty() || text == "none" || text == "NULL") return std::nullopt;
    return parse_grid(text);
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

RowMask parse_subgroup(std::string_view text, const Dataset& data) {
    RowMask mask(data.rows(), true);
    std::size_t start = 0;
    const std::string expr(text);
    while (true) {
        const auto amp = expr.find('&', start);
        const std::string clause(strip(std::string_view(expr).substr(
            start, amp == std::string::npos ? std::string::npos : amp - start)));
        if (clause.empty()) throw Error(ErrorCategory::config, "empty comparison in subgroup '" + expr + "'");

        // Two-character operators first so "<=" is not read as "<".
        static const std::pair<const char*, Cmp> ops[] = {{"==", Cmp::eq}, {"!=", Cmp::ne}, {"<=", Cmp::le},
                                                          {">=", Cmp::ge}, {"<", Cmp::lt},  {">", Cmp::gt}};
        std::size_t pos = std::string::npos, len = 0;
        Cmp op = Cmp::eq;
        for (const auto& [sym, cmp] : ops) {
            const auto p = clause.find(sym);
            if (p != std::string::npos && (pos == std::string::npos || p < pos || (p == pos && std::strlen(sym) > len))) {
                pos = p;
                len = std::strlen(sym);
                op = cmp;
            }
        }
        if (pos == std::string::npos) {
            throw Error(ErrorCategory::config, "subgroup comparison '" + clause + "' has no operator");
        }
        const std::string name(strip(std::string_view(clause).substr(0, pos)));
        std::string literal(strip(std::string_view(clause).substr(pos + len)));
        if (literal.size() >= 2 && (literal.front() == '"' || literal.front() == '\'') && literal.back() == literal.front()) {
            literal = literal.substr(1, literal.size() - 2);
        }
        if (!data.has_column(name)) throw Error(ErrorCategory::config, "subgroup: unknown column '" + name + "'");
        const Column& col = data.column(name);
        if (col.is_factor()) {
            if (op != Cmp::eq && op != Cmp::ne) {
                throw Error(ErrorCategory::config, "subgroup: factor '" + name + "' supports only == and !=");
            }
            const auto code = col.level_code(literal);
            if (!code) throw Error(ErrorCategory::config, "subgroup: '" + literal + "' is not a level of '" + name + "'");
            for (std::size_t i = 0; i < data.rows(); ++i) {
                const bool eq = code && col.codes[i] == *code;
                mask[i] = mask[i] && (op == Cmp::eq ? eq : !eq);
            }
        } else {
            const auto v = parse_value<double>(literal);
            if (!v) throw Error(ErrorCategory::config, "subgroup: '" + literal + "' is not a number");
            for (std::size_t i = 0; i < data.rows(); ++i) mask[i] = mask[i] && compare(col.values[i], op, *v);
        }
        if (amp == std::string::npos) break;
        start = amp + 1;
    }
    return mask;
}

}  // namespace sorted_effects::cli
