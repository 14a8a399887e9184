#pragma once

#include "sorted_effects/dataset.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sorted_effects::cli {

/// "a:b/d" -> {a/d, (a+1)/d, ..., b/d} for integers a <= b, d > 0;
/// otherwise a comma-separated list of numbers.
std::vector<double> parse_grid(std::string_view text);

/// As parse_grid, but "none" (or an empty string) yields nullopt.
std::optional<std::vector<double>> parse_optional_grid(std::string_view text);

/// Comma- or whitespace-separated names.
std::vector<std::string> split_list(std::string_view text);

/// Row mask from "<col> <op> <literal> [& ...]" with op one of
/// == != < <= > >=. Factor columns allow == and != against a level label.
RowMask parse_subgroup(std::string_view text, const Dataset& data);

}  // namespace sorted_effects::cli
