#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace sorted_effects {

/// Left-continuous inverse of the weighted empirical CDF: the smallest v
/// with (sum of weights on values <= v) / (total weight) >= u.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double u);

/// Same definition at several indexes; sorts once.
std::vector<double> weighted_quantiles(std::span<const double> values, std::span<const double> weights,
                                       std::span<const double> us);

/// Unweighted type-1 quantile (inverse empirical CDF). u = 0 gives the minimum.
double empirical_quantile(std::vector<double> values, double u);

/// Weighted empirical CDF at each point.
std::vector<double> weighted_cdf(std::span<const double> values, std::span<const double> weights,
                                 std::span<const double> points);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace sorted_effects
