#include "sorted_effects/quantile.hpp"

#include "sorted_effects/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sorted_effects {

namespace {

struct Step {
    double value;
    double cumulative;
};

// Distinct values in increasing order with cumulative weight through each.
std::vector<Step> cumulative_steps(std::span<const double> values, std::span<const double> weights, double& total) {
    if (values.empty()) throw Error(ErrorCategory::inference, "quantile of an empty sample");
    if (values.size() != weights.size()) throw Error(ErrorCategory::inference, "values and weights differ in length");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Step> steps;
    double cum = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        if (weights[i] < 0.0) throw Error(ErrorCategory::inference, "negative weight in quantile");
        cum += weights[i];
        if (!steps.empty() && steps.back().value == values[i]) steps.back().cumulative = cum;
        else steps.push_back({values[i], cum});
    }
    total = cum;
    if (!(total > 0.0)) throw Error(ErrorCategory::inference, "quantile with zero total weight");
    return steps;
}

double lookup(const std::vector<Step>& steps, double total, double u) {
    auto it = std::find_if(steps.begin(), steps.end(), [&](const Step& s) { return s.cumulative / total >= u; });
    if (it != steps.end()) return it->value;
    // Rounding kept the last cumulative share below u = 1: largest weighted value.
    for (auto r = steps.rbegin(); r != steps.rend(); ++r) {
        const double below = (r + 1 == steps.rend()) ? 0.0 : (r + 1)->cumulative;
        if (r->cumulative > below) return r->value;
    }
    return steps.back().value;
}

}  // namespace

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double u) {
    const double us[] = {u};
    return weighted_quantiles(values, weights, us).front();
}

std::vector<double> weighted_quantiles(std::span<const double> values, std::span<const double> weights,
                                       std::span<const double> us) {
    double total = 0.0;
    const auto steps = cumulative_steps(values, weights, total);
    std::vector<double> out;
    out.reserve(us.size());
    for (double u : us) {
        if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCategory::inference, "quantile index outside [0, 1]");
        out.push_back(lookup(steps, total, u));
    }
    return out;
}

double empirical_quantile(std::vector<double> values, double u) {
    if (values.empty()) throw Error(ErrorCategory::inference, "quantile of an empty sample");
    const std::size_t b = values.size();
    const auto bd = static_cast<double>(b);
    // Smallest k in 1..b with k / b >= u, evaluated exactly as the CDF would be.
    std::size_t k = static_cast<std::size_t>(std::max(1.0, std::ceil(u * bd)));
    k = std::min(k, b);
    while (k > 1 && static_cast<double>(k - 1) / bd >= u) --k;
    while (k < b && static_cast<double>(k) / bd < u) ++k;
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(values.begin(), nth, values.end());
    return *nth;
}

std::vector<double> weighted_cdf(std::span<const double> values, std::span<const double> weights,
                                 std::span<const double> points) {
    double total = 0.0;
    const auto steps = cumulative_steps(values, weights, total);
    std::vector<double> out;
    out.reserve(points.size());
    for (double v : points) {
        auto it = std::upper_bound(steps.begin(), steps.end(), v,
                                   [](double x, const Step& s) { return x < s.value; });
        out.push_back(it == steps.begin() ? 0.0 : std::prev(it)->cumulative / total);
    }
    return out;
}

}  // namespace sorted_effects
