#pragma once

#include <string>
#include <vector>

namespace sorted_effects::cli {

// Plot inputs mirror the emitted CSV tables, so plots can be redrawn from
// the result files alone.

struct SpePlotData {
    std::vector<double> u, estimate, pointwise_lower, pointwise_upper, uniform_lower, uniform_upper;
    double ape = 0.0, ape_lower = 0.0, ape_upper = 0.0;
    std::string title;
    std::string ylabel = "Sorted Effects";
};

/// Curve, shaded uniform band, dashed pointwise band, horizontal APE line.
std::string spe_svg(const SpePlotData& d);

struct DistPlotData {
    std::string variable;
    std::vector<double> points;
    std::vector<double> most, most_lower, most_upper;
    std::vector<double> least, least_lower, least_upper;
};

/// Step CDFs with uniform bands for the two groups.
std::string dist_svg(const DistPlotData& d);

struct ScatterPlotData {
    std::string varx, vary;
    std::vector<double> most_x, most_y, least_x, least_y;
};

std::string scatter_svg(const ScatterPlotData& d);

}  // namespace sorted_effects::cli
