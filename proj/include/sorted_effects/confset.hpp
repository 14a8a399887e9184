#pragma once

#include "sorted_effects/effects.hpp"
#include "sorted_effects/resample.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace sorted_effects {

/// Masks over stacked effect rows: least = {delta <= q(u)},
/// most = {delta >= q(1 - u)}, inside the subgroup.
struct AffectedSets {
    double lower_threshold = 0.0;
    double upper_threshold = 0.0;
    RowMask most;
    RowMask least;
};

AffectedSets estimated_sets(const EffectVector& effects, double u);

struct ConfSetResult {
    double u = 0.1;
    double alpha = 0.1;
    AffectedSets sets;
    RowMask cs_most;
    RowMask cs_least;
    // Stacked rows in the population of interest.
    RowMask subgroup;
    // Critical values for the least (c_hat) and most (c_tilde) sides.
    double c_least = 0.0;
    double c_most = 0.0;
    // Bootstrap standard error of delta_i - q(u) and delta_i - q(1 - u),
    // NaN outside the subgroup.
    Eigen::VectorXd se_least;
    Eigen::VectorXd se_most;
    std::size_t argmin_least = 0;
    std::size_t argmin_most = 0;
    std::size_t replicates = 0;
    std::size_t failures = 0;
};

/// Outer confidence sets from point effects and draws whose columns are
/// [delta* over the subgroup rows (in order)..., q*(u), q*(1 - u)].
ConfSetResult confidence_sets(const EffectVector& effects, const Eigen::MatrixXd& draws, double u, double alpha);

ConfSetResult subpop_inference(const EffectPipeline& pipeline, double u, const BootstrapPlan& plan, double alpha);

struct SummaryRow {
    std::string variable;
    double min = 0.0, q1 = 0.0, median = 0.0, mean = 0.0, q3 = 0.0, max = 0.0;
};

/// Weighted six-number summaries of numeric variables over the rows of a mask.
std::vector<SummaryRow> summarize_affected(const Dataset& data, const EffectVector& effects, const RowMask& mask,
                                          const std::vector<std::string>& vars);

struct ProjectedPoint {
    std::size_t unit = 0;
    double x = 0.0;
    double y = 0.0;
};

struct Projection {
    std::string varx;
    std::string vary;
    std::vector<ProjectedPoint> most;
    std::vector<ProjectedPoint> least;
};

/// Coordinates of the confidence-set members; overlap = false drops units
/// that belong to both sets.
Projection project_sets(const Dataset& data, const EffectVector& effects, const ConfSetResult& result,
                        const std::string& varx, const std::string& vary, bool overlap);

}  // namespace sorted_effects
