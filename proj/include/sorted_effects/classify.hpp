#pragma once

#include "sorted_effects/effects.hpp"
#include "sorted_effects/resample.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sorted_effects {

/// Masks over the stacked effect rows: least = {delta < q(u)},
/// most = {delta > q(1 - u)}, both inside the subgroup.
struct GroupDef {
    double u = 0.1;
    double lower_threshold = 0.0;
    double upper_threshold = 0.0;
    RowMask most;
    RowMask least;
};

GroupDef classify_units(const EffectVector& effects, double u);

/// A reported CA quantity: a numeric column, or the share of one level of
/// a factor (named "var_level").
struct ReportedVariable {
    std::string name;
    std::string source;
    bool indicator = false;
    // Factor level code, or the numeric value matched by an indicator.
    int level_code = -1;
    double level_value = 0.0;
    // Indicators of a variable declared in `cat` share this group name.
    std::string cat_group;
};

/// Expands `t` for reporting. Factors become one indicator per level; a
/// numeric variable listed in `cat` becomes one indicator per distinct value.
std::vector<ReportedVariable> reported_variables(const Dataset& data, const std::vector<std::string>& t,
                                                 const std::vector<std::string>& cat);

/// Column names selected by a 0/1 vector over the dataset columns.
std::vector<std::string> select_columns(const Dataset& data, const std::vector<int>& selection);

/// n x m matrix of reported values per unit.
Eigen::MatrixXd reported_values(const Dataset& data, const std::vector<ReportedVariable>& vars);

struct GroupMeans {
    Eigen::VectorXd most;
    Eigen::VectorXd least;
};

/// Weighted means of each reported column inside each group, using the
/// effect weights of the stacked rows.
GroupMeans group_moments(const EffectVector& effects, const GroupDef& groups, const Eigen::MatrixXd& values);

enum class CaCompare { both, diff };

const char* ca_compare_name(CaCompare cl);
CaCompare parse_ca_compare(std::string_view text);

struct CaMomentResult {
    std::vector<std::string> names;
    std::vector<std::string> cat_groups;
    double u = 0.1;
    bool bias_corrected = true;
    Eigen::VectorXd most, least, diff;
    Eigen::VectorXd raw_most, raw_least, raw_diff;
    Eigen::VectorXd se_most, se_least, se_diff;
    // NaN where undefined (zero standard error, or no cat group).
    Eigen::VectorXd p_pointwise, p_joint, p_cat;
    std::vector<std::string> degenerate;
    std::size_t replicates = 0;
    std::size_t failures = 0;
};

/// Estimates, standard errors, and p-values from point means and draws whose
/// columns are [most means..., least means...].
CaMomentResult ca_from_draws(const GroupMeans& point, const Eigen::MatrixXd& draws,
                             const std::vector<ReportedVariable>& vars, double u, bool bias_correct);

CaMomentResult ca_inference(const EffectPipeline& pipeline, const std::vector<ReportedVariable>& vars, double u,
                            const BootstrapPlan& plan, bool bias_correct);

struct CaDistCurve {
    std::string variable;
    Eigen::VectorXd points;
    Eigen::VectorXd most, most_lower, most_upper;
    Eigen::VectorXd least, least_lower, least_upper;
    double cv_most = 0.0;
    double cv_least = 0.0;
};

struct CaDistResult {
    std::vector<CaDistCurve> curves;
    double u = 0.1;
    double alpha = 0.1;
    std::size_t replicates = 0;
    std::size_t failures = 0;
};

/// {0.01, ..., 0.99}.
std::vector<double> default_range_cb();

/// Evaluation points for one variable: pooled weighted quantiles of the two
/// groups at `range_cb`, or every distinct observed value when unset.
Eigen::VectorXd evaluation_points(const EffectVector& effects, const GroupDef& groups, const Eigen::VectorXd& values,
                                  const std::optional<std::vector<double>>& range_cb);

/// Weighted CDF of `values` over the rows of `mask` at `points`.
Eigen::VectorXd group_cdf(const EffectVector& effects, const RowMask& mask, const Eigen::VectorXd& values,
                          const Eigen::VectorXd& points);

CaDistResult ca_distribution(const EffectPipeline& pipeline, const std::vector<std::string>& vars, double u,
                             const std::optional<std::vector<double>>& range_cb, const BootstrapPlan& plan,
                             double alpha);

}  // namespace sorted_effects
