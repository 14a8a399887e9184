#include "sorted_effects/confset.hpp"

#include "sorted_effects/error.hpp"
#include "sorted_effects/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sorted_effects {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// (value - 0) / se that stays ordered when se is zero.
double standardized(double diff, double se) {
    if (se > 0.0) return diff / se;
    if (diff > 0.0) return inf;
    if (diff < 0.0) return -inf;
    return 0.0;
}

std::size_t nearest(const std::vector<std::size_t>& rows, const EffectVector& effects, double target) {
    std::size_t best = 0;
    double gap = inf;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const double g = std::abs(effects.delta(static_cast<Eigen::Index>(rows[j])) - target);
        if (g < gap) {
            gap = g;
            best = j;
        }
    }
    return best;
}

const Column& numeric_variable(const Dataset& data, const std::string& name) {
    if (!data.has_column(name)) throw Error(ErrorCategory::config, "unknown variable '" + name + "'");
    const Column& col = data.column(name);
    if (col.is_factor()) throw Error(ErrorCategory::config, "variable '" + name + "' must be numeric");
    return col;
}

}  // namespace

AffectedSets estimated_sets(const EffectVector& effects, double u) {
    if (!(u > 0.0 && u < 0.5)) throw Error(ErrorCategory::config, "u must lie in (0, 0.5)");
    const auto rows = effects.active_rows();
    if (rows.empty()) throw Error(ErrorCategory::inference, "empty subgroup");
    const double us[] = {u, 1.0 - u};
    const auto q = weighted_quantiles(effects.active_values(), effects.active_weights(), us);
    AffectedSets s;
    s.lower_threshold = q[0];
    s.upper_threshold = q[1];
    s.most.assign(effects.size(), false);
    s.least.assign(effects.size(), false);
    for (std::size_t k : rows) {
        const double d = effects.delta(static_cast<Eigen::Index>(k));
        s.least[k] = d <= s.lower_threshold;
        s.most[k] = d >= s.upper_threshold;
    }
    return s;
}

ConfSetResult confidence_sets(const EffectVector& effects, const Eigen::MatrixXd& draws, double u, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCategory::config, "alpha must lie in (0, 1)");
    const auto rows = effects.active_rows();
    const auto m = static_cast<Eigen::Index>(rows.size());
    if (draws.cols() != m + 2) throw Error(ErrorCategory::inference, "confidence-set draws do not match the subgroup");
    ConfSetResult res;
    res.u = u;
    res.alpha = alpha;
    res.replicates = static_cast<std::size_t>(draws.rows());
    res.sets = estimated_sets(effects, u);
    res.subgroup.assign(effects.size(), false);
    for (std::size_t k : rows) res.subgroup[k] = true;

    const double q_low = res.sets.lower_threshold;
    const double q_high = res.sets.upper_threshold;
    const Eigen::MatrixXd gap_low = draws.leftCols(m).colwise() - draws.col(m);
    const Eigen::MatrixXd gap_high = draws.leftCols(m).colwise() - draws.col(m + 1);
    const Eigen::VectorXd se_low = se_iqr(gap_low);
    const Eigen::VectorXd se_high = se_iqr(gap_high);

    const std::size_t j_low = nearest(rows, effects, q_low);
    const std::size_t j_high = nearest(rows, effects, q_high);
    res.argmin_least = rows[j_low];
    res.argmin_most = rows[j_high];
    const auto jl = static_cast<Eigen::Index>(j_low);
    const auto jh = static_cast<Eigen::Index>(j_high);
    if (!(se_low(jl) > 0.0)) {
        throw Error(ErrorCategory::inference, "zero standard error at the unit nearest the u-quantile");
    }
    if (!(se_high(jh) > 0.0)) {
        throw Error(ErrorCategory::inference, "zero standard error at the unit nearest the (1-u)-quantile");
    }

    // Recentered, studentized gap at the unit nearest each threshold; the
    // most side is sign-flipped so both sets are lower sets of their statistic.
    const double point_low = effects.delta(static_cast<Eigen::Index>(rows[j_low])) - q_low;
    const double point_high = effects.delta(static_cast<Eigen::Index>(rows[j_high])) - q_high;
    std::vector<double> v_low(static_cast<std::size_t>(draws.rows()));
    std::vector<double> v_high(static_cast<std::size_t>(draws.rows()));
    for (Eigen::Index r = 0; r < draws.rows(); ++r) {
        v_low[static_cast<std::size_t>(r)] = (gap_low(r, jl) - point_low) / se_low(jl);
        v_high[static_cast<std::size_t>(r)] = -(gap_high(r, jh) - point_high) / se_high(jh);
    }
    res.c_least = empirical_quantile(std::move(v_low), 1.0 - alpha);
    res.c_most = empirical_quantile(std::move(v_high), 1.0 - alpha);

    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    res.se_least = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(effects.size()), nan);
    res.se_most = res.se_least;
    res.cs_least.assign(effects.size(), false);
    res.cs_most.assign(effects.size(), false);
    for (Eigen::Index j = 0; j < m; ++j) {
        const std::size_t k = rows[static_cast<std::size_t>(j)];
        const double d = effects.delta(static_cast<Eigen::Index>(k));
        res.se_least(static_cast<Eigen::Index>(k)) = se_low(j);
        res.se_most(static_cast<Eigen::Index>(k)) = se_high(j);
        res.cs_least[k] = standardized(d - q_low, se_low(j)) <= res.c_least;
        res.cs_most[k] = standardized(q_high - d, se_high(j)) <= res.c_most;
    }
    return res;
}

ConfSetResult subpop_inference(const EffectPipeline& pipeline, double u, const BootstrapPlan& plan, double alpha) {
    if (!(u > 0.0 && u < 0.5)) throw Error(ErrorCategory::config, "u must lie in (0, 0.5)");
    const EffectVector effects = pipeline.effects(pipeline.sampling_weights());
    const auto rows = effects.active_rows();
    const auto m = static_cast<Eigen::Index>(rows.size());
    const double us[] = {u, 1.0 - u};
    const BootstrapDraws draws = bootstrap_statistics(plan, pipeline.sampling_weights(), [&](const Eigen::VectorXd& w) {
        const EffectVector e = pipeline.effects(w);
        const auto q = weighted_quantiles(e.active_values(), e.active_weights(), us);
        Eigen::VectorXd stat(m + 2);
        for (Eigen::Index j = 0; j < m; ++j) stat(j) = e.delta(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(j)]));
        stat(m) = q[0];
        stat(m + 1) = q[1];
        return stat;
    });
    ConfSetResult res = confidence_sets(effects, draws.values, u, alpha);
    res.failures = draws.failures;
    return res;
}

std::vector<SummaryRow> summarize_affected(const Dataset& data, const EffectVector& effects, const RowMask& mask,
                                          const std::vector<std::string>& vars) {
    if (mask.size() != effects.size()) throw Error(ErrorCategory::inference, "mask does not match the effects");
    std::vector<SummaryRow> out;
    for (const auto& name : vars) {
        const Column& col = numeric_variable(data, name);
        std::vector<double> v, w;
        for (std::size_t k = 0; k < mask.size(); ++k) {
            if (!mask[k]) continue;
            v.push_back(col.values[effects.unit_of(k)]);
            w.push_back(effects.weights(static_cast<Eigen::Index>(k)));
        }
        if (v.empty()) throw Error(ErrorCategory::inference, "affected set is empty");
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            num += w[i] * v[i];
            den += w[i];
        }
        if (!(den > 0.0)) throw Error(ErrorCategory::inference, "affected set has zero weight");
        const double us[] = {0.25, 0.5, 0.75};
        const auto q = weighted_quantiles(v, w, us);
        SummaryRow row;
        row.variable = name;
        row.min = *std::min_element(v.begin(), v.end());
        row.max = *std::max_element(v.begin(), v.end());
        row.q1 = q[0];
        row.median = q[1];
        row.q3 = q[2];
        row.mean = num / den;
        out.push_back(row);
    }
    return out;
}

Projection project_sets(const Dataset& data, const EffectVector& effects, const ConfSetResult& result,
                        const std::string& varx, const std::string& vary, bool overlap) {
    const Column& cx = numeric_variable(data, varx);
    const Column& cy = numeric_variable(data, vary);
    Projection p;
    p.varx = varx;
    p.vary = vary;
    for (std::size_t k = 0; k < effects.size(); ++k) {
        const bool in_most = result.cs_most[k];
        const bool in_least = result.cs_least[k];
        if (!overlap && in_most && in_least) continue;
        const std::size_t i = effects.unit_of(k);
        const ProjectedPoint pt{i, cx.values[i], cy.values[i]};
        if (in_most) p.most.push_back(pt);
        if (in_least) p.least.push_back(pt);
    }
    return p;
}

}  // namespace sorted_effects
