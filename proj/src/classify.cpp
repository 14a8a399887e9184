#include "sorted_effects/classify.hpp"

#include "sorted_effects/error.hpp"
#include "sorted_effects/quantile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

namespace sorted_effects {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string number_label(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double group_weight(const EffectVector& effects, const RowMask& mask) {
    double total = 0.0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k]) total += effects.weights(static_cast<Eigen::Index>(k));
    }
    return total;
}

// Row k of the stacked effects maps to unit k % n of `values`.
double unit_value(const EffectVector& effects, const Eigen::VectorXd& values, std::size_t row) {
    return values(static_cast<Eigen::Index>(effects.unit_of(row)));
}

// Fraction of draws whose statistic strictly exceeds `observed`.
double exceedance(const std::vector<double>& stats, double observed) {
    std::size_t count = 0;
    for (double s : stats) {
        if (s > observed) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(stats.size());
}

Eigen::VectorXd clip_unit(Eigen::VectorXd v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

}  // namespace

GroupDef classify_units(const EffectVector& effects, double u) {
    if (!(u > 0.0 && u < 0.5)) throw Error(ErrorCategory::config, "u must lie in (0, 0.5)");
    const auto values = effects.active_values();
    const auto weights = effects.active_weights();
    const double us[] = {u, 1.0 - u};
    const auto q = weighted_quantiles(values, weights, us);
    GroupDef g;
    g.u = u;
    g.lower_threshold = q[0];
    g.upper_threshold = q[1];
    g.most.assign(effects.size(), false);
    g.least.assign(effects.size(), false);
    for (std::size_t k : effects.active_rows()) {
        const double d = effects.delta(static_cast<Eigen::Index>(k));
        if (d < g.lower_threshold) g.least[k] = true;
        if (d > g.upper_threshold) g.most[k] = true;
    }
    if (!(group_weight(effects, g.least) > 0.0)) {
        throw Error(ErrorCategory::inference, "least affected group is empty: no effect lies strictly below the " +
                                                  number_label(u) + "-quantile (ties in the lower tail)");
    }
    if (!(group_weight(effects, g.most) > 0.0)) {
        throw Error(ErrorCategory::inference, "most affected group is empty: no effect lies strictly above the " +
                                                  number_label(1.0 - u) + "-quantile (ties in the upper tail)");
    }
    return g;
}

std::vector<ReportedVariable> reported_variables(const Dataset& data, const std::vector<std::string>& t,
                                                 const std::vector<std::string>& cat) {
    for (const auto& c : cat) {
        if (std::find(t.begin(), t.end(), c) == t.end()) {
            throw Error(ErrorCategory::config, "cat variable '" + c + "' is not among the variables of interest");
        }
    }
    std::vector<ReportedVariable> out;
    std::set<std::string> seen;
    for (const auto& name : t) {
        if (!data.has_column(name)) throw Error(ErrorCategory::config, "unknown variable '" + name + "'");
        if (!seen.insert(name).second) continue;
        const Column& col = data.column(name);
        const bool declared = std::find(cat.begin(), cat.end(), name) != cat.end();
        if (col.is_factor()) {
            for (std::size_t l = 0; l < col.levels.size(); ++l) {
                ReportedVariable v;
                v.name = name + "_" + col.levels[l];
                v.source = name;
                v.indicator = true;
                v.level_code = static_cast<int>(l);
                if (declared) v.cat_group = name;
                out.push_back(std::move(v));
            }
        } else if (declared) {
            std::set<double> distinct(col.values.begin(), col.values.end());
            for (double value : distinct) {
                ReportedVariable v;
                v.name = name + "_" + number_label(value);
                v.source = name;
                v.indicator = true;
                v.level_value = value;
                v.cat_group = name;
                out.push_back(std::move(v));
            }
        } else {
            ReportedVariable v;
            v.name = name;
            v.source = name;
            out.push_back(std::move(v));
        }
    }
    if (out.empty()) throw Error(ErrorCategory::config, "no variables of interest");
    return out;
}

std::vector<std::string> select_columns(const Dataset& data, const std::vector<int>& selection) {
    if (selection.size() != data.cols()) {
        throw Error(ErrorCategory::config, "selection vector has " + std::to_string(selection.size()) +
                                               " entries for " + std::to_string(data.cols()) + " columns");
    }
    std::vector<std::string> out;
    for (std::size_t c = 0; c < selection.size(); ++c) {
        if (selection[c] != 0 && selection[c] != 1) throw Error(ErrorCategory::config, "selection entries must be 0 or 1");
        if (selection[c] == 1) out.push_back(data.column(c).name);
    }
    return out;
}

Eigen::MatrixXd reported_values(const Dataset& data, const std::vector<ReportedVariable>& vars) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(vars.size()));
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const auto& v = vars[j];
        const Column& col = data.column(v.source);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto row = static_cast<std::size_t>(i);
            double x;
            if (!v.indicator) x = col.values[row];
            else if (col.is_factor()) x = col.codes[row] == v.level_code ? 1.0 : 0.0;
            else x = col.values[row] == v.level_value ? 1.0 : 0.0;
            out(i, static_cast<Eigen::Index>(j)) = x;
        }
    }
    return out;
}

GroupMeans group_moments(const EffectVector& effects, const GroupDef& groups, const Eigen::MatrixXd& values) {
    if (groups.most.size() != effects.size() || groups.least.size() != effects.size()) {
        throw Error(ErrorCategory::inference, "group masks do not match the effects");
    }
    const Eigen::Index m = values.cols();
    GroupMeans out{Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};
    double w_most = 0.0, w_least = 0.0;
    for (std::size_t k = 0; k < effects.size(); ++k) {
        const double w = effects.weights(static_cast<Eigen::Index>(k));
        const auto i = static_cast<Eigen::Index>(effects.unit_of(k));
        if (groups.most[k]) {
            out.most += w * values.row(i).transpose();
            w_most += w;
        }
        if (groups.least[k]) {
            out.least += w * values.row(i).transpose();
            w_least += w;
        }
    }
    if (!(w_most > 0.0) || !(w_least > 0.0)) throw Error(ErrorCategory::inference, "affected group has zero weight");
    out.most /= w_most;
    out.least /= w_least;
    return out;
}

const char* ca_compare_name(CaCompare cl) { return cl == CaCompare::both ? "both" : "diff"; }

CaCompare parse_ca_compare(std::string_view text) {
    if (text == "both") return CaCompare::both;
    if (text == "diff") return CaCompare::diff;
    throw Error(ErrorCategory::config, "unknown cl '" + std::string(text) + "' (expected both or diff)");
}

CaMomentResult ca_from_draws(const GroupMeans& point, const Eigen::MatrixXd& draws,
                             const std::vector<ReportedVariable>& vars, double u, bool bias_correct) {
    const auto m = static_cast<Eigen::Index>(vars.size());
    if (point.most.size() != m || point.least.size() != m || draws.cols() != 2 * m) {
        throw Error(ErrorCategory::inference, "CA draws do not match the variables");
    }
    CaMomentResult res;
    res.u = u;
    res.bias_corrected = bias_correct;
    res.replicates = static_cast<std::size_t>(draws.rows());
    for (const auto& v : vars) {
        res.names.push_back(v.name);
        res.cat_groups.push_back(v.cat_group);
    }
    const Eigen::MatrixXd most_draws = draws.leftCols(m);
    const Eigen::MatrixXd least_draws = draws.rightCols(m);
    const Eigen::MatrixXd diff_draws = most_draws - least_draws;

    res.raw_most = point.most;
    res.raw_least = point.least;
    res.raw_diff = point.most - point.least;
    res.se_most = se_iqr(most_draws);
    res.se_least = se_iqr(least_draws);
    res.se_diff = se_iqr(diff_draws);
    res.most = bias_correct ? sorted_effects::bias_correct(res.raw_most, most_draws) : res.raw_most;
    res.least = bias_correct ? sorted_effects::bias_correct(res.raw_least, least_draws) : res.raw_least;
    res.diff = res.most - res.least;

    // Recentered bootstrap-t statistics |d* - d| / se per replicate.
    const Eigen::Index b = draws.rows();
    std::vector<bool> valid(static_cast<std::size_t>(m));
    Eigen::MatrixXd t_draws = Eigen::MatrixXd::Zero(b, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double se = res.se_diff(j);
        valid[static_cast<std::size_t>(j)] = se > 0.0 && std::isfinite(se);
        if (!valid[static_cast<std::size_t>(j)]) {
            res.degenerate.push_back(res.names[static_cast<std::size_t>(j)]);
            continue;
        }
        t_draws.col(j) = (diff_draws.col(j).array() - res.raw_diff(j)).abs() / se;
    }
    auto sup_over = [&](auto&& member) {
        std::vector<double> sup(static_cast<std::size_t>(b), 0.0);
        for (Eigen::Index j = 0; j < m; ++j) {
            if (!valid[static_cast<std::size_t>(j)] || !member(j)) continue;
            for (Eigen::Index r = 0; r < b; ++r) {
                sup[static_cast<std::size_t>(r)] = std::max(sup[static_cast<std::size_t>(r)], t_draws(r, j));
            }
        }
        return sup;
    };
    const auto joint_sup = sup_over([](Eigen::Index) { return true; });

    res.p_pointwise = Eigen::VectorXd::Constant(m, nan);
    res.p_joint = Eigen::VectorXd::Constant(m, nan);
    res.p_cat = Eigen::VectorXd::Constant(m, nan);
    for (Eigen::Index j = 0; j < m; ++j) {
        if (!valid[static_cast<std::size_t>(j)]) continue;
        const double observed = std::abs(res.raw_diff(j)) / res.se_diff(j);
        std::vector<double> own(t_draws.col(j).data(), t_draws.col(j).data() + b);
        res.p_pointwise(j) = exceedance(own, observed);
        res.p_joint(j) = exceedance(joint_sup, observed);
        const std::string& group = res.cat_groups[static_cast<std::size_t>(j)];
        if (!group.empty()) {
            const auto cat_sup =
                sup_over([&](Eigen::Index s) { return res.cat_groups[static_cast<std::size_t>(s)] == group; });
            res.p_cat(j) = exceedance(cat_sup, observed);
        }
    }
    return res;
}

CaMomentResult ca_inference(const EffectPipeline& pipeline, const std::vector<ReportedVariable>& vars, double u,
                            const BootstrapPlan& plan, bool bias_correct) {
    const Eigen::MatrixXd values = reported_values(pipeline.data(), vars);
    const EffectVector effects = pipeline.effects(pipeline.sampling_weights());
    const GroupMeans point = group_moments(effects, classify_units(effects, u), values);
    const auto m = static_cast<Eigen::Index>(vars.size());
    const BootstrapDraws draws = bootstrap_statistics(plan, pipeline.sampling_weights(), [&](const Eigen::VectorXd& w) {
        const EffectVector e = pipeline.effects(w);
        const GroupMeans g = group_moments(e, classify_units(e, u), values);
        Eigen::VectorXd stat(2 * m);
        stat << g.most, g.least;
        return stat;
    });
    CaMomentResult res = ca_from_draws(point, draws.values, vars, u, bias_correct);
    res.failures = draws.failures;
    return res;
}

std::vector<double> default_range_cb() {
    std::vector<double> out;
    for (int k = 1; k <= 99; ++k) out.push_back(k / 100.0);
    return out;
}

Eigen::VectorXd evaluation_points(const EffectVector& effects, const GroupDef& groups, const Eigen::VectorXd& values,
                                  const std::optional<std::vector<double>>& range_cb) {
    std::vector<double> points;
    if (range_cb) {
        std::vector<double> pooled, weights;
        for (std::size_t k = 0; k < effects.size(); ++k) {
            if (!groups.most[k] && !groups.least[k]) continue;
            pooled.push_back(unit_value(effects, values, k));
            weights.push_back(effects.weights(static_cast<Eigen::Index>(k)));
        }
        points = weighted_quantiles(pooled, weights, *range_cb);
        points.erase(std::unique(points.begin(), points.end()), points.end());
    } else {
        points.assign(values.data(), values.data() + values.size());
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
    }
    return Eigen::Map<const Eigen::VectorXd>(points.data(), static_cast<Eigen::Index>(points.size()));
}

Eigen::VectorXd group_cdf(const EffectVector& effects, const RowMask& mask, const Eigen::VectorXd& values,
                          const Eigen::VectorXd& points) {
    std::vector<double> v, w;
    for (std::size_t k = 0; k < effects.size(); ++k) {
        if (!mask[k]) continue;
        v.push_back(unit_value(effects, values, k));
        w.push_back(effects.weights(static_cast<Eigen::Index>(k)));
    }
    const auto cdf = weighted_cdf(v, w, as_span(points));
    return Eigen::Map<const Eigen::VectorXd>(cdf.data(), static_cast<Eigen::Index>(cdf.size()));
}

CaDistResult ca_distribution(const EffectPipeline& pipeline, const std::vector<std::string>& vars, double u,
                             const std::optional<std::vector<double>>& range_cb, const BootstrapPlan& plan,
                             double alpha) {
    if (vars.empty()) throw Error(ErrorCategory::config, "no variables of interest");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCategory::config, "alpha must lie in (0, 1)");
    if (range_cb) {
        for (double r : *range_cb) {
            if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCategory::config, "range_cb values must lie in [0, 1]");
        }
    }
    std::vector<Eigen::VectorXd> values;
    for (const auto& name : vars) {
        if (!pipeline.data().has_column(name)) throw Error(ErrorCategory::config, "unknown variable '" + name + "'");
        if (pipeline.data().column(name).is_factor()) {
            throw Error(ErrorCategory::config, "distribution analysis needs numeric variables; '" + name +
                                                   "' is a factor");
        }
        values.push_back(numeric_column(pipeline.data(), name));
    }
    const EffectVector effects = pipeline.effects(pipeline.sampling_weights());
    const GroupDef groups = classify_units(effects, u);

    CaDistResult res;
    res.u = u;
    res.alpha = alpha;
    std::vector<Eigen::Index> offsets;
    Eigen::Index total = 0;
    for (std::size_t j = 0; j < vars.size(); ++j) {
        CaDistCurve c;
        c.variable = vars[j];
        c.points = evaluation_points(effects, groups, values[j], range_cb);
        c.most = group_cdf(effects, groups.most, values[j], c.points);
        c.least = group_cdf(effects, groups.least, values[j], c.points);
        offsets.push_back(total);
        total += 2 * c.points.size();
        res.curves.push_back(std::move(c));
    }

    const BootstrapDraws draws = bootstrap_statistics(plan, pipeline.sampling_weights(), [&](const Eigen::VectorXd& w) {
        const EffectVector e = pipeline.effects(w);
        const GroupDef g = classify_units(e, u);
        Eigen::VectorXd stat(total);
        for (std::size_t j = 0; j < res.curves.size(); ++j) {
            const auto& pts = res.curves[j].points;
            stat.segment(offsets[j], pts.size()) = group_cdf(e, g.most, values[j], pts);
            stat.segment(offsets[j] + pts.size(), pts.size()) = group_cdf(e, g.least, values[j], pts);
        }
        return stat;
    });
    res.replicates = static_cast<std::size_t>(draws.rows());
    res.failures = draws.failures;

    auto band = [&](const Eigen::VectorXd& raw, Eigen::Index offset, Eigen::VectorXd& est, Eigen::VectorXd& lower,
                    Eigen::VectorXd& upper, double& cv) {
        const Eigen::MatrixXd block = draws.values.middleCols(offset, raw.size());
        const Eigen::VectorXd se = se_iqr(block);
        try {
            cv = uniform_critical_value(block, raw, se, alpha);
        } catch (const Error&) {
            cv = 0.0;
        }
        est = clip_unit(rearrange(raw));
        lower = clip_unit(rearrange(raw - cv * se));
        upper = clip_unit(rearrange(raw + cv * se));
    };
    for (std::size_t j = 0; j < res.curves.size(); ++j) {
        auto& c = res.curves[j];
        const Eigen::VectorXd most = c.most, least = c.least;
        band(most, offsets[j], c.most, c.most_lower, c.most_upper, c.cv_most);
        band(least, offsets[j] + c.points.size(), c.least, c.least_lower, c.least_upper, c.cv_least);
    }
    return res;
}

}  // namespace sorted_effects
