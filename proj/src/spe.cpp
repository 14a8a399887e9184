#include "sorted_effects/spe.hpp"

#include "sorted_effects/error.hpp"
#include "sorted_effects/quantile.hpp"

#include <cmath>

namespace sorted_effects {

std::vector<double> default_us() {
    std::vector<double> us;
    for (int k = 1; k <= 9; ++k) us.push_back(k / 10.0);
    return us;
}

void validate_grid(const std::vector<double>& us, const char* what) {
    if (us.empty()) throw Error(ErrorCategory::config, std::string(what) + " grid is empty");
    for (std::size_t k = 0; k < us.size(); ++k) {
        if (!(us[k] > 0.0 && us[k] < 1.0)) {
            throw Error(ErrorCategory::config, std::string(what) + " values must lie strictly inside (0, 1)");
        }
        if (k > 0 && !(us[k] > us[k - 1])) {
            throw Error(ErrorCategory::config, std::string(what) + " grid must be strictly increasing");
        }
    }
}

double ape(const EffectVector& effects) {
    double num = 0.0, den = 0.0;
    for (std::size_t k : effects.active_rows()) {
        const auto i = static_cast<Eigen::Index>(k);
        num += effects.weights(i) * effects.delta(i);
        den += effects.weights(i);
    }
    if (!(den > 0.0)) throw Error(ErrorCategory::inference, "subgroup has zero total weight");
    return num / den;
}

Eigen::VectorXd spe_curve(const EffectVector& effects, const std::vector<double>& us) {
    const auto values = effects.active_values();
    const auto weights = effects.active_weights();
    const auto q = weighted_quantiles(values, weights, us);
    return Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
}

SpeResult spe_from_draws(const Eigen::VectorXd& curve, double ape_estimate, const Eigen::MatrixXd& draws,
                         const std::vector<double>& us, double alpha, bool bias_correct) {
    const Eigen::Index k = curve.size();
    if (draws.cols() != k + 1) throw Error(ErrorCategory::inference, "draw matrix does not match the grid");
    SpeResult res;
    res.us = us;
    res.alpha = alpha;
    res.bias_corrected = bias_correct;
    res.replicates = static_cast<std::size_t>(draws.rows());

    Eigen::VectorXd point(k + 1);
    point << curve, ape_estimate;
    const Eigen::VectorXd se_all = se_iqr(draws);
    const Eigen::VectorXd corrected = bias_correct ? sorted_effects::bias_correct(point, draws) : point;

    const Eigen::MatrixXd curve_draws = draws.leftCols(k);
    res.se = se_all.head(k);
    try {
        res.uniform_cv = uniform_critical_value(curve_draws, curve, res.se, alpha, &res.degenerate);
    } catch (const Error&) {
        // Every coordinate degenerate: zero-width bands.
        res.degenerate.clear();
        for (Eigen::Index c = 0; c < k; ++c) res.degenerate.push_back(c);
        res.uniform_cv = 0.0;
    }
    res.pointwise_cv = pointwise_critical_value(alpha);

    const Eigen::VectorXd center = corrected.head(k);
    res.raw = curve;
    res.estimate = rearrange(center);
    res.pointwise_lower = rearrange(center - res.pointwise_cv * res.se);
    res.pointwise_upper = rearrange(center + res.pointwise_cv * res.se);
    res.uniform_lower = rearrange(center - res.uniform_cv * res.se);
    res.uniform_upper = rearrange(center + res.uniform_cv * res.se);

    res.ape.raw = ape_estimate;
    res.ape.estimate = corrected(k);
    res.ape.se = se_all(k);
    res.ape.lower = res.ape.estimate - res.pointwise_cv * res.ape.se;
    res.ape.upper = res.ape.estimate + res.pointwise_cv * res.ape.se;
    return res;
}

SpeResult spe_inference(const EffectPipeline& pipeline, const std::vector<double>& us, const BootstrapPlan& plan,
                        double alpha, bool bias_correct) {
    validate_grid(us, "us");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCategory::config, "alpha must lie in (0, 1)");
    const EffectVector effects = pipeline.effects(pipeline.sampling_weights());
    const Eigen::VectorXd curve = spe_curve(effects, us);
    const double ape_estimate = ape(effects);
    const auto k = static_cast<Eigen::Index>(us.size());

    const BootstrapDraws draws = bootstrap_statistics(plan, pipeline.sampling_weights(), [&](const Eigen::VectorXd& w) {
        const EffectVector e = pipeline.effects(w);
        Eigen::VectorXd stat(k + 1);
        stat << spe_curve(e, us), ape(e);
        return stat;
    });
    SpeResult res = spe_from_draws(curve, ape_estimate, draws.values, us, alpha, bias_correct);
    res.failures = draws.failures;
    return res;
}

}  // namespace sorted_effects
