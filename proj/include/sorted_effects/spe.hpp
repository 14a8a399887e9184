#pragma once

#include "sorted_effects/effects.hpp"
#include "sorted_effects/resample.hpp"

#include <Eigen/Core>

#include <vector>

namespace sorted_effects {

/// {0.1, 0.2, ..., 0.9}.
std::vector<double> default_us();

/// Strictly increasing, every entry inside (0, 1).
void validate_grid(const std::vector<double>& us, const char* what);

/// Weighted mean of the effects over the subgroup.
double ape(const EffectVector& effects);

/// Weighted quantiles of the effects over the subgroup.
Eigen::VectorXd spe_curve(const EffectVector& effects, const std::vector<double>& us);

struct ApeSummary {
    double estimate = 0.0;
    double raw = 0.0;
    double se = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct SpeResult {
    std::vector<double> us;
    double alpha = 0.1;
    bool bias_corrected = true;
    // Reported estimate (bias-corrected when requested), then rearranged.
    Eigen::VectorXd estimate;
    Eigen::VectorXd raw;
    Eigen::VectorXd se;
    Eigen::VectorXd pointwise_lower;
    Eigen::VectorXd pointwise_upper;
    Eigen::VectorXd uniform_lower;
    Eigen::VectorXd uniform_upper;
    ApeSummary ape;
    double uniform_cv = 0.0;
    double pointwise_cv = 0.0;
    // Grid coordinates with zero standard error (left out of the sup).
    std::vector<Eigen::Index> degenerate;
    std::size_t replicates = 0;
    std::size_t failures = 0;
};

/// Bands and corrections from point estimates and a draw matrix whose
/// columns are [curve(us)..., ape].
SpeResult spe_from_draws(const Eigen::VectorXd& curve, double ape_estimate, const Eigen::MatrixXd& draws,
                         const std::vector<double>& us, double alpha, bool bias_correct);

/// Point estimates plus bootstrap inference; each replicate refits the model.
SpeResult spe_inference(const EffectPipeline& pipeline, const std::vector<double>& us, const BootstrapPlan& plan,
                        double alpha, bool bias_correct);

}  // namespace sorted_effects
