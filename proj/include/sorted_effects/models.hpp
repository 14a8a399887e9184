#pragma once

#include "sorted_effects/formula.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sorted_effects {

enum class Method { ols, logit, probit, qr };
enum class Link { logit, probit };

const char* method_name(Method method);
Method parse_method(std::string_view text);

/// Default quantile-regression grid {0.05, 0.06, ..., 0.95}.
std::vector<double> default_taus();

struct ModelSpec {
    Method method = Method::ols;
    // Quantile indexes for Method::qr; strictly increasing inside (0, 1).
    std::vector<double> taus = default_taus();

    void validate() const;
};

struct FitDiagnostics {
    bool converged = false;
    int iterations = 0;
    // Max-abs score for binary fits, relative duality gap for qr.
    double criterion = 0.0;
    double log_likelihood = 0.0;
    // qr only: whether the interior-point solution was snapped to a basic solution.
    bool vertex = false;
    double tau = 0.0;
};

struct FittedModel {
    ModelSpec spec;
    // p x 1, or p x taus.size() for quantile regression.
    Eigen::MatrixXd coefficients;
    std::shared_ptr<const DesignInfo> info;
    std::vector<FitDiagnostics> diagnostics;

    Eigen::Index outputs() const { return coefficients.cols(); }
};

// All fits accept nonnegative weights; rows with zero weight do not
// contribute. Weights are normalized to mean one internally, so every fit is
// invariant to rescaling them.

/// Weighted least squares via column-pivoted Householder QR.
FittedModel fit_ols(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w);

/// Weighted logit/probit maximum likelihood by IRLS with step halving.
/// Stops when max |score| <= 1e-8, or when the relative log-likelihood change
/// is <= 1e-10 with max |score| <= 1e-7; at most 50 iterations.
FittedModel fit_binary_mle(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w, Link link);

/// Weighted linear quantile regression, one Frisch-Newton interior-point
/// solve per tau, followed by a snap to the nearby basic solution when that
/// does not increase the check-function objective.
FittedModel fit_qr(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                   const std::vector<double>& taus);

FittedModel fit_model(const ModelSpec& spec, const DesignMatrix& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& w);

/// Predictions on the outcome scale: x'b, logistic(x'b), Phi(x'b), or one
/// column per tau for quantile regression.
Eigen::MatrixXd predict(const FittedModel& model, const DesignMatrix& X);

/// Sum of w_i * rho_tau(y_i - x_i'b).
double check_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& beta, double tau);

double logistic(double eta);

}  // namespace sorted_effects
