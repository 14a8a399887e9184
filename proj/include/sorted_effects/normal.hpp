#pragma once

namespace sorted_effects {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF, computed through erfc so both tails keep full
/// relative precision.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double normal_survival(double x);

/// Inverse standard normal CDF. A rational starting point is refined by
/// Halley steps against normal_cdf; absolute error is below 1e-12 on
/// (1e-300, 1 - 1e-16). Returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

}  // namespace sorted_effects
