#pragma once

#include "sorted_effects/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sorted_effects::cli {

// Data-generating processes with a known partial effect, stored in the
// `true_pe` column:
//   linear     y = 1 + 0.5 t + 0.5 x1 + e,  t ~ Bernoulli(0.5), x1, e ~ N(0, 1); PE of t = 0.5
//   logit-het  P(y = 1) = logistic(-1 + 1.5 d x),  d ~ Bernoulli(0.5), x ~ U(0, 2);
//              PE of d = logistic(-1 + 1.5 x) - logistic(-1)
//   qr-shift   y = 1 + 0.5 t + x + e,  x ~ U(0, 2), e ~ N(0, 1); PE of t = 0.5 at every quantile
std::vector<std::string> synth_names();

/// Formula and treatment matching a DGP, for demos and tests.
struct SynthModel {
    std::string formula;
    std::string var;
    std::string method;
};
SynthModel synth_model(std::string_view dgp);

Dataset synth(std::string_view dgp, std::size_t n, std::uint64_t seed);

/// Full-precision CSV of a dataset (header row, shortest round-trip numbers).
std::string dataset_csv(const Dataset& data);

}  // namespace sorted_effects::cli
