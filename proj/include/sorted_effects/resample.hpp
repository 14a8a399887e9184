#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace sorted_effects {

enum class BootstrapType { nonpar, weighted };

const char* bootstrap_type_name(BootstrapType type);
BootstrapType parse_bootstrap_type(std::string_view text);

struct BootstrapPlan {
    BootstrapType type = BootstrapType::nonpar;
    std::size_t replicates = 500;
    std::uint64_t seed = 1;
    // Worker threads; results never depend on this.
    unsigned threads = 1;

    void validate() const;
};

struct ReplicateRecord {
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string message;
};

/// Successful replicate statistics, one row per replicate in replicate order.
struct BootstrapDraws {
    Eigen::MatrixXd values;
    // Replicate index of each row of `values`.
    std::vector<std::size_t> replicates;
    // One record per attempted replicate.
    std::vector<ReplicateRecord> ledger;
    std::size_t failures = 0;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

/// Estimation weights for replicate r: multinomial resampling counts
/// (nonpar) or i.i.d. standard exponentials (weighted), times samp_weight.
Eigen::VectorXd replicate_weights(const BootstrapPlan& plan, std::size_t r, const Eigen::VectorXd& samp_weight);

using ReplicateStatistic = std::function<Eigen::VectorXd(const Eigen::VectorXd& weights)>;

/// Runs `stat` on every replicate's weights, possibly in parallel. A
/// replicate whose statistic throws sorted_effects::Error is recorded as
/// failed and dropped; more than 5% failures aborts.
BootstrapDraws bootstrap_statistics(const BootstrapPlan& plan, const Eigen::VectorXd& samp_weight,
                                    const ReplicateStatistic& stat);

/// Thread count after applying the SORTED_EFFECTS_THREADS override.
unsigned resolve_threads(unsigned requested);

/// Per-column rescaled interquartile range, (Q.75 - Q.25) / 1.349.
Eigen::VectorXd se_iqr(const Eigen::MatrixXd& draws);

/// (1 - alpha) quantile over rows of max_c |draw - center_c| / se_c.
/// Coordinates with se_c == 0 are left out of the max and reported in
/// `excluded` when given.
double uniform_critical_value(const Eigen::MatrixXd& draws, const Eigen::VectorXd& center,
                              const Eigen::VectorXd& se, double alpha,
                              std::vector<Eigen::Index>* excluded = nullptr);

/// Phi^{-1}(1 - alpha / 2).
double pointwise_critical_value(double alpha);

/// 2 * estimate - column means of the draws.
Eigen::VectorXd bias_correct(const Eigen::VectorXd& estimate, const Eigen::MatrixXd& draws);

/// Monotone rearrangement of a curve sampled on an increasing grid.
Eigen::VectorXd rearrange(const Eigen::VectorXd& values);

}  // namespace sorted_effects
