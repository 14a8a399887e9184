#include "sorted_effects/resample.hpp"

#include "sorted_effects/error.hpp"
#include "sorted_effects/normal.hpp"
#include "sorted_effects/quantile.hpp"
#include "sorted_effects/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace sorted_effects {

namespace {

constexpr double max_failure_share = 0.05;

Philox4x32 replicate_stream(const BootstrapPlan& plan, std::size_t r) {
    return Philox4x32(plan.seed, static_cast<std::uint64_t>(r));
}

}  // namespace

const char* bootstrap_type_name(BootstrapType type) {
    return type == BootstrapType::nonpar ? "nonpar" : "weighted";
}

BootstrapType parse_bootstrap_type(std::string_view text) {
    if (text == "nonpar") return BootstrapType::nonpar;
    if (text == "weighted") return BootstrapType::weighted;
    throw Error(ErrorCategory::config, "unknown bootstrap type '" + std::string(text) + "'");
}

void BootstrapPlan::validate() const {
    if (replicates < 2) throw Error(ErrorCategory::config, "bootstrap needs at least 2 replicates");
}

Eigen::VectorXd replicate_weights(const BootstrapPlan& plan, std::size_t r, const Eigen::VectorXd& samp_weight) {
    const Eigen::Index n = samp_weight.size();
    Philox4x32 rng = replicate_stream(plan, r);
    Eigen::VectorXd w(n);
    if (plan.type == BootstrapType::nonpar) {
        w.setZero();
        for (Eigen::Index k = 0; k < n; ++k) w(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)))) += 1.0;
    } else {
        for (Eigen::Index k = 0; k < n; ++k) w(k) = rng.exponential();
    }
    return w.cwiseProduct(samp_weight);
}

unsigned resolve_threads(unsigned requested) {
    if (const char* env = std::getenv("SORTED_EFFECTS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, requested);
}

BootstrapDraws bootstrap_statistics(const BootstrapPlan& plan, const Eigen::VectorXd& samp_weight,
                                    const ReplicateStatistic& stat) {
    plan.validate();
    const std::size_t b = plan.replicates;
    std::vector<std::optional<Eigen::VectorXd>> results(b);
    std::vector<ReplicateRecord> ledger(b);
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= b) return;
            ReplicateRecord& rec = ledger[r];
            rec.replicate = r;
            rec.seed = plan.seed;
            try {
                results[r] = stat(replicate_weights(plan, r, samp_weight));
            } catch (const Error& e) {
                rec.failed = true;
                rec.message = e.what();
            } catch (...) {
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next.store(b);
                return;
            }
        }
    };

    const unsigned threads = std::min<std::size_t>(std::max(1u, plan.threads), b);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    BootstrapDraws draws;
    draws.ledger = std::move(ledger);
    Eigen::Index dim = -1;
    for (std::size_t r = 0; r < b; ++r) {
        if (!results[r]) {
            ++draws.failures;
            continue;
        }
        if (dim < 0) dim = results[r]->size();
        if (results[r]->size() != dim) {
            throw Error(ErrorCategory::inference, "replicate statistics differ in dimension");
        }
        draws.replicates.push_back(r);
    }
    if (static_cast<double>(draws.failures) > max_failure_share * static_cast<double>(b)) {
        std::string msg = std::to_string(draws.failures) + " of " + std::to_string(b) +
                          " bootstrap replicates failed (limit 5%)";
        for (const auto& rec : draws.ledger) {
            if (rec.failed) {
                msg += "; first failure (replicate " + std::to_string(rec.replicate) + "): " + rec.message;
                break;
            }
        }
        throw Error(ErrorCategory::inference, msg);
    }
    if (draws.replicates.size() < 2) throw Error(ErrorCategory::inference, "fewer than 2 successful replicates");
    draws.values.resize(static_cast<Eigen::Index>(draws.replicates.size()), dim);
    for (std::size_t k = 0; k < draws.replicates.size(); ++k) {
        draws.values.row(static_cast<Eigen::Index>(k)) = results[draws.replicates[k]]->transpose();
    }
    return draws;
}

Eigen::VectorXd se_iqr(const Eigen::MatrixXd& draws) {
    if (draws.rows() < 2) throw Error(ErrorCategory::inference, "standard errors need at least 2 draws");
    static const double denom = normal_quantile(0.75) - normal_quantile(0.25);
    Eigen::VectorXd se(draws.cols());
    std::vector<double> col(static_cast<std::size_t>(draws.rows()));
    for (Eigen::Index c = 0; c < draws.cols(); ++c) {
        for (Eigen::Index r = 0; r < draws.rows(); ++r) col[static_cast<std::size_t>(r)] = draws(r, c);
        const double q75 = empirical_quantile(col, 0.75);
        const double q25 = empirical_quantile(col, 0.25);
        se(c) = (q75 - q25) / denom;
    }
    return se;
}

double uniform_critical_value(const Eigen::MatrixXd& draws, const Eigen::VectorXd& center,
                              const Eigen::VectorXd& se, double alpha, std::vector<Eigen::Index>* excluded) {
    if (center.size() != draws.cols() || se.size() != draws.cols()) {
        throw Error(ErrorCategory::inference, "critical value inputs differ in dimension");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCategory::config, "alpha must lie in (0, 1]");
    std::vector<Eigen::Index> valid;
    for (Eigen::Index c = 0; c < se.size(); ++c) {
        if (se(c) > 0.0 && std::isfinite(se(c))) valid.push_back(c);
        else if (excluded) excluded->push_back(c);
    }
    if (valid.empty()) throw Error(ErrorCategory::inference, "all coordinates have zero standard error");
    std::vector<double> sup(static_cast<std::size_t>(draws.rows()));
    for (Eigen::Index r = 0; r < draws.rows(); ++r) {
        double m = 0.0;
        for (Eigen::Index c : valid) m = std::max(m, std::abs(draws(r, c) - center(c)) / se(c));
        sup[static_cast<std::size_t>(r)] = m;
    }
    return empirical_quantile(std::move(sup), 1.0 - alpha);
}

double pointwise_critical_value(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCategory::config, "alpha must lie in (0, 1)");
    return normal_quantile(1.0 - alpha / 2.0);
}

Eigen::VectorXd bias_correct(const Eigen::VectorXd& estimate, const Eigen::MatrixXd& draws) {
    if (estimate.size() != draws.cols()) throw Error(ErrorCategory::inference, "bias correction dimension mismatch");
    return 2.0 * estimate - draws.colwise().mean().transpose();
}

Eigen::VectorXd rearrange(const Eigen::VectorXd& values) {
    Eigen::VectorXd out = values;
    std::sort(out.data(), out.data() + out.size());
    return out;
}

}  // namespace sorted_effects
