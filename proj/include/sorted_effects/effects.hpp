#pragma once

#include "sorted_effects/dataset.hpp"
#include "sorted_effects/formula.hpp"
#include "sorted_effects/models.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sorted_effects {

enum class EffectType { binary, categorical, continuous };

const char* effect_type_name(EffectType type);
EffectType parse_effect_type(std::string_view text);

struct EffectConfig {
    std::string var;
    EffectType type = EffectType::binary;
    // Categorical only: (from, to) level labels.
    std::optional<std::pair<std::string, std::string>> compare;
    double h = 1e-7;
    // Population of interest; empty means every row.
    RowMask subgroup;

    void validate(const Dataset& data) const;
};

/// Per-unit partial effects. For quantile regression the effects of all
/// taus are stacked block by block (block k holds tau k for every unit) and
/// each unit-tau pair carries weight w_i / blocks.
struct EffectVector {
    Eigen::VectorXd delta;
    Eigen::VectorXd weights;
    // Over units, not stacked rows.
    RowMask subgroup;
    std::size_t units = 0;
    std::size_t blocks = 1;

    std::size_t size() const { return static_cast<std::size_t>(delta.size()); }
    std::size_t unit_of(std::size_t row) const { return row % units; }
    bool in_subgroup(std::size_t row) const { return subgroup.empty() || subgroup[unit_of(row)]; }
    // Stacked rows inside the subgroup.
    std::vector<std::size_t> active_rows() const;
    std::vector<double> active_values() const;
    std::vector<double> active_weights() const;
};

/// The two counterfactual designs whose prediction difference, divided by
/// `divisor`, is the partial effect.
struct Counterfactuals {
    DesignMatrix low;
    DesignMatrix high;
    double divisor = 1.0;
};

/// (low, high) values of a binary variable: 0/1 for numeric columns; for a
/// two-level factor, labels "0"/"1" when present, else first/second level.
std::pair<VariableValue, VariableValue> binary_levels(const Dataset& data, std::string_view var);

Counterfactuals counterfactual_designs(const std::shared_ptr<const DesignInfo>& info, const Dataset& data, const EffectConfig& config);

EffectVector pe_binary(const FittedModel& model, const Dataset& data, std::string_view var);
EffectVector pe_categorical(const FittedModel& model, const Dataset& data, std::string_view var,
                            const std::pair<std::string, std::string>& compare);
EffectVector pe_continuous(const FittedModel& model, const Dataset& data, std::string_view var, double h = 1e-7);

/// Dispatches on config.type and applies config.subgroup.
EffectVector partial_effects(const FittedModel& model, const Dataset& data, const EffectConfig& config);

/// Restricts downstream summaries to `mask` (intersected with any existing
/// subgroup); delta is unchanged.
EffectVector restrict(const EffectVector& effects, const RowMask& mask);

/// Fit-then-effect pipeline with counterfactual designs built once, reused
/// for the point estimate and every bootstrap replicate.
class EffectPipeline {
public:
    EffectPipeline(const Dataset& data, const TermSchema& schema, ModelSpec spec, EffectConfig config,
                   bool drop_aliased = false);

    const Dataset& data() const { return data_; }
    const DesignMatrix& design() const { return design_; }
    const Eigen::VectorXd& response() const { return response_; }
    const Eigen::VectorXd& sampling_weights() const { return samp_weight_; }
    const ModelSpec& spec() const { return spec_; }
    const EffectConfig& config() const { return config_; }

    FittedModel fit(const Eigen::VectorXd& weights) const;
    // Refits on `weights` and returns effects carrying those weights.
    EffectVector effects(const Eigen::VectorXd& weights) const;
    EffectVector effects(const FittedModel& model, const Eigen::VectorXd& weights) const;

private:
    Dataset data_;
    ModelSpec spec_;
    EffectConfig config_;
    DesignMatrix design_;
    Eigen::VectorXd response_;
    Eigen::VectorXd samp_weight_;
    Counterfactuals counterfactuals_;
};

}  // namespace sorted_effects
