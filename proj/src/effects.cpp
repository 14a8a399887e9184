#include "sorted_effects/effects.hpp"

#include "sorted_effects/error.hpp"

#include <algorithm>
#include <cmath>

namespace sorted_effects {

namespace {

const Column& require_column(const Dataset& data, std::string_view var) {
    if (!data.has_column(var)) throw Error(ErrorCategory::config, "unknown variable '" + std::string(var) + "'");
    return data.column(var);
}

void check_level(const Column& col, const std::string& label) {
    if (!col.level_code(label)) {
        throw Error(ErrorCategory::config, "level '" + label + "' is not observed in factor '" + col.name + "'");
    }
}

std::pair<std::string, std::string> categorical_compare(const Column& col, const EffectConfig& config) {
    if (!col.is_factor()) {
        throw Error(ErrorCategory::config, "categorical variable '" + col.name + "' must be a factor");
    }
    std::pair<std::string, std::string> cmp;
    if (config.compare) {
        cmp = *config.compare;
    } else if (col.levels.size() == 2) {
        cmp = {col.levels[0], col.levels[1]};
    } else {
        throw Error(ErrorCategory::config,
                    "factor '" + col.name + "' has more than 2 levels; give the two labels to compare");
    }
    if (cmp.first == cmp.second) throw Error(ErrorCategory::config, "compared levels must differ");
    check_level(col, cmp.first);
    check_level(col, cmp.second);
    return cmp;
}

EffectVector difference(const FittedModel& model, const Counterfactuals& cf, const Eigen::VectorXd& weights) {
    const Eigen::MatrixXd diff = (predict(model, cf.high) - predict(model, cf.low)) / cf.divisor;
    EffectVector out;
    out.units = static_cast<std::size_t>(diff.rows());
    out.blocks = static_cast<std::size_t>(diff.cols());
    // Column-major storage is already the block stacking.
    out.delta = Eigen::Map<const Eigen::VectorXd>(diff.data(), diff.size());
    out.weights = weights.replicate(diff.cols(), 1) / static_cast<double>(diff.cols());
    return out;
}

void check_mask(const RowMask& mask, std::size_t n) {
    if (!mask.empty() && mask.size() != n) {
        throw Error(ErrorCategory::config,
                    "subgroup mask has " + std::to_string(mask.size()) + " entries for " + std::to_string(n) + " rows");
    }
}

}  // namespace

const char* effect_type_name(EffectType type) {
    switch (type) {
        case EffectType::binary: return "binary";
        case EffectType::categorical: return "categorical";
        case EffectType::continuous: return "continuous";
    }
    return "?";
}

EffectType parse_effect_type(std::string_view text) {
    if (text == "binary") return EffectType::binary;
    if (text == "categorical") return EffectType::categorical;
    if (text == "continuous") return EffectType::continuous;
    throw Error(ErrorCategory::config, "unknown var type '" + std::string(text) + "'");
}

void EffectConfig::validate(const Dataset& data) const {
    const Column& col = require_column(data, var);
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCategory::config, "step h must be positive");
    check_mask(subgroup, data.rows());
    switch (type) {
        case EffectType::binary: binary_levels(data, var); break;
        case EffectType::categorical: categorical_compare(col, *this); break;
        case EffectType::continuous:
            if (col.is_factor()) {
                throw Error(ErrorCategory::config, "continuous variable '" + var + "' is a factor");
            }
            break;
    }
}

std::vector<std::size_t> EffectVector::active_rows() const {
    std::vector<std::size_t> rows;
    rows.reserve(size());
    for (std::size_t k = 0; k < size(); ++k) {
        if (in_subgroup(k)) rows.push_back(k);
    }
    return rows;
}

std::vector<double> EffectVector::active_values() const {
    std::vector<double> out;
    for (std::size_t k : active_rows()) out.push_back(delta(static_cast<Eigen::Index>(k)));
    return out;
}

std::vector<double> EffectVector::active_weights() const {
    std::vector<double> out;
    for (std::size_t k : active_rows()) out.push_back(weights(static_cast<Eigen::Index>(k)));
    return out;
}

std::pair<VariableValue, VariableValue> binary_levels(const Dataset& data, std::string_view var) {
    const Column& col = require_column(data, var);
    if (col.is_factor()) {
        if (col.levels.size() != 2) {
            throw Error(ErrorCategory::config, "binary variable '" + col.name + "' must have exactly 2 levels, found " +
                                                   std::to_string(col.levels.size()));
        }
        if (col.level_code("0") && col.level_code("1")) {
            return {VariableValue(std::string("0")), VariableValue(std::string("1"))};
        }
        return {VariableValue(col.levels[0]), VariableValue(col.levels[1])};
    }
    for (double v : col.values) {
        if (v != 0.0 && v != 1.0) {
            throw Error(ErrorCategory::config, "binary variable '" + col.name + "' takes values other than 0 and 1");
        }
    }
    return {VariableValue(0.0), VariableValue(1.0)};
}

Counterfactuals counterfactual_designs(const std::shared_ptr<const DesignInfo>& info, const Dataset& data,
                                       const EffectConfig& config) {
    config.validate(data);
    const auto vars = info->schema.variables();
    if (std::find(vars.begin(), vars.end(), config.var) == vars.end()) {
        throw Error(ErrorCategory::config, "variable '" + config.var + "' does not appear in the formula");
    }
    Counterfactuals cf;
    switch (config.type) {
        case EffectType::binary: {
            const auto [lo, hi] = binary_levels(data, config.var);
            cf.low = apply_design(info, set_variable(data, config.var, lo));
            cf.high = apply_design(info, set_variable(data, config.var, hi));
            break;
        }
        case EffectType::categorical: {
            const auto [lo, hi] = categorical_compare(data.column(config.var), config);
            cf.low = apply_design(info, set_variable(data, config.var, lo));
            cf.high = apply_design(info, set_variable(data, config.var, hi));
            break;
        }
        case EffectType::continuous:
            cf.low = apply_design(info, shift_variable(data, config.var, -config.h));
            cf.high = apply_design(info, shift_variable(data, config.var, config.h));
            cf.divisor = 2.0 * config.h;
            break;
    }
    return cf;
}

EffectVector partial_effects(const FittedModel& model, const Dataset& data, const EffectConfig& config) {
    const Counterfactuals cf = counterfactual_designs(model.info, data, config);
    EffectVector out = difference(model, cf, data.sampling_weights());
    return config.subgroup.empty() ? out : restrict(out, config.subgroup);
}

EffectVector pe_binary(const FittedModel& model, const Dataset& data, std::string_view var) {
    EffectConfig config;
    config.var = std::string(var);
    config.type = EffectType::binary;
    return partial_effects(model, data, config);
}

EffectVector pe_categorical(const FittedModel& model, const Dataset& data, std::string_view var,
                            const std::pair<std::string, std::string>& compare) {
    EffectConfig config;
    config.var = std::string(var);
    config.type = EffectType::categorical;
    config.compare = compare;
    return partial_effects(model, data, config);
}

EffectVector pe_continuous(const FittedModel& model, const Dataset& data, std::string_view var, double h) {
    EffectConfig config;
    config.var = std::string(var);
    config.type = EffectType::continuous;
    config.h = h;
    return partial_effects(model, data, config);
}

EffectVector restrict(const EffectVector& effects, const RowMask& mask) {
    check_mask(mask, effects.units);
    EffectVector out = effects;
    if (mask.empty()) return out;
    out.subgroup.assign(effects.units, false);
    for (std::size_t i = 0; i < effects.units; ++i) {
        out.subgroup[i] = mask[i] && (effects.subgroup.empty() || effects.subgroup[i]);
    }
    double total = 0.0;
    for (std::size_t k : out.active_rows()) total += out.weights(static_cast<Eigen::Index>(k));
    if (!(total > 0.0)) throw Error(ErrorCategory::inference, "subgroup has no units with positive weight");
    return out;
}

EffectPipeline::EffectPipeline(const Dataset& data, const TermSchema& schema, ModelSpec spec, EffectConfig config,
                               bool drop_aliased)
    : data_(data), spec_(std::move(spec)), config_(std::move(config)) {
    spec_.validate();
    config_.validate(data_);
    design_ = build_design(schema, data_, drop_aliased);
    response_ = response_vector(schema, data_);
    samp_weight_ = data_.sampling_weights();
    counterfactuals_ = counterfactual_designs(design_.info, data_, config_);
}

FittedModel EffectPipeline::fit(const Eigen::VectorXd& weights) const {
    return fit_model(spec_, design_, response_, weights);
}

EffectVector EffectPipeline::effects(const Eigen::VectorXd& weights) const { return effects(fit(weights), weights); }

EffectVector EffectPipeline::effects(const FittedModel& model, const Eigen::VectorXd& weights) const {
    EffectVector out = difference(model, counterfactuals_, weights);
    return config_.subgroup.empty() ? out : restrict(out, config_.subgroup);
}

}  // namespace sorted_effects
