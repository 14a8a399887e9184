#pragma once

#include "sorted_effects/dataset.hpp"
#include "sorted_effects/effects.hpp"
#include "sorted_effects/formula.hpp"
#include "sorted_effects/rng.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <string>

namespace testing_support {

using namespace sorted_effects;

// The formula grammar has no intercept-only form, so build it by hand.
inline DesignMatrix intercept_design(Eigen::Index n) {
    auto info = std::make_shared<DesignInfo>();
    info->schema.intercept = true;
    DesignColumnSpec col;
    col.name = "(Intercept)";
    info->columns.push_back(col);
    return {Eigen::MatrixXd::Ones(n, 1), info};
}

inline DesignMatrix design_of(const std::string& formula, const Dataset& data) {
    return build_design(expand_terms(parse_formula(formula)), data, false);
}

// Unit-weight effects over n units with no subgroup.
inline EffectVector effects_of(const std::vector<double>& delta, std::vector<double> weights = {}) {
    EffectVector e;
    e.delta = Eigen::Map<const Eigen::VectorXd>(delta.data(), static_cast<Eigen::Index>(delta.size()));
    if (weights.empty()) weights.assign(delta.size(), 1.0);
    e.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    e.units = delta.size();
    return e;
}

inline Eigen::VectorXd ones(Eigen::Index n) { return Eigen::VectorXd::Ones(n); }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("sorted_effects_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support
