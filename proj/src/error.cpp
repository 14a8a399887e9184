#include "sorted_effects/error.hpp"

namespace sorted_effects {

const char* category_name(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::config: return "config";
        case ErrorCategory::data: return "data";
        case ErrorCategory::formula: return "formula";
        case ErrorCategory::design: return "design";
        case ErrorCategory::model: return "model";
        case ErrorCategory::separation: return "separation";
        case ErrorCategory::convergence: return "convergence";
        case ErrorCategory::inference: return "inference";
        case ErrorCategory::io: return "io";
    }
    return "unknown";
}

int exit_code(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::config: return 2;
        case ErrorCategory::io: return 3;
        case ErrorCategory::data: return 4;
        case ErrorCategory::formula: return 5;
        case ErrorCategory::design: return 6;
        case ErrorCategory::model: return 7;
        case ErrorCategory::separation: return 8;
        case ErrorCategory::convergence: return 9;
        case ErrorCategory::inference: return 10;
    }
    return 1;
}

}  // namespace sorted_effects
