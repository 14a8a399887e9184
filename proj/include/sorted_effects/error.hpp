#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sorted_effects {

// Machine-readable failure class; the CLI maps each one to an exit code.
enum class ErrorCategory {
    config,
    data,
    formula,
    design,
    model,
    separation,
    convergence,
    inference,
    io,
};

const char* category_name(ErrorCategory category);
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

class FormulaError : public Error {
public:
    FormulaError(const std::string& message, std::size_t offset)
        : Error(ErrorCategory::formula,
                message + " at offset " + std::to_string(offset)),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& message)
        : Error(ErrorCategory::convergence, message) {}
};

// Newton iterations failed with fitted probabilities pinned at 0 or 1.
class SeparationError : public Error {
public:
    explicit SeparationError(const std::string& message)
        : Error(ErrorCategory::separation, message) {}
};

}  // namespace sorted_effects
