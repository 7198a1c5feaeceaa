#pragma once

#include <stdexcept>
#include <string>

namespace npef {

// Exit-code categories used by the CLI: input 2, numerical 3, non-convergence 4.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when the requested moments sit on the boundary of the attainable
// statistic hull, so no maximum likelihood estimate exists.
struct BoundaryStatisticsError : InputError {
    explicit BoundaryStatisticsError(const std::string& msg) : InputError(msg) {}
};

}  // namespace npef
