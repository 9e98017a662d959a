#include "signet/error.hpp"

#include <utility>

namespace signet {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

ConvergenceError::ConvergenceError(const std::string& message, std::vector<double> residuals)
    : Error(message), residuals_(std::move(residuals)) {}

}  // namespace signet
