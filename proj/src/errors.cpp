#include "wtn/errors.hpp"

namespace wtn {

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

ConvergenceError::ConvergenceError(const std::string& what, double residual,
                                   std::size_t iterations)
    : NumericalError(what + " (residual " + std::to_string(residual) + " after " +
                     std::to_string(iterations) + " iterations)"),
      residual_(residual),
      iterations_(iterations) {}

}  // namespace wtn
