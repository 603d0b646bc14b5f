#pragma once

#include <stdexcept>
#include <string>

namespace movingheat {

/// Bad input: configuration, parameters, indices or times out of range.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string &what) : std::invalid_argument(what) {}
};

/// The numbers went wrong: overflow, NaN, a singular solve, no quadrature convergence.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace movingheat
