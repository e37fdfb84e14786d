#pragma once

#include <stdexcept>
#include <string>

namespace idewave {

/// Input outside an operation's domain: bad parameters, malformed tables,
/// models whose steady state is not positive.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A construction or numerical certificate could not be established
/// (no characteristic roots, empty eta window, rectangle failure, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace idewave
