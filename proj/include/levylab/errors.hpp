#pragma once

#include <stdexcept>
#include <string>

namespace levylab {

// Invalid parameters, malformed config files, bad CLI input.
class config_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (e.g. x = 0 for a
// Levy density that is singular at the origin).
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// The estimator could not produce a result from the given data, e.g. the
// empirical characteristic function vanished on the whole frequency grid.
class estimation_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok)
    throw config_error(what);
}

} // namespace detail

} // namespace levylab
