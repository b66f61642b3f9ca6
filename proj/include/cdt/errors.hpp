#ifndef CDT_ERRORS_HPP
#define CDT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cdt {

/// Input files or config text could not be parsed.
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

/// A model or config invariant is violated (bad dimensions, unstable
/// coefficients, nonzero diagonal, ...).
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure inside the estimation machinery (singular innovation
/// covariance, ill-conditioned structural matrix, ...).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cdt

#endif
