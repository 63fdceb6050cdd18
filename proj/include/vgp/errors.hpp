#pragma once

#include <stdexcept>
#include <string>

namespace vgp {

/// Malformed or unparseable configuration (CLI exit status 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Inputs that parse but violate a documented precondition (CLI exit status 3).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at run time: factorization breakdown, degenerate
/// determinants, non-finite intermediate values (CLI exit status 4).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vgp
