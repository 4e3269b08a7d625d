#pragma once

#include <stdexcept>
#include <string>

namespace phishkit {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// ParameterError/usage -> 2, IoError -> 3, NumericError -> 4.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes are inconsistent for the requested operation.
class DimensionError : public Error {
  public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// A configuration value or argument is out of its legal range.
class ParameterError : public Error {
  public:
    explicit ParameterError(const std::string& msg) : Error(msg) {}
};

// A caller violated an API contract (e.g. mismatched vectorizer snapshots).
class ContractError : public Error {
  public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// File missing, malformed line, unwritable path.
class IoError : public Error {
  public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// NaN/Inf surfaced by an operation. Never propagated silently.
class NumericError : public Error {
  public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

} // namespace phishkit
