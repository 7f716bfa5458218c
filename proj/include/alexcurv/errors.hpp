#pragma once

#include <stdexcept>
#include <string>

namespace alexcurv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (point outside a region, t outside [0,1], ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A function could not be evaluated (line search failure, non-finite value).
class EvaluationError : public Error {
  public:
    using Error::Error;
};

class DegenerateSpanError : public Error {
  public:
    using Error::Error;
};

/// Operation not defined for the given function family (e.g. subgradient of a saddle).
class UnsupportedOperationError : public Error {
  public:
    using Error::Error;
};

/// Distances handed to the comparison angle do not form a Euclidean triangle.
class TriangleInequalityError : public Error {
  public:
    using Error::Error;
};

/// A line of a boundary chart misses the body interior.
class ChartRadiusError : public Error {
  public:
    using Error::Error;
};

class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// Mollified function evaluated closer than the support radius to the inner domain boundary.
class DomainErosionError : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Nested optimisation hit the boundary of its search window.
class UnreliableEvaluationError : public EvaluationError {
  public:
    using EvaluationError::EvaluationError;
};

/// Invalid scenario configuration. The message starts with the offending field path.
class ConfigError : public Error {
  public:
    ConfigError(const std::string& path, const std::string& message)
        : Error(path + ": " + message), path_(path) {}

    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

} // namespace alexcurv
