#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace emloc {

using Index = Eigen::Index;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidMeshError : public Error {
public:
  using Error::Error;
};

class InvalidGeometryError : public Error {
public:
  using Error::Error;
};

class DegenerateRegionError : public Error {
public:
  using Error::Error;
};

class MeshMismatchError : public Error {
public:
  using Error::Error;
};

/// Glue was asked to join two fields that disagree on the shared boundary.
class BoundaryMismatchError : public Error {
public:
  BoundaryMismatchError(const std::string &what, std::vector<Index> sites)
      : Error(what), sites_(std::move(sites)) {}
  const std::vector<Index> &sites() const noexcept { return sites_; }

private:
  std::vector<Index> sites_;
};

class MetricDegenerateError : public Error {
public:
  using Error::Error;
};

class NonConvergenceError : public Error {
public:
  NonConvergenceError(const std::string &what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// The second variation is singular: the endpoints are conjugate.
class ConjugatePointError : public Error {
public:
  ConjugatePointError(const std::string &what, double relative_eigenvalue)
      : Error(what), relative_eigenvalue_(relative_eigenvalue) {}
  double relative_eigenvalue() const noexcept { return relative_eigenvalue_; }

private:
  double relative_eigenvalue_;
};

/// E - V <= 0 somewhere along a path evaluated in the Jacobi metric.
class ClassicallyForbiddenError : public Error {
public:
  ClassicallyForbiddenError(const std::string &what, std::vector<Index> slices)
      : Error(what), slices_(std::move(slices)) {}
  const std::vector<Index> &slices() const noexcept { return slices_; }

private:
  std::vector<Index> slices_;
};

class InconclusiveError : public Error {
public:
  using Error::Error;
};

class InvalidThresholdError : public Error {
public:
  using Error::Error;
};

class CausticError : public Error {
public:
  using Error::Error;
};

class PropagationError : public Error {
public:
  using Error::Error;
};

class InvalidCountError : public Error {
public:
  using Error::Error;
};

class UnsupportedError : public Error {
public:
  using Error::Error;
};

} // namespace emloc
