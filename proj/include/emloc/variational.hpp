#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "emloc/block_tridiagonal.hpp"
#include "emloc/errors.hpp"

namespace emloc {

/// Two-slice discrete Lagrangian L_d(a, b); a discrete history φ_0..φ_K has
/// value Σ_k L_d(φ_k, φ_{k+1}). Everything below (residuals, Newton solves,
/// endpoint momenta, mixed endpoint derivatives) is written against this
/// interface so the same machinery serves actions and geodesic energies.
class DiscreteLagrangian {
public:
  virtual ~DiscreteLagrangian() = default;
  virtual Index dim() const = 0;
  virtual double value(const Eigen::VectorXd &a, const Eigen::VectorXd &b) const = 0;
  virtual void gradient(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                        Eigen::VectorXd &ga, Eigen::VectorXd &gb) const = 0;
  /// haa = ∂²/∂a², hab = ∂²/∂a∂b (rows a, cols b), hbb = ∂²/∂b².
  virtual void hessian(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                       Eigen::MatrixXd &haa, Eigen::MatrixXd &hab,
                       Eigen::MatrixXd &hbb) const = 0;
};

double discrete_sum(const DiscreteLagrangian &lag, const Eigen::MatrixXd &slices);

/// Column k (0 < k < K) = ∂/∂φ_k of the discrete sum; endpoint columns zero.
Eigen::MatrixXd interior_gradient(const DiscreteLagrangian &lag,
                                  const Eigen::MatrixXd &slices);

/// Second variation over interior slices, restricted to `free_sites`.
BlockTridiagonal<double> interior_hessian(const DiscreteLagrangian &lag,
                                          const Eigen::MatrixXd &slices,
                                          const std::vector<Index> &free_sites);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iters = 200;
  double regularization = 1e-10;
  double conjugate_threshold = 1e-8;
};

struct NewtonResult {
  Eigen::MatrixXd slices;
  double residual_norm = 0.0; ///< max-norm over interior free entries
  int iterations = 0;
  double relative_min_eigenvalue = 0.0;
};

/// Damped Newton iteration for a stationary point of the discrete sum with
/// the endpoint slices and all non-free sites held fixed.
///
/// Throws NonConvergenceError after max_iters, ConjugatePointError when the
/// second variation at the solution is singular relative to
/// conjugate_threshold.
NewtonResult solve_stationary(const DiscreteLagrangian &lag,
                              Eigen::MatrixXd slices,
                              const std::vector<Index> &free_sites,
                              const NewtonOptions &options);

/// d²(on-shell sum)/dφ_0 dφ_K restricted to free sites (rows: initial,
/// columns: final), via the Schur complement of the interior Hessian.
Eigen::MatrixXd mixed_endpoint_derivative(const DiscreteLagrangian &lag,
                                          const Eigen::MatrixXd &slices,
                                          const std::vector<Index> &free_sites);

/// Restrict a dense vector / matrix to an index set.
Eigen::VectorXd select(const Eigen::VectorXd &v, const std::vector<Index> &idx);
Eigen::MatrixXd select(const Eigen::MatrixXd &m, const std::vector<Index> &rows,
                       const std::vector<Index> &cols);

} // namespace emloc
