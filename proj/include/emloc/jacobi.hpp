#pragma once

#include <vector>

#include <Eigen/Core>

#include "emloc/extremal.hpp"

namespace emloc {

/// h = 2(E − V(φ)) g with g the kinetic mass form of the action.
struct JacobiMetric {
  ActionSpec spec;
  double energy = 0.0;

  double conformal_factor(const Eigen::VectorXd &phi) const;
  /// Dense site × site matrix of h at φ.
  Eigen::MatrixXd matrix(const Eigen::VectorXd &phi) const;
};

JacobiMetric build_jacobi_metric(const ActionSpec &spec, double energy);

/// Σ_k ∫₀¹ √(f(φ_k + sΔ_k)) ds · ‖Δ_k‖_g with 3-point Gauss–Legendre per
/// segment. Throws ClassicallyForbiddenError listing segments with f ≤ 0 at a
/// node or f < 0 at an end.
double length(const JacobiMetric &metric, const Path &path);

/// Discrete energy functional of h, ½ f(midpoint) ΔᵀMΔ / dτ, over an affine
/// parameter τ ∈ [0, 1].
class JacobiEnergyLagrangian final : public DiscreteLagrangian {
public:
  JacobiEnergyLagrangian(const JacobiMetric &metric, Index steps);

  Index dim() const override { return mass_.size(); }
  double value(const Eigen::VectorXd &a, const Eigen::VectorXd &b) const override;
  void gradient(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                Eigen::VectorXd &ga, Eigen::VectorXd &gb) const override;
  void hessian(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
               Eigen::MatrixXd &haa, Eigen::MatrixXd &hab,
               Eigen::MatrixXd &hbb) const override;

private:
  const JacobiMetric *metric_;
  Eigen::VectorXd mass_;
  double dtau_;
};

/// Geodesic of h with the endpoints of `guess`, found by Newton from `guess`.
/// Geodesics at fixed energy need not be unique; the one returned is the one
/// the guess leads to.
Path jacobi_geodesic(const JacobiMetric &metric, const Path &guess,
                     const SolveOptions &options = {});
/// Same, started from the straight line with `steps` segments.
Path jacobi_geodesic(const JacobiMetric &metric, const FieldConfig &phi_i,
                     const FieldConfig &phi_f, Index steps,
                     const SolveOptions &options = {});

/// Same image, slices redistributed at equal h-length; τ runs over [0, 1].
Path reparametrize_by_length(const JacobiMetric &metric, const Path &path);

/// Symmetric Hausdorff distance between the polyline images of two paths in
/// the flat L² norm (parametrization independent).
double image_distance(const Path &p, const Path &q);

struct EquivalenceReport {
  double max_deviation = 0.0;
  double tolerance = 0.0;
  double energy = 0.0;
  double geodesic_length = 0.0;
  double extremal_length = 0.0;
  bool pass = false;
};

/// Solves the geodesic of `metric` between the extremal's endpoints, seeded
/// with the extremal's image at equal h-length spacing, and compares images.
EquivalenceReport verify_equivalence(const ActionSpec &spec, const ExtremalPath &ex,
                                     const JacobiMetric &metric, double tol,
                                     const SolveOptions &options = {});

} // namespace emloc
