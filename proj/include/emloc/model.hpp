#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "emloc/field.hpp"
#include "emloc/region.hpp"
#include "emloc/variational.hpp"

namespace emloc {

/// Potential energy V(φ) as a sum of optional terms:
///
///   V = ½ Σ_edges κ_e (φ_a − φ_b)² / ℓ_e                       (gradient)
///     + Σ_x w_x (½ k_x φ_x² + ¼ λ_x φ_x⁴ − j_x φ_x)              (site, source)
///     + ½ φᵀ K φ                                                (nonlocal)
///     + Σ_pairs c (1 − cos(φ_a − φ_b))                          (pair coupling)
///
/// Empty vectors/matrices mean the term is absent.
struct Potential {
  struct PairCoupling {
    Index a;
    Index b;
    double strength;
  };

  Eigen::VectorXd edge_stiffness; ///< one entry per Mesh::edges() entry
  Eigen::VectorXd site_quadratic;
  Eigen::VectorXd site_quartic;
  Eigen::VectorXd source;
  Eigen::MatrixXd kernel;
  std::vector<PairCoupling> pair_couplings;

  bool is_zero() const;
  bool is_quadratic() const;
};

/// Declarative discrete action S = Σ_k L_d(φ_k, φ_{k+1}) with
///   L_d(a, b) = ½ (b − a)ᵀ M (b − a) / dt − dt/2 (V(a) + V(b)),
/// M = diag(mass_density · site weight). `pinned` sites are held at their
/// initial values for the whole history (Dirichlet data). When
/// `field_period` is set the field is circle-valued and kinetic differences
/// are taken modulo the period.
struct ActionSpec {
  MeshPtr mesh;
  Eigen::VectorXd mass_density; ///< empty means 1 everywhere
  Potential potential;
  Index time_steps = 64;
  double total_time = 1.0;
  std::vector<Index> pinned;
  std::optional<double> field_period;

  double dt() const { return total_time / static_cast<double>(time_steps); }
  Eigen::VectorXd mass() const;
  std::vector<Index> free_sites() const;
  /// Throws on inconsistent sizes, asymmetric kernel, bad time grid.
  void validate() const;
  bool is_quadratic() const;
};

double potential_value(const ActionSpec &spec, const Eigen::VectorXd &phi);
Eigen::VectorXd potential_gradient(const ActionSpec &spec,
                                   const Eigen::VectorXd &phi);
Eigen::MatrixXd potential_hessian(const ActionSpec &spec,
                                  const Eigen::VectorXd &phi);

/// Field history: column k of `values` is the slice at t = k·dt.
class Path {
public:
  Path(MeshPtr mesh, Eigen::MatrixXd values, double dt);

  const MeshPtr &mesh() const noexcept { return mesh_; }
  const Eigen::MatrixXd &values() const noexcept { return values_; }
  Eigen::MatrixXd &values() noexcept { return values_; }
  Index slice_count() const noexcept { return values_.cols(); }
  Index time_steps() const noexcept { return values_.cols() - 1; }
  double dt() const noexcept { return dt_; }
  FieldConfig slice(Index k) const { return {mesh_, values_.col(k)}; }

private:
  MeshPtr mesh_;
  Eigen::MatrixXd values_;
  double dt_;
};

/// Linear interpolation in time between two configurations.
Path straight_path(const FieldConfig &phi_i, const FieldConfig &phi_f,
                   Index time_steps, double total_time);

/// Signed difference b − a, reduced to (−P/2, P/2] when a period is given.
Eigen::VectorXd field_difference(const Eigen::VectorXd &a,
                                 const Eigen::VectorXd &b,
                                 const std::optional<double> &period);

double action(const ActionSpec &spec, const Path &path);

/// ∂S/∂φ_k for interior slices; endpoint slices and pinned sites are zero.
Path eom_residual(const ActionSpec &spec, const Path &path);

/// Discrete energy per step, ½ vᵀ M v + (V_k + V_{k+1})/2.
Eigen::VectorXd step_energies(const ActionSpec &spec, const Path &path);

/// Symmetric stiffness matrix of ½ Σ_e κ_e (φ_a − φ_b)² / ℓ_e.
Eigen::SparseMatrix<double> stiffness_matrix(const Mesh &mesh,
                                             const Eigen::VectorXd &edge_stiffness);
/// Unit stiffness on every edge.
Eigen::VectorXd unit_edge_stiffness(const Mesh &mesh);

/// Kernel of the quadratic form ∫∫ φ (−∇²)⁻¹ φ on a closed mesh: the
/// weighted pseudo-inverse of the Laplacian on the zero-mean subspace.
Eigen::MatrixXd inverse_laplacian_kernel(const Mesh &mesh);
/// Same, with `dirichlet` sites removed (inverse restricted operator); rows
/// and columns of removed sites are zero.
Eigen::MatrixXd dirichlet_inverse_laplacian_kernel(const Mesh &mesh,
                                                   const std::vector<Index> &dirichlet);

/// Action restricted to the sub-mesh on `sites` (sorted parent ids): local
/// terms truncated, kernel sub-block, pins carried over.
ActionSpec restrict_action(const ActionSpec &spec, const std::vector<Index> &sites);
ActionSpec restrict_action(const ActionSpec &spec, const std::vector<Index> &sites,
                           MeshPtr submesh);

/// Action restricted to one side of a decomposition: local terms truncated,
/// nonlocal kernel restricted by sub-block extraction, ∂O pinned.
ActionSpec intrinsic_action(const ActionSpec &spec,
                            const RegionDecomposition &dec, Side side);

/// Copy of spec with every edge touching one of `sites` given zero stiffness.
ActionSpec cut_stiffness_at(const ActionSpec &spec, const std::vector<Index> &sites);

/// Copy of spec with `sites` added to the pinned set.
ActionSpec with_pinned(const ActionSpec &spec, const std::vector<Index> &sites);

class PotentialEvaluator;

/// Midpoint-velocity, trapezoidal-potential discrete Lagrangian of a spec.
/// Holds a pointer to `spec`, which must outlive it.
class ActionLagrangian final : public DiscreteLagrangian {
public:
  explicit ActionLagrangian(const ActionSpec &spec);

  Index dim() const override { return mass_.size(); }
  double value(const Eigen::VectorXd &a, const Eigen::VectorXd &b) const override;
  void gradient(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                Eigen::VectorXd &ga, Eigen::VectorXd &gb) const override;
  void hessian(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
               Eigen::MatrixXd &haa, Eigen::MatrixXd &hab,
               Eigen::MatrixXd &hbb) const override;

private:
  const ActionSpec *spec_;
  std::shared_ptr<const PotentialEvaluator> potential_;
  Eigen::VectorXd mass_;
  double dt_;
};

} // namespace emloc
