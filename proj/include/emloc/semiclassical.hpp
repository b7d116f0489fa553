#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "emloc/extremal.hpp"
#include "emloc/region.hpp"

namespace emloc {

enum class VanVleckMethod { finite_difference, hessian_block };

/// Endpoint sensitivity D = −∂π_f/∂φ_i = −∂²S/∂φ_f∂φ_i over the free sites
/// (rows: final, columns: initial).
struct VanVleckResult {
  Eigen::MatrixXd matrix;
  std::vector<Index> sites;
  double determinant = 0.0;
  double log_abs_determinant = 0.0;
  int sign = 0;
  /// log |det(M/T)| on the same sites: the free-system value.
  double log_free_reference = 0.0;
  bool near_caustic = false;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kCausticFactor = 1e8;

VanVleckResult van_vleck(const ActionSpec &spec, const ExtremalPath &ex,
                         VanVleckMethod method = VanVleckMethod::hessian_block,
                         const SolveOptions &options = {});

struct ExtremalContribution {
  std::string seed_label;
  double action = 0.0;
  double van_vleck = 0.0; ///< |Δ|
  int van_vleck_sign = 1;
  std::complex<double> phase;
  std::complex<double> term;
  /// S/ħ, the semi-classical validity diagnostic.
  double action_over_hbar = 0.0;
  bool near_caustic = false;
};

struct KernelValue {
  std::complex<double> amplitude;
  std::vector<ExtremalContribution> per_extremal;
  double hbar = 1.0;
};

struct KernelOptions {
  double hbar = 1.0;
  VanVleckMethod method = VanVleckMethod::hessian_block;
  bool allow_caustic = false;
  SolveOptions solve;
};

/// K = Σ √|Δ| exp(iS/ħ) over the extremal set (normalization 1).
KernelValue kernel(const ActionSpec &spec, const ExtremalSet &set,
                   const KernelOptions &options = {});

/// Coherent sum of precomputed (action, Δ) pairs.
KernelValue coherent_sum(const std::vector<std::pair<double, double>> &action_and_van_vleck,
                         double hbar = 1.0);

struct CrossSensitivity {
  double offdiag_norm = 0.0;
  double diag_norm = 0.0;
  double offdiag_absolute = 0.0;
};

/// ‖D_ON‖ + ‖D_NO‖ (Frobenius, combined) relative to the diagonal blocks,
/// with rows and columns restricted to the free interior sites of each side.
CrossSensitivity cross_sensitivity(const ActionSpec &spec, const RegionDecomposition &dec,
                                   const ExtremalPath &ex,
                                   VanVleckMethod method = VanVleckMethod::hessian_block);

struct ClusterReport {
  std::complex<double> K_joint;
  std::complex<double> K_product;
  KernelValue joint;
  KernelValue kernel_O;
  KernelValue kernel_N;
  double relative_defect = 0.0; ///< NaN when K_joint is zero
  bool defect_defined = true;
  Index joint_count = 0;
  Index O_count = 0;
  Index N_count = 0;
  bool reindexing_holds = false; ///< joint_count == O_count · N_count
};

/// Joint kernel (∂O pinned to its phi_i values) against the product of the
/// two intrinsic kernels. Seeds are on the parent, O and N meshes.
ClusterReport cluster_check(const ActionSpec &spec, const RegionDecomposition &dec,
                            const FieldConfig &phi_i, const FieldConfig &phi_f,
                            const std::vector<Seed> &seeds_joint,
                            const std::vector<Seed> &seeds_O,
                            const std::vector<Seed> &seeds_N,
                            const KernelOptions &options = {});

double relative_defect(std::complex<double> joint, std::complex<double> product);

} // namespace emloc
