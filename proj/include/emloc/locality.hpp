#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "emloc/extremal.hpp"
#include "emloc/region.hpp"

namespace emloc {

/// Slice-wise restriction of a path to one side (interior ∪ ∂O).
Path project_path(const Path &path, const RegionDecomposition &dec, Side side = Side::O);

/// Inverse of the pair of projections; both paths must agree on ∂O.
Path glue_path(const Path &p_O, const Path &p_N, const RegionDecomposition &dec,
               double tol = kGlueTolerance);

/// sup_t ‖p(t) − q(t)‖ in `metric` (conformal weights evaluated at p(t)).
double epsilon_distance(const Path &p, const Path &q,
                        const SuperMetric &metric = SuperMetric::flat(),
                        const std::optional<double> &period = std::nullopt);

struct MatchPair {
  Index global;
  Index intrinsic;
  double epsilon;
};

struct Matching {
  std::vector<MatchPair> pairs;
  std::vector<Index> unmatched_global;
  std::vector<Index> unmatched_intrinsic;
};

enum class Verdict { localized, injective_only, not_localized };

const char *to_string(Verdict v);

struct LocalityReport {
  Side side = Side::O;
  double epsilon = 0.0;
  bool condition_i = false;
  bool condition_ii = false;
  Verdict verdict = Verdict::not_localized;
  Matching matching;
  /// For each global extremal: distance of its projection to the nearest
  /// intrinsic extremal (interior sites of the side).
  std::vector<double> global_deviation;
  /// For each intrinsic extremal: distance to the nearest projected global one.
  std::vector<double> intrinsic_deviation;
  double max_deviation = 0.0; ///< max of global_deviation
  /// max over global extremals and time of |φ(t) − φ_i| on ∂O.
  double boundary_drift = 0.0;
  Index global_count = 0;
  Index intrinsic_count = 0;
  Index global_seeds = 0;
  Index intrinsic_seeds = 0;
};

struct LocalityOptions {
  SolveOptions solve;
  double dedup_threshold = kDefaultDedupThreshold;
  int jobs = 1;
  SuperMetric metric = SuperMetric::flat();
};

/// Seeds for a problem: straight line plus `n_modes` mode perturbations.
struct SeedStrategy {
  Index n_modes = 0;
  double amplitude = 0.1;
};

std::vector<Seed> make_seeds(const ActionSpec &spec, const FieldConfig &phi_i,
                             const FieldConfig &phi_f, const SeedStrategy &strategy);

/// Endpoints used for the intrinsic problem of one side: projections of
/// phi_i, phi_f with the ∂O entries of both taken from phi_i.
std::pair<FieldConfig, FieldConfig> intrinsic_endpoints(const RegionDecomposition &dec,
                                                        Side side, const FieldConfig &phi_i,
                                                        const FieldConfig &phi_f);

/// Whether `side` is ε-localized between phi_i and phi_f. Extremal
/// distances are measured on the interior sites of the side; ∂O drift of the
/// global extremals is reported separately.
LocalityReport test_localization(const ActionSpec &spec, const RegionDecomposition &dec,
                                 const FieldConfig &phi_i, const FieldConfig &phi_f,
                                 const std::vector<Seed> &seeds_global,
                                 const std::vector<Seed> &seeds_intrinsic, double epsilon,
                                 Side side = Side::O, const LocalityOptions &options = {});

LocalityReport test_localization(const ActionSpec &spec, const RegionDecomposition &dec,
                                 const FieldConfig &phi_i, const FieldConfig &phi_f,
                                 const SeedStrategy &seeds, double epsilon,
                                 Side side = Side::O, const LocalityOptions &options = {});

struct MutualIndependence {
  LocalityReport O_indep_of_N;
  LocalityReport N_indep_of_O;
  bool mutual = false;
};

MutualIndependence test_mutual_independence(const ActionSpec &spec,
                                            const RegionDecomposition &dec,
                                            const FieldConfig &phi_i, const FieldConfig &phi_f,
                                            const SeedStrategy &seeds, double epsilon,
                                            const LocalityOptions &options = {});

struct Calibration {
  double discretization_error = 0.0;
  double epsilon = 0.0;
};

inline constexpr double kEpsilonSafetyFactor = 10.0;

/// Discretization error of the global and intrinsic straight-seed extremals,
/// measured as the distance between the K-step and 2K-step solutions at
/// shared times (larger of the two); ε = 10 × that.
Calibration calibrate_epsilon(const ActionSpec &spec, const RegionDecomposition &dec,
                              const FieldConfig &phi_i, const FieldConfig &phi_f,
                              Side side = Side::O, const SolveOptions &options = {});

struct AdditivityReport {
  double max_defect = 0.0;
  std::vector<double> defects;
};

/// |S_M − S_O − S_N + S_∂O| per sample; the ∂O term removes the double count
/// of boundary sites that belong to both sides.
AdditivityReport check_additivity(const ActionSpec &spec, const RegionDecomposition &dec,
                                  const std::vector<Path> &sample_paths);

using MetricField = std::function<Eigen::MatrixXd(const Eigen::VectorXd &)>;

struct ProductMetricReport {
  double warp_factor_variation = 0.0; ///< relative change of the O block
  double n_block_variation = 0.0;
  double cross_block_norm = 0.0;      ///< relative to the O block
  bool is_product = false;
};

inline constexpr double kProductTolerance = 1e-10;

/// Samples the metric at `base` with only the interior-N values changed
/// (uniform perturbations of size `spread`, deterministic seed).
ProductMetricReport check_product_metric(const MetricField &metric,
                                         const RegionDecomposition &dec,
                                         const FieldConfig &base, int samples = 16,
                                         double spread = 0.5, std::uint64_t seed = 7);

} // namespace emloc
