#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "emloc/io.hpp"

namespace emloc {

struct MetricCheck {
  enum class Kind { below, above, equal, info };
  double value = 0.0;
  Kind kind = Kind::info;
  double bound = 0.0;
  bool pass = true;
};

struct ExperimentResult {
  std::string name;
  std::map<std::string, MetricCheck> metrics;
  std::vector<std::string> artifacts; ///< file names relative to the output directory
  json details = json::object();
  bool pass = true;

  /// value < bound (NaN fails)
  void below(const std::string &key, double value, double bound);
  /// value > bound (NaN fails)
  void above(const std::string &key, double value, double bound);
  /// value == bound exactly
  void equal(const std::string &key, double value, double bound);
  void info(const std::string &key, double value);
  /// Records a failure that prevented a metric from being computed.
  void error(const std::string &key, const std::string &message);
  std::vector<std::string> failures() const;
};

json to_json(const ExperimentResult &r);

struct RunOptions {
  SolveOptions solve;
  /// Artifacts are written here when non-empty.
  std::string out_dir;
};

/// 5-point polar Laplace solve on the annulus r1 = 2, r2 = 4 with φ(r1) = 0 and
/// φ(r2) = 4 sin 5θ. With `deferred_correction` the plain solution is
/// followed by one correction pass using a fourth-order truncation estimate.
struct AnnulusSolution {
  MeshPtr mesh;
  Eigen::MatrixXd plain;     ///< n_r × n_theta
  Eigen::MatrixXd corrected; ///< n_r × n_theta (equal to plain without correction)
  Eigen::MatrixXd exact;
  double plain_max_error = 0.0;
  double max_error = 0.0;
};

inline constexpr double kAnnulusInner = 2.0;
inline constexpr double kAnnulusOuter = 4.0;

double annulus_exact(double r, double theta);
AnnulusSolution solve_annulus(Index n_r, Index n_theta, bool deferred_correction = true);

ExperimentResult run_annulus(Index n_r, Index n_theta, const RunOptions &options = {});
/// [O]/[M] = num/den on a circle of circumference 2π.
ExperimentResult run_circle_wave(std::int64_t num, std::int64_t den,
                                 const RunOptions &options = {});
ExperimentResult run_circle_wave_irrational(const std::string &ratio_symbol,
                                            const RunOptions &options = {});
ExperimentResult run_nonlocal_source(const RunOptions &options = {},
                                     const std::vector<double> &amplitudes = {0.0, 0.5, 1.0});

ExperimentResult run_van_vleck_suite(const RunOptions &options = {});
ExperimentResult run_cluster_suite(const RunOptions &options = {});
ExperimentResult run_locality_suite(const RunOptions &options = {});
ExperimentResult run_jacobi_suite(const RunOptions &options = {});
ExperimentResult run_discretization_suite(const RunOptions &options = {});

struct Experiment {
  std::string name;
  std::string description;
  std::function<ExperimentResult(const RunOptions &)> run;
};

/// Every canned experiment and oracle suite, in a fixed order.
const std::vector<Experiment> &registry();

struct VerifyAllResult {
  std::vector<ExperimentResult> results;
  bool pass = false;
};

/// Runs each experiment (up to `jobs` at a time); results in registry order.
/// Exceptions are caught and reported as failures of that experiment.
VerifyAllResult verify_all(const std::vector<Experiment> &experiments, const RunOptions &options,
                           int jobs = 1);

json summary_json(const VerifyAllResult &r);

/// Extremal of a quadratic action by one dense linear solve of the stacked
/// Euler–Lagrange system (independent of the block-tridiagonal Newton path).
Path dense_quadratic_extremal(const ActionSpec &spec, const FieldConfig &phi_i,
                              const FieldConfig &phi_f);

namespace fixtures {

/// One-site oscillator V = ½ ω² x² (ω = 0 gives the free particle).
ActionSpec oscillator(double omega, Index steps = 200, double total_time = 1.0);
/// Point system with independent oscillators of the given frequencies.
ActionSpec oscillators(const Eigen::VectorXd &omegas, Index steps = 200, double total_time = 1.0);
/// Free scalar wave on a circle of circumference 2π with unit stiffness.
ActionSpec circle_wave(Index n_sites, Index steps, double total_time);
/// Inverse-Laplacian kernel on the circle with a uniform source of amplitude
/// `amplitude` on sites [source_begin, source_end).
ActionSpec nonlocal_source(Index n_sites, double amplitude, Index source_begin, Index source_end,
                           Index steps, double total_time);
/// Quarter-arc decomposition of an n-site circle: O = sites 1..n/4 − 1.
RegionDecomposition quarter_arc(const MeshPtr &circle);

} // namespace fixtures

} // namespace emloc
