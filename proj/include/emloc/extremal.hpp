#pragma once

#include <string>
#include <vector>

#include "emloc/model.hpp"

namespace emloc {

struct ExtremalPath {
  Path path;
  double on_shell_action = 0.0;
  double residual_norm = 0.0;
  std::string seed_label;
  int iterations = 0;
  /// min |eigenvalue| / ‖Hessian‖_∞ of the second variation at the solution.
  double relative_min_eigenvalue = 0.0;
};

struct Seed {
  std::string label;
  Path path;
};

struct SeedFailure {
  std::string label;
  std::string reason;
};

struct ExtremalSet {
  std::vector<ExtremalPath> extremals;
  FieldConfig phi_i;
  FieldConfig phi_f;
  double dedup_threshold = 1e-4;
  Index seeds_tried = 0;
  std::vector<SeedFailure> failures;

  bool empty() const { return extremals.empty(); }
  Index size() const { return static_cast<Index>(extremals.size()); }
};

using SolveOptions = NewtonOptions;

inline constexpr double kDefaultDedupThreshold = 1e-4;

/// Damped Newton solve of the discrete Euler–Lagrange equations with the
/// endpoint slices (and pinned sites) held fixed. Pinned sites take their
/// values from phi_i for the whole history; phi_f must agree there.
ExtremalPath solve(const ActionSpec &spec, const FieldConfig &phi_i,
                   const FieldConfig &phi_f, const Path &initial_guess,
                   const SolveOptions &options = {});

/// Solves from each seed and keeps one representative per cluster of paths
/// closer than `dedup_threshold` (sup over slices of the flat L² distance).
/// Seeds that fail are recorded in `failures`. With jobs > 1 seeds are solved
/// concurrently; the result is identical to the sequential one.
ExtremalSet enumerate(const ActionSpec &spec, const FieldConfig &phi_i,
                      const FieldConfig &phi_f, const std::vector<Seed> &seeds,
                      const SolveOptions &options = {},
                      double dedup_threshold = kDefaultDedupThreshold, int jobs = 1);

enum class PathEnd { initial, final };

/// Endpoint momentum: +∂S/∂φ_K at the final end, −∂S/∂φ_0 at the initial end.
FieldConfig on_shell_momentum(const ActionSpec &spec, const ExtremalPath &ex,
                              PathEnd end);

/// Mean of the discrete step energies along a path.
double on_shell_energy(const ActionSpec &spec, const Path &path);

/// sup_k ‖p_k − q_k‖ in the flat L² norm (differences taken modulo the field
/// period when one is given).
double sup_slice_distance(const Path &p, const Path &q,
                          const std::optional<double> &period = std::nullopt);

/// Straight line between endpoints.
Seed straight_seed(const ActionSpec &spec, const FieldConfig &phi_i,
                   const FieldConfig &phi_f);

/// Straight line plus ±amplitude·sin(πt/T) times each of the lowest
/// `n_modes` Laplacian eigenmodes (vanishing on pinned sites).
std::vector<Seed> mode_seeds(const ActionSpec &spec, const FieldConfig &phi_i,
                             const FieldConfig &phi_f, Index n_modes, double amplitude);

/// For circle-valued fields: linear lifts that wind `windings[s]` extra
/// periods at site s. One seed per winding vector.
std::vector<Seed> winding_seeds(const ActionSpec &spec, const FieldConfig &phi_i,
                                const FieldConfig &phi_f,
                                const std::vector<std::vector<int>> &windings);

} // namespace emloc
