#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "emloc/mesh.hpp"
#include "emloc/model.hpp"

namespace emloc {

enum class ModeBoundary { periodic, dirichlet };

/// Lowest eigenpairs of the weighted mesh Laplacian, L h = λ W h.
/// Columns of `eigenvectors` are orthonormal in the weighted (flat L²)
/// inner product and vanish on the Dirichlet sites.
struct ModeBasis {
  MeshPtr mesh;
  ModeBoundary boundary = ModeBoundary::periodic;
  std::vector<Index> dirichlet_sites;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  Index size() const { return eigenvalues.size(); }
  FieldConfig mode(Index i) const { return {mesh, eigenvectors.col(i)}; }
};

/// `dirichlet_sites` defaults to the mesh boundary sites for
/// ModeBoundary::dirichlet and is ignored for periodic.
ModeBasis eigenmodes(const MeshPtr &mesh, ModeBoundary boundary, Index k,
                     std::optional<std::vector<Index>> dirichlet_sites = std::nullopt);

/// Weighted norm of W⁻¹L h_i − λ_i h_i.
double mode_residual(const ModeBasis &basis, Index i);

/// Nonnegative rational with 64-bit parts, always in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  bool is_integer() const { return den == 1; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  friend bool operator==(const Rational &a, const Rational &b) = default;
};

Rational operator+(const Rational &a, const Rational &b);
Rational operator-(const Rational &a, const Rational &b);
Rational operator*(const Rational &a, const Rational &b);
Rational operator/(const Rational &a, const Rational &b);
bool operator<(const Rational &a, const Rational &b);

enum class RatioClass { commensurate, incommensurate };

struct ModeMatch {
  std::int64_t intrinsic; ///< n: wavenumber nπ/[region]
  std::int64_t global;    ///< n′: wavenumber n′π/[M]
};

struct ModeMatchReport {
  /// Lengths in units of [M] when rational; `irrational` names the ratio otherwise.
  std::optional<Rational> length_region;
  std::optional<Rational> length_M;
  std::string irrational;
  std::int64_t n_max = 32;
  std::optional<std::int64_t> global_cutoff;
  RatioClass ratio_class = RatioClass::commensurate;
  std::vector<ModeMatch> matched;
  std::vector<std::int64_t> unmatched_intrinsic;
  /// Only the constant field restricts consistently (no standing wave survives).
  bool only_constant_solution = false;

  bool surjective() const { return unmatched_intrinsic.empty(); }
};

inline constexpr std::int64_t kDefaultModeCutoff = 32;

/// Intrinsic Dirichlet modes of a region of length `length_region` inside a
/// circle of length `length_M`: mode n matches global mode n′ = n·[M]/[region]
/// when that is an integer not above `global_cutoff` (unbounded if unset).
ModeMatchReport commensurability(const Rational &length_region, const Rational &length_M,
                                 std::int64_t n_max = kDefaultModeCutoff,
                                 std::optional<std::int64_t> global_cutoff = std::nullopt);

/// Same question for a ratio the caller declares irrational (e.g. "1/sqrt(2)").
ModeMatchReport commensurability_irrational(const std::string &ratio_symbol,
                                            std::int64_t n_max = kDefaultModeCutoff);

struct ModeIndependence {
  ModeMatchReport O_side;
  ModeMatchReport N_side; ///< region length [M] − [O]
  bool mutual = false;
};

ModeIndependence mode_independence(const Rational &length_O, const Rational &length_M,
                                   std::int64_t n_max = kDefaultModeCutoff);

struct ModeSectorReport {
  std::complex<double> K_joint;
  std::complex<double> K_product;
  std::vector<std::complex<double>> sector_kernels;
  /// NaN when K_joint vanishes.
  double relative_defect = 0.0;
  /// Largest |coupling| between modes in different sectors (reduced potential).
  double max_offsector_coupling = 0.0;
};

/// Action of `spec` reduced to the span of the basis: a point system with one
/// coordinate per mode. `mode_coupling` (k×k, symmetric) is added to the
/// reduced quadratic form.
ActionSpec reduce_to_modes(const ActionSpec &spec, const ModeBasis &basis,
                           const Eigen::MatrixXd &mode_coupling = {});

/// Semi-classical kernel of the reduced system against the product of the
/// kernels of its sectors (each sector keeps only its own block).
ModeSectorReport mode_sector_kernel(const ActionSpec &spec, const ModeBasis &basis,
                                    const std::vector<std::vector<Index>> &sectors,
                                    const Eigen::VectorXd &a_i, const Eigen::VectorXd &a_f,
                                    double hbar = 1.0,
                                    const Eigen::MatrixXd &mode_coupling = {});

} // namespace emloc
