#include "emloc/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "emloc/semiclassical.hpp"

namespace emloc {

ModeBasis eigenmodes(const MeshPtr &mesh, ModeBoundary boundary, Index k,
                     std::optional<std::vector<Index>> dirichlet_sites) {
  ModeBasis basis;
  basis.mesh = mesh;
  basis.boundary = boundary;
  if (boundary == ModeBoundary::dirichlet)
    basis.dirichlet_sites = dirichlet_sites ? *dirichlet_sites : mesh->boundary_sites();
  std::sort(basis.dirichlet_sites.begin(), basis.dirichlet_sites.end());

  std::vector<Index> kept;
  for (Index s = 0; s < mesh->size(); ++s)
    if (!std::binary_search(basis.dirichlet_sites.begin(), basis.dirichlet_sites.end(), s))
      kept.push_back(s);
  const Index m = static_cast<Index>(kept.size());
  if (k <= 0 || k > m)
    throw InvalidCountError("requested " + std::to_string(k) + " modes but only " +
                            std::to_string(m) + " degrees of freedom are free");

  const Eigen::MatrixXd lap = Eigen::MatrixXd(stiffness_matrix(*mesh, unit_edge_stiffness(*mesh)));
  const Eigen::MatrixXd l_kept = select(lap, kept, kept);
  const Eigen::VectorXd w_kept = select(mesh->weights(), kept);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
      l_kept, Eigen::MatrixXd(w_kept.asDiagonal()));
  if (ges.info() != Eigen::Success)
    throw Error("generalized eigensolver failed");

  basis.eigenvalues = ges.eigenvalues().head(k);
  basis.eigenvectors = Eigen::MatrixXd::Zero(mesh->size(), k);
  for (Index j = 0; j < k; ++j) {
    Eigen::VectorXd v = ges.eigenvectors().col(j);
    Index big;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0)
      v = -v;
    for (Index i = 0; i < m; ++i)
      basis.eigenvectors(kept[static_cast<std::size_t>(i)], j) = v(i);
  }
  return basis;
}

double mode_residual(const ModeBasis &basis, Index i) {
  const Mesh &mesh = *basis.mesh;
  const Eigen::VectorXd h = basis.eigenvectors.col(i);
  const Eigen::VectorXd lh = stiffness_matrix(mesh, unit_edge_stiffness(mesh)) * h;
  Eigen::VectorXd r = lh.cwiseQuotient(mesh.weights()) - basis.eigenvalues(i) * h;
  for (Index s : basis.dirichlet_sites)
    r(s) = 0.0;
  return std::sqrt((mesh.weights().array() * r.array().square()).sum());
}

namespace {

std::int64_t narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min())
    throw Error("rational arithmetic overflow");
  return static_cast<std::int64_t>(v);
}

Rational make(__int128 n, __int128 d) {
  if (d == 0)
    throw Error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 a = n < 0 ? -n : n, b = d;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  return Rational(narrow(n), narrow(d));
}

} // namespace

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  if (den == 0)
    throw Error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational operator+(const Rational &a, const Rational &b) {
  return make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
              static_cast<__int128>(a.den) * b.den);
}
Rational operator-(const Rational &a, const Rational &b) {
  return make(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
              static_cast<__int128>(a.den) * b.den);
}
Rational operator*(const Rational &a, const Rational &b) {
  return make(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
}
Rational operator/(const Rational &a, const Rational &b) {
  return make(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
}
bool operator<(const Rational &a, const Rational &b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

ModeMatchReport commensurability(const Rational &length_region, const Rational &length_M,
                                 std::int64_t n_max, std::optional<std::int64_t> global_cutoff) {
  if (!(Rational(0) < length_region) || !(length_region < length_M))
    throw InvalidGeometryError("commensurability needs 0 < [region] < [M]");
  if (n_max < 1)
    throw InvalidCountError("n_max must be positive");
  ModeMatchReport report;
  report.length_region = length_region;
  report.length_M = length_M;
  report.n_max = n_max;
  report.global_cutoff = global_cutoff;
  const Rational ratio = length_M / length_region;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const Rational target = Rational(n) * ratio;
    if (target.is_integer() && (!global_cutoff || target.num <= *global_cutoff))
      report.matched.push_back({n, target.num});
    else
      report.unmatched_intrinsic.push_back(n);
  }
  report.only_constant_solution = report.matched.empty();
  return report;
}

ModeMatchReport commensurability_irrational(const std::string &ratio_symbol,
                                            std::int64_t n_max) {
  if (n_max < 1)
    throw InvalidCountError("n_max must be positive");
  ModeMatchReport report;
  report.irrational = ratio_symbol;
  report.n_max = n_max;
  report.ratio_class = RatioClass::incommensurate;
  for (std::int64_t n = 1; n <= n_max; ++n)
    report.unmatched_intrinsic.push_back(n);
  report.only_constant_solution = true;
  return report;
}

ModeIndependence mode_independence(const Rational &length_O, const Rational &length_M,
                                   std::int64_t n_max) {
  ModeIndependence out;
  out.O_side = commensurability(length_O, length_M, n_max);
  out.N_side = commensurability(length_M - length_O, length_M, n_max);
  out.mutual = out.O_side.surjective() && out.N_side.surjective();
  return out;
}

ActionSpec reduce_to_modes(const ActionSpec &spec, const ModeBasis &basis,
                           const Eigen::MatrixXd &mode_coupling) {
  spec.validate();
  if (!spec.is_quadratic() || spec.field_period)
    throw UnsupportedError("mode reduction needs a quadratic action on a real-valued field");
  require_same_mesh(spec.mesh, basis.mesh, "reduce_to_modes");
  const Index k = basis.size();
  const Eigen::MatrixXd &h = basis.eigenvectors;
  const Eigen::MatrixXd mass = h.transpose() * spec.mass().asDiagonal() * h;
  const double scale = mass.diagonal().cwiseAbs().maxCoeff();
  Eigen::MatrixXd off = mass;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw UnsupportedError("kinetic form is not diagonal in the mode basis");

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(spec.mesh->size());
  Eigen::MatrixXd quad = h.transpose() * potential_hessian(spec, zero) * h;
  if (mode_coupling.size() > 0) {
    if (mode_coupling.rows() != k || mode_coupling.cols() != k)
      throw MeshMismatchError("mode coupling must be k x k");
    quad += mode_coupling;
  }
  quad = 0.5 * (quad + quad.transpose()).eval();

  ActionSpec out;
  out.mesh = build_particle_mesh(k);
  out.mass_density = mass.diagonal();
  out.time_steps = spec.time_steps;
  out.total_time = spec.total_time;
  out.potential.kernel = quad;
  const Eigen::VectorXd lin = h.transpose() * potential_gradient(spec, zero);
  if (lin.cwiseAbs().maxCoeff() > 0.0)
    out.potential.source = -lin;
  return out;
}

ModeSectorReport mode_sector_kernel(const ActionSpec &spec, const ModeBasis &basis,
                                    const std::vector<std::vector<Index>> &sectors,
                                    const Eigen::VectorXd &a_i, const Eigen::VectorXd &a_f,
                                    double hbar, const Eigen::MatrixXd &mode_coupling) {
  const ActionSpec reduced = reduce_to_modes(spec, basis, mode_coupling);
  const Index k = basis.size();
  if (a_i.size() != k || a_f.size() != k)
    throw MeshMismatchError("mode endpoints need one coordinate per mode");
  std::vector<int> owner(static_cast<std::size_t>(k), -1);
  for (std::size_t s = 0; s < sectors.size(); ++s)
    for (Index i : sectors[s]) {
      if (i < 0 || i >= k || owner[static_cast<std::size_t>(i)] >= 0)
        throw InvalidCountError("sectors must partition the mode indices");
      owner[static_cast<std::size_t>(i)] = static_cast<int>(s);
    }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end())
    throw InvalidCountError("sectors must partition the mode indices");

  ModeSectorReport report;
  const Eigen::MatrixXd &quad = reduced.potential.kernel;
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (owner[static_cast<std::size_t>(i)] != owner[static_cast<std::size_t>(j)])
        report.max_offsector_coupling = std::max(report.max_offsector_coupling,
                                                 std::abs(quad(i, j)));

  KernelOptions opts;
  opts.hbar = hbar;
  auto propagate = [&](const ActionSpec &s, const Eigen::VectorXd &x0, const Eigen::VectorXd &x1) {
    const FieldConfig phi_i(s.mesh, x0), phi_f(s.mesh, x1);
    const ExtremalSet set = enumerate(s, phi_i, phi_f, {straight_seed(s, phi_i, phi_f)});
    return kernel(s, set, opts).amplitude;
  };

  report.K_joint = propagate(reduced, a_i, a_f);
  report.K_product = 1.0;
  for (const auto &sector : sectors) {
    std::vector<Index> sorted = sector;
    std::sort(sorted.begin(), sorted.end());
    const ActionSpec sub = restrict_action(reduced, sorted);
    const std::complex<double> ks = propagate(sub, select(a_i, sorted), select(a_f, sorted));
    report.sector_kernels.push_back(ks);
    report.K_product *= ks;
  }
  report.relative_defect = relative_defect(report.K_joint, report.K_product);
  return report;
}

} // namespace emloc
