#include "emloc/semiclassical.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

namespace emloc {

namespace {

void fill_determinant(VanVleckResult &r) {
  if (r.matrix.size() == 0) {
    r.determinant = 1.0;
    r.log_abs_determinant = 0.0;
    r.sign = 1;
    return;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(r.matrix);
  const Eigen::MatrixXd &u = lu.matrixLU();
  double log_abs = 0.0;
  int sign = static_cast<int>(lu.permutationP().determinant());
  for (Index i = 0; i < u.rows(); ++i) {
    const double d = u(i, i);
    if (d == 0.0) {
      r.sign = 0;
      r.log_abs_determinant = -std::numeric_limits<double>::infinity();
      r.determinant = 0.0;
      return;
    }
    if (d < 0)
      sign = -sign;
    log_abs += std::log(std::abs(d));
  }
  r.sign = sign;
  r.log_abs_determinant = log_abs;
  r.determinant = sign * std::exp(log_abs);
}

Eigen::VectorXd final_momentum(const ActionSpec &spec, const ExtremalPath &ex) {
  return on_shell_momentum(spec, ex, PathEnd::final).values();
}

} // namespace

VanVleckResult van_vleck(const ActionSpec &spec, const ExtremalPath &ex,
                         VanVleckMethod method, const SolveOptions &options) {
  require_same_mesh(spec.mesh, ex.path.mesh(), "van_vleck");
  VanVleckResult r;
  r.sites = spec.free_sites();
  const Index m = static_cast<Index>(r.sites.size());
  const auto &values = ex.path.values();

  if (method == VanVleckMethod::hessian_block) {
    const ActionLagrangian lag(spec);
    r.matrix = -mixed_endpoint_derivative(lag, values, r.sites).transpose();
  } else {
    r.matrix.resize(m, m);
    const FieldConfig phi_f(spec.mesh, values.col(values.cols() - 1));
    for (Index j = 0; j < m; ++j) {
      const Index site = r.sites[static_cast<std::size_t>(j)];
      Eigen::VectorXd pi[2];
      for (int side = 0; side < 2; ++side) {
        const double h = side == 0 ? kFiniteDifferenceStep : -kFiniteDifferenceStep;
        Eigen::VectorXd start = values.col(0);
        start(site) += h;
        Path guess = ex.path;
        guess.values().col(0) = start;
        try {
          const ExtremalPath moved = solve(spec, FieldConfig(spec.mesh, start), phi_f, guess, options);
          pi[side] = final_momentum(spec, moved);
        } catch (const NonConvergenceError &e) {
          throw PropagationError(std::string("perturbed endpoint solve failed: ") + e.what());
        } catch (const ConjugatePointError &e) {
          throw PropagationError(std::string("perturbed endpoint solve failed: ") + e.what());
        }
      }
      r.matrix.col(j) = -select(Eigen::VectorXd((pi[0] - pi[1]) / (2.0 * kFiniteDifferenceStep)), r.sites);
    }
  }

  fill_determinant(r);
  const Eigen::VectorXd mass = spec.mass();
  for (Index s : r.sites)
    r.log_free_reference += std::log(mass(s) / spec.total_time);
  r.near_caustic = r.log_abs_determinant > std::log(kCausticFactor) + r.log_free_reference;
  return r;
}

double relative_defect(std::complex<double> joint, std::complex<double> product) {
  if (std::abs(joint) == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return std::abs(joint - product) / std::abs(joint);
}

KernelValue coherent_sum(const std::vector<std::pair<double, double>> &action_and_van_vleck,
                         double hbar) {
  if (!(hbar > 0))
    throw Error("hbar must be positive");
  KernelValue k;
  k.hbar = hbar;
  for (const auto &[s, d] : action_and_van_vleck) {
    ExtremalContribution c;
    c.action = s;
    c.van_vleck = std::abs(d);
    c.van_vleck_sign = d < 0 ? -1 : 1;
    c.phase = std::polar(1.0, s / hbar);
    c.term = std::sqrt(c.van_vleck) * c.phase;
    c.action_over_hbar = s / hbar;
    k.amplitude += c.term;
    k.per_extremal.push_back(c);
  }
  return k;
}

KernelValue kernel(const ActionSpec &spec, const ExtremalSet &set, const KernelOptions &options) {
  if (!(options.hbar > 0))
    throw Error("hbar must be positive");
  KernelValue k;
  k.hbar = options.hbar;
  for (const ExtremalPath &ex : set.extremals) {
    const VanVleckResult vv = van_vleck(spec, ex, options.method, options.solve);
    if (vv.near_caustic && !options.allow_caustic)
      throw CausticError("extremal '" + ex.seed_label + "' is near a caustic");
    ExtremalContribution c;
    c.seed_label = ex.seed_label;
    c.action = ex.on_shell_action;
    c.van_vleck = std::abs(vv.determinant);
    c.van_vleck_sign = vv.sign;
    c.phase = std::polar(1.0, ex.on_shell_action / options.hbar);
    c.term = std::exp(0.5 * vv.log_abs_determinant) * c.phase;
    c.action_over_hbar = ex.on_shell_action / options.hbar;
    c.near_caustic = vv.near_caustic;
    k.amplitude += c.term;
    k.per_extremal.push_back(std::move(c));
  }
  return k;
}

CrossSensitivity cross_sensitivity(const ActionSpec &spec, const RegionDecomposition &dec,
                                   const ExtremalPath &ex, VanVleckMethod method) {
  require_same_mesh(spec.mesh, dec.parent(), "cross_sensitivity");
  const VanVleckResult vv = van_vleck(spec, ex, method);
  std::vector<Index> where(static_cast<std::size_t>(spec.mesh->size()), -1);
  for (std::size_t k = 0; k < vv.sites.size(); ++k)
    where[static_cast<std::size_t>(vv.sites[k])] = static_cast<Index>(k);
  auto local = [&](const std::vector<Index> &sites) {
    std::vector<Index> out;
    for (Index s : sites)
      if (where[static_cast<std::size_t>(s)] >= 0)
        out.push_back(where[static_cast<std::size_t>(s)]);
    return out;
  };
  const std::vector<Index> o = local(dec.interior_O()), n = local(dec.interior_N());
  const double oo = select(vv.matrix, o, o).squaredNorm();
  const double nn = select(vv.matrix, n, n).squaredNorm();
  const double on = select(vv.matrix, o, n).squaredNorm();
  const double no = select(vv.matrix, n, o).squaredNorm();
  CrossSensitivity r;
  r.offdiag_absolute = std::sqrt(on + no);
  r.diag_norm = std::sqrt(oo + nn);
  r.offdiag_norm = r.diag_norm > 0 ? r.offdiag_absolute / r.diag_norm
                                   : std::numeric_limits<double>::infinity();
  return r;
}

ClusterReport cluster_check(const ActionSpec &spec, const RegionDecomposition &dec,
                            const FieldConfig &phi_i, const FieldConfig &phi_f,
                            const std::vector<Seed> &seeds_joint,
                            const std::vector<Seed> &seeds_O,
                            const std::vector<Seed> &seeds_N, const KernelOptions &options) {
  require_same_mesh(spec.mesh, dec.parent(), "cluster_check");
  const ActionSpec joint = with_pinned(spec, dec.boundary());
  const ActionSpec spec_O = intrinsic_action(spec, dec, Side::O);
  const ActionSpec spec_N = intrinsic_action(spec, dec, Side::N);

  const ExtremalSet set_joint = enumerate(joint, phi_i, phi_f, seeds_joint, options.solve);
  const ExtremalSet set_O = enumerate(spec_O, project(phi_i, dec, Side::O),
                                      project(phi_f, dec, Side::O), seeds_O, options.solve);
  const ExtremalSet set_N = enumerate(spec_N, project(phi_i, dec, Side::N),
                                      project(phi_f, dec, Side::N), seeds_N, options.solve);

  ClusterReport r;
  r.joint = kernel(joint, set_joint, options);
  r.kernel_O = kernel(spec_O, set_O, options);
  r.kernel_N = kernel(spec_N, set_N, options);
  r.K_joint = r.joint.amplitude;
  r.K_product = r.kernel_O.amplitude * r.kernel_N.amplitude;
  r.relative_defect = relative_defect(r.K_joint, r.K_product);
  r.defect_defined = !std::isnan(r.relative_defect);
  r.joint_count = set_joint.size();
  r.O_count = set_O.size();
  r.N_count = set_N.size();
  r.reindexing_holds = r.joint_count == r.O_count * r.N_count;
  return r;
}

} // namespace emloc
