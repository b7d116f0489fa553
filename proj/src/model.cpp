#include "emloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace emloc {

bool Potential::is_zero() const {
  auto zero = [](const auto &m) { return m.size() == 0 || m.isZero(0.0); };
  return zero(edge_stiffness) && zero(site_quadratic) && zero(site_quartic) &&
         zero(source) && zero(kernel) && pair_couplings.empty();
}

bool Potential::is_quadratic() const {
  return (site_quartic.size() == 0 || site_quartic.isZero(0.0)) &&
         pair_couplings.empty();
}

Eigen::VectorXd ActionSpec::mass() const {
  Eigen::VectorXd m = mesh->weights();
  if (mass_density.size() > 0)
    m.array() *= mass_density.array();
  return m;
}

std::vector<Index> ActionSpec::free_sites() const {
  std::vector<char> pin(static_cast<std::size_t>(mesh->size()), 0);
  for (Index p : pinned)
    pin.at(static_cast<std::size_t>(p)) = 1;
  std::vector<Index> out;
  for (Index i = 0; i < mesh->size(); ++i)
    if (!pin[static_cast<std::size_t>(i)])
      out.push_back(i);
  return out;
}

bool ActionSpec::is_quadratic() const {
  return potential.is_quadratic() && !field_period;
}

void ActionSpec::validate() const {
  if (!mesh)
    throw MeshMismatchError("action spec has no mesh");
  const Index n = mesh->size();
  if (time_steps < 2)
    throw Error("action spec needs time_steps >= 2");
  if (!(total_time > 0.0) || !std::isfinite(total_time))
    throw Error("action spec needs total_time > 0");
  auto sized = [n](const Eigen::VectorXd &v, Index want, const char *what) {
    if (v.size() != 0 && v.size() != want)
      throw MeshMismatchError(std::string(what) + " has the wrong length");
  };
  sized(mass_density, n, "mass_density");
  if (mass_density.size() > 0 && (mass_density.array() <= 0.0).any())
    throw Error("mass density must be positive");
  sized(potential.edge_stiffness, static_cast<Index>(mesh->edges().size()),
        "edge_stiffness");
  sized(potential.site_quadratic, n, "site_quadratic");
  sized(potential.site_quartic, n, "site_quartic");
  sized(potential.source, n, "source");
  const Eigen::MatrixXd &k = potential.kernel;
  if (k.size() != 0) {
    if (k.rows() != n || k.cols() != n)
      throw MeshMismatchError("kernel must be site x site");
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff()))
      throw Error("nonlocal kernel is not symmetric");
  }
  for (const auto &p : potential.pair_couplings) {
    if (p.a < 0 || p.a >= n || p.b < 0 || p.b >= n || p.a == p.b)
      throw MeshMismatchError("pair coupling references invalid sites");
  }
  for (Index p : pinned) {
    if (p < 0 || p >= n)
      throw MeshMismatchError("pinned site out of range");
  }
  if (field_period) {
    if (!(*field_period > 0.0))
      throw Error("field period must be positive");
    const bool periodic_safe =
        (potential.edge_stiffness.size() == 0 || potential.edge_stiffness.isZero(0.0)) &&
        (potential.site_quadratic.size() == 0 || potential.site_quadratic.isZero(0.0)) &&
        (potential.site_quartic.size() == 0 || potential.site_quartic.isZero(0.0)) &&
        (potential.source.size() == 0 || potential.source.isZero(0.0)) &&
        (potential.kernel.size() == 0 || potential.kernel.isZero(0.0));
    if (!periodic_safe)
      throw UnsupportedError(
          "circle-valued fields support only pair couplings in the potential");
  }
}

/// Precomputed pieces of a potential for repeated evaluation.
class PotentialEvaluator {
public:
  explicit PotentialEvaluator(const ActionSpec &spec)
      : pot_(spec.potential), w_(spec.mesh->weights()) {
    if (pot_.edge_stiffness.size() > 0 && !pot_.edge_stiffness.isZero(0.0))
      stiffness_ = stiffness_matrix(*spec.mesh, pot_.edge_stiffness);
  }

  double value(const Eigen::VectorXd &phi) const {
    double v = 0.0;
    if (stiffness_.nonZeros() > 0)
      v += 0.5 * phi.dot(stiffness_ * phi);
    if (pot_.site_quadratic.size() > 0)
      v += 0.5 * (w_.array() * pot_.site_quadratic.array() * phi.array().square()).sum();
    if (pot_.site_quartic.size() > 0)
      v += 0.25 * (w_.array() * pot_.site_quartic.array() * phi.array().square().square()).sum();
    if (pot_.source.size() > 0)
      v -= (w_.array() * pot_.source.array() * phi.array()).sum();
    if (pot_.kernel.size() > 0)
      v += 0.5 * phi.dot(pot_.kernel * phi);
    for (const auto &p : pot_.pair_couplings)
      v += p.strength * (1.0 - std::cos(phi(p.a) - phi(p.b)));
    return v;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd &phi) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(phi.size());
    if (stiffness_.nonZeros() > 0)
      g += stiffness_ * phi;
    if (pot_.site_quadratic.size() > 0)
      g.array() += w_.array() * pot_.site_quadratic.array() * phi.array();
    if (pot_.site_quartic.size() > 0)
      g.array() += w_.array() * pot_.site_quartic.array() * phi.array().cube();
    if (pot_.source.size() > 0)
      g.array() -= w_.array() * pot_.source.array();
    if (pot_.kernel.size() > 0)
      g.noalias() += pot_.kernel * phi;
    for (const auto &p : pot_.pair_couplings) {
      const double s = p.strength * std::sin(phi(p.a) - phi(p.b));
      g(p.a) += s;
      g(p.b) -= s;
    }
    return g;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd &phi) const {
    const Index n = phi.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    if (stiffness_.nonZeros() > 0)
      h += Eigen::MatrixXd(stiffness_);
    if (pot_.site_quadratic.size() > 0)
      h.diagonal().array() += w_.array() * pot_.site_quadratic.array();
    if (pot_.site_quartic.size() > 0)
      h.diagonal().array() += 3.0 * w_.array() * pot_.site_quartic.array() * phi.array().square();
    if (pot_.kernel.size() > 0)
      h += pot_.kernel;
    for (const auto &p : pot_.pair_couplings) {
      const double c = p.strength * std::cos(phi(p.a) - phi(p.b));
      h(p.a, p.a) += c;
      h(p.b, p.b) += c;
      h(p.a, p.b) -= c;
      h(p.b, p.a) -= c;
    }
    return h;
  }

private:
  const Potential &pot_;
  Eigen::VectorXd w_;
  Eigen::SparseMatrix<double> stiffness_;
};

double potential_value(const ActionSpec &spec, const Eigen::VectorXd &phi) {
  return PotentialEvaluator(spec).value(phi);
}

Eigen::VectorXd potential_gradient(const ActionSpec &spec, const Eigen::VectorXd &phi) {
  return PotentialEvaluator(spec).gradient(phi);
}

Eigen::MatrixXd potential_hessian(const ActionSpec &spec, const Eigen::VectorXd &phi) {
  return PotentialEvaluator(spec).hessian(phi);
}

Path::Path(MeshPtr mesh, Eigen::MatrixXd values, double dt)
    : mesh_(std::move(mesh)), values_(std::move(values)), dt_(dt) {
  if (!mesh_)
    throw MeshMismatchError("path has no mesh");
  if (values_.rows() != mesh_->size())
    throw MeshMismatchError("path slices do not match the mesh");
  if (values_.cols() < 2)
    throw Error("path needs at least two slices");
  if (!(dt_ > 0.0))
    throw Error("path time step must be positive");
  if (!values_.allFinite())
    throw Error("path values must be finite");
}

Path straight_path(const FieldConfig &phi_i, const FieldConfig &phi_f,
                   Index time_steps, double total_time) {
  require_same_mesh(phi_i.mesh(), phi_f.mesh(), "straight_path");
  Eigen::MatrixXd v(phi_i.size(), time_steps + 1);
  for (Index k = 0; k <= time_steps; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(time_steps);
    v.col(k) = (1.0 - s) * phi_i.values() + s * phi_f.values();
  }
  return {phi_i.mesh(), std::move(v), total_time / static_cast<double>(time_steps)};
}

Eigen::VectorXd field_difference(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                                 const std::optional<double> &period) {
  Eigen::VectorXd d = b - a;
  if (period) {
    const double p = *period;
    for (Index i = 0; i < d.size(); ++i)
      d(i) -= p * std::ceil(d(i) / p - 0.5);
  }
  return d;
}

ActionLagrangian::ActionLagrangian(const ActionSpec &spec)
    : spec_(&spec), mass_(spec.mass()), dt_(spec.dt()) {
  spec.validate();
  potential_ = std::make_shared<const PotentialEvaluator>(spec);
}

double ActionLagrangian::value(const Eigen::VectorXd &a, const Eigen::VectorXd &b) const {
  const Eigen::VectorXd d = field_difference(a, b, spec_->field_period);
  const PotentialEvaluator &pot = *potential_;
  return 0.5 * (mass_.array() * d.array().square()).sum() / dt_ -
         0.5 * dt_ * (pot.value(a) + pot.value(b));
}

void ActionLagrangian::gradient(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                                Eigen::VectorXd &ga, Eigen::VectorXd &gb) const {
  const Eigen::VectorXd d = field_difference(a, b, spec_->field_period);
  const Eigen::VectorXd p = mass_.cwiseProduct(d) / dt_;
  const PotentialEvaluator &pot = *potential_;
  ga = -p - 0.5 * dt_ * pot.gradient(a);
  gb = p - 0.5 * dt_ * pot.gradient(b);
}

void ActionLagrangian::hessian(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                               Eigen::MatrixXd &haa, Eigen::MatrixXd &hab,
                               Eigen::MatrixXd &hbb) const {
  const Eigen::MatrixXd kinetic = (mass_ / dt_).asDiagonal();
  const PotentialEvaluator &pot = *potential_;
  haa = kinetic - 0.5 * dt_ * pot.hessian(a);
  hbb = kinetic - 0.5 * dt_ * pot.hessian(b);
  hab = -kinetic;
}

namespace {
void require_spec_path(const ActionSpec &spec, const Path &path) {
  require_same_mesh(spec.mesh, path.mesh(), "action");
  if (path.time_steps() != spec.time_steps ||
      std::abs(path.dt() - spec.dt()) > 1e-12 * spec.dt())
    throw MeshMismatchError("path time grid does not match the action spec");
}
} // namespace

double action(const ActionSpec &spec, const Path &path) {
  require_spec_path(spec, path);
  return discrete_sum(ActionLagrangian(spec), path.values());
}

Path eom_residual(const ActionSpec &spec, const Path &path) {
  require_spec_path(spec, path);
  if (path.slice_count() < 3)
    throw Error("eom_residual needs at least three slices");
  Eigen::MatrixXd g = interior_gradient(ActionLagrangian(spec), path.values());
  for (Index p : spec.pinned)
    g.row(p).setZero();
  return {path.mesh(), std::move(g), path.dt()};
}

Eigen::VectorXd step_energies(const ActionSpec &spec, const Path &path) {
  require_spec_path(spec, path);
  const Eigen::VectorXd m = spec.mass();
  const PotentialEvaluator pot(spec);
  Eigen::VectorXd e(path.time_steps());
  for (Index k = 0; k < path.time_steps(); ++k) {
    const Eigen::VectorXd v =
        field_difference(path.values().col(k), path.values().col(k + 1), spec.field_period) /
        path.dt();
    e(k) = 0.5 * (m.array() * v.array().square()).sum() +
           0.5 * (pot.value(path.values().col(k)) + pot.value(path.values().col(k + 1)));
  }
  return e;
}

Eigen::SparseMatrix<double> stiffness_matrix(const Mesh &mesh,
                                             const Eigen::VectorXd &edge_stiffness) {
  const auto &edges = mesh.edges();
  if (edge_stiffness.size() != static_cast<Index>(edges.size()))
    throw MeshMismatchError("edge stiffness does not match the mesh edges");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(edges.size() * 4);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double c = edge_stiffness(static_cast<Index>(e)) / edges[e].length;
    if (c == 0.0)
      continue;
    t.emplace_back(edges[e].a, edges[e].a, c);
    t.emplace_back(edges[e].b, edges[e].b, c);
    t.emplace_back(edges[e].a, edges[e].b, -c);
    t.emplace_back(edges[e].b, edges[e].a, -c);
  }
  Eigen::SparseMatrix<double> l(mesh.size(), mesh.size());
  l.setFromTriplets(t.begin(), t.end());
  return l;
}

Eigen::VectorXd unit_edge_stiffness(const Mesh &mesh) {
  return Eigen::VectorXd::Ones(static_cast<Index>(mesh.edges().size()));
}

Eigen::MatrixXd inverse_laplacian_kernel(const Mesh &mesh) {
  const Eigen::MatrixXd l = stiffness_matrix(mesh, unit_edge_stiffness(mesh));
  const Eigen::VectorXd s = mesh.weights().cwiseSqrt();
  const Eigen::VectorXd s_inv = s.cwiseInverse();
  const Eigen::MatrixXd a = s_inv.asDiagonal() * l * s_inv.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd &lambda = eig.eigenvalues();
  const double cutoff = 1e-10 * lambda.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i)
    if (std::abs(lambda(i)) > cutoff)
      inv(i) = 1.0 / lambda(i);
  const Eigen::MatrixXd pinv =
      eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::MatrixXd k = s.asDiagonal() * pinv * s.asDiagonal();
  return 0.5 * (k + k.transpose());
}

Eigen::MatrixXd dirichlet_inverse_laplacian_kernel(const Mesh &mesh,
                                                   const std::vector<Index> &dirichlet) {
  std::vector<char> drop(static_cast<std::size_t>(mesh.size()), 0);
  for (Index d : dirichlet)
    drop.at(static_cast<std::size_t>(d)) = 1;
  std::vector<Index> keep;
  for (Index i = 0; i < mesh.size(); ++i)
    if (!drop[static_cast<std::size_t>(i)])
      keep.push_back(i);
  const Eigen::MatrixXd l = stiffness_matrix(mesh, unit_edge_stiffness(mesh));
  const Eigen::VectorXd s = select(Eigen::VectorXd(mesh.weights().cwiseSqrt()), keep);
  const Eigen::MatrixXd a =
      s.cwiseInverse().asDiagonal() * select(l, keep, keep) * s.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd sub = s.asDiagonal() * a.inverse() * s.asDiagonal();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(mesh.size(), mesh.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j)
      k(keep[i], keep[j]) = sub(static_cast<Index>(i), static_cast<Index>(j));
  return 0.5 * (k + k.transpose());
}

ActionSpec restrict_action(const ActionSpec &spec, const std::vector<Index> &sites) {
  return restrict_action(spec, sites, build_submesh(*spec.mesh, sites));
}

ActionSpec restrict_action(const ActionSpec &spec, const std::vector<Index> &sites,
                           MeshPtr submesh) {
  spec.validate();
  const Index n = static_cast<Index>(sites.size());
  std::vector<Index> local(static_cast<std::size_t>(spec.mesh->size()), -1);
  for (Index k = 0; k < n; ++k)
    local[static_cast<std::size_t>(sites[static_cast<std::size_t>(k)])] = k;

  ActionSpec out;
  out.mesh = std::move(submesh);
  out.time_steps = spec.time_steps;
  out.total_time = spec.total_time;
  out.field_period = spec.field_period;
  if (spec.mass_density.size() > 0)
    out.mass_density = select(spec.mass_density, sites);

  const Potential &p = spec.potential;
  if (p.edge_stiffness.size() > 0) {
    std::map<std::pair<Index, Index>, double> parent_kappa;
    const auto &edges = spec.mesh->edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
      parent_kappa[{edges[e].a, edges[e].b}] = p.edge_stiffness(static_cast<Index>(e));
    const auto &sub_edges = out.mesh->edges();
    out.potential.edge_stiffness.resize(static_cast<Index>(sub_edges.size()));
    for (std::size_t e = 0; e < sub_edges.size(); ++e) {
      const Index a = sites[static_cast<std::size_t>(sub_edges[e].a)];
      const Index b = sites[static_cast<std::size_t>(sub_edges[e].b)];
      out.potential.edge_stiffness(static_cast<Index>(e)) =
          parent_kappa.at({std::min(a, b), std::max(a, b)});
    }
  }
  if (p.site_quadratic.size() > 0)
    out.potential.site_quadratic = select(p.site_quadratic, sites);
  if (p.site_quartic.size() > 0)
    out.potential.site_quartic = select(p.site_quartic, sites);
  if (p.source.size() > 0)
    out.potential.source = select(p.source, sites);
  if (p.kernel.size() > 0)
    out.potential.kernel = select(p.kernel, sites, sites);
  for (const auto &pc : p.pair_couplings) {
    const Index a = local[static_cast<std::size_t>(pc.a)];
    const Index b = local[static_cast<std::size_t>(pc.b)];
    if (a >= 0 && b >= 0)
      out.potential.pair_couplings.push_back({a, b, pc.strength});
  }

  for (Index q : spec.pinned) {
    const Index l = local[static_cast<std::size_t>(q)];
    if (l >= 0)
      out.pinned.push_back(l);
  }
  std::sort(out.pinned.begin(), out.pinned.end());
  return out;
}

ActionSpec intrinsic_action(const ActionSpec &spec, const RegionDecomposition &dec,
                            Side side) {
  require_same_mesh(spec.mesh, dec.parent(), "intrinsic_action");
  const RegionSide &rs = dec.side(side);
  ActionSpec out = restrict_action(spec, rs.parent_sites, rs.mesh);
  for (Index l : rs.pinned)
    if (std::find(out.pinned.begin(), out.pinned.end(), l) == out.pinned.end())
      out.pinned.push_back(l);
  std::sort(out.pinned.begin(), out.pinned.end());
  return out;
}

ActionSpec cut_stiffness_at(const ActionSpec &spec, const std::vector<Index> &sites) {
  ActionSpec out = spec;
  if (out.potential.edge_stiffness.size() == 0)
    return out;
  const auto &edges = spec.mesh->edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const bool touches = std::find(sites.begin(), sites.end(), edges[e].a) != sites.end() ||
                         std::find(sites.begin(), sites.end(), edges[e].b) != sites.end();
    if (touches)
      out.potential.edge_stiffness(static_cast<Index>(e)) = 0.0;
  }
  return out;
}

ActionSpec with_pinned(const ActionSpec &spec, const std::vector<Index> &sites) {
  ActionSpec out = spec;
  for (Index s : sites)
    if (std::find(out.pinned.begin(), out.pinned.end(), s) == out.pinned.end())
      out.pinned.push_back(s);
  std::sort(out.pinned.begin(), out.pinned.end());
  return out;
}

} // namespace emloc
