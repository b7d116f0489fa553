#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "doctest.h"

#include "emloc/model.hpp"
#include "gen.hpp"

using namespace emloc;
using std::numbers::pi;

namespace {

// Central differences of the action, one interior entry at a time.
Eigen::MatrixXd fd_gradient(const ActionSpec &spec, const Path &p, double h) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p.values().rows(), p.values().cols());
  const std::vector<Index> free = spec.free_sites();
  for (Index k = 1; k + 1 < p.slice_count(); ++k)
    for (Index s : free) {
      Path a = p, b = p;
      a.values()(s, k) += h;
      b.values()(s, k) -= h;
      g(s, k) = (action(spec, a) - action(spec, b)) / (2 * h);
    }
  return g;
}

void hold_pinned(const ActionSpec &spec, Path &p) {
  for (Index s : spec.pinned)
    p.values().row(s).setConstant(p.values()(s, 0));
}

} // namespace

TEST_CASE("hand-computed two-site action") {
  ActionSpec spec;
  spec.mesh = build_particle_mesh(2);
  spec.mass_density = Eigen::Vector2d(1, 2);
  spec.potential.site_quadratic = Eigen::Vector2d(1, 3);
  spec.potential.site_quartic = Eigen::Vector2d(0, 0.5);
  spec.potential.source = Eigen::Vector2d(0.2, 0);
  spec.time_steps = 2;
  spec.total_time = 1.0;
  Eigen::MatrixXd v(2, 3);
  v << 0, 1, 2, //
      0, -1, 1;
  CHECK(action(spec, Path(spec.mesh, v, 0.5)) == doctest::Approx(10.23125).epsilon(1e-14));
}

TEST_CASE("trivial action values") {
  const ActionSpec wave = [] {
    ActionSpec s;
    s.mesh = build_circle_mesh(16, 2 * pi);
    s.potential.edge_stiffness = unit_edge_stiffness(*s.mesh);
    return s;
  }();
  const FieldConfig c = FieldConfig::constant(wave.mesh, 0.7);
  const Path still = straight_path(c, c, wave.time_steps, wave.total_time);
  CHECK(action(wave, still) == 0.0);
  CHECK(eom_residual(wave, still).values().cwiseAbs().maxCoeff() == 0.0);

  ActionSpec free;
  free.mesh = build_particle_mesh(1);
  free.time_steps = 10;
  const Path line = straight_path(FieldConfig::constant(free.mesh, 0.0),
                                  FieldConfig::constant(free.mesh, 1.0), 10, 1.0);
  CHECK(action(free, line) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("mismatch and validation errors") {
  ActionSpec spec;
  spec.mesh = build_circle_mesh(8, 1.0);
  const MeshPtr other = build_circle_mesh(9, 1.0);
  const Path p(other, Eigen::MatrixXd::Zero(9, spec.time_steps + 1), spec.dt());
  CHECK_THROWS_AS(action(spec, p), MeshMismatchError);
  CHECK_THROWS_AS(eom_residual(spec, p), MeshMismatchError);

  ActionSpec bad = spec;
  bad.potential.kernel = Eigen::MatrixXd::Zero(8, 8);
  bad.potential.kernel(0, 1) = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = spec;
  bad.potential.site_quadratic = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("residual matches finite differences of the action") {
  gen::Gen g(21);
  for (int trial = 0; trial < 20; ++trial) {
    ActionSpec spec = gen::random_quadratic_spec(g);
    if (g.coin())
      spec.potential.site_quartic = (g.vector(spec.mesh->size(), 0.5).array() + 0.5).matrix();
    Path p = gen::random_path(g, spec.mesh, spec.time_steps, spec.total_time);
    hold_pinned(spec, p);
    const Eigen::MatrixXd r = eom_residual(spec, p).values();
    const Eigen::MatrixXd fd = fd_gradient(spec, p, 1e-5);
    CHECK((r - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(r.col(0).isZero());
    CHECK(r.col(r.cols() - 1).isZero());
    for (Index s : spec.pinned)
      CHECK(r.row(s).isZero());
  }
}

TEST_CASE("residual of circle-valued pair couplings") {
  gen::Gen g(4);
  ActionSpec spec;
  spec.mesh = build_particle_mesh(3);
  spec.field_period = 2 * pi;
  spec.time_steps = 8;
  spec.potential.pair_couplings = {{0, 1, 0.7}, {1, 2, -0.4}};
  for (int trial = 0; trial < 10; ++trial) {
    const Path p = gen::random_path(g, spec.mesh, 8, 1.0, 3.0);
    const Eigen::MatrixXd r = eom_residual(spec, p).values();
    const Eigen::MatrixXd fd = fd_gradient(spec, p, 1e-5);
    CHECK((r - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("action is additive over time") {
  gen::Gen g(8);
  for (int trial = 0; trial < 20; ++trial) {
    const ActionSpec spec = gen::random_quadratic_spec(g);
    const Path p = gen::random_path(g, spec.mesh, spec.time_steps, spec.total_time);
    const Index cut = g.index(2, spec.time_steps - 2);
    const Path a(spec.mesh, p.values().leftCols(cut + 1), p.dt());
    const Path b(spec.mesh, p.values().rightCols(spec.time_steps - cut + 1), p.dt());
    ActionSpec sa = spec, sb = spec;
    sa.time_steps = cut;
    sa.total_time = cut * p.dt();
    sb.time_steps = spec.time_steps - cut;
    sb.total_time = sb.time_steps * p.dt();
    CHECK(action(spec, p) == doctest::Approx(action(sa, a) + action(sb, b)).epsilon(1e-12));
  }
}

TEST_CASE("field difference wraps into the half-open period window") {
  const std::optional<double> period = 2 * pi;
  const Eigen::VectorXd a = Eigen::Vector3d(0.1, 0.0, 1.0);
  const Eigen::VectorXd b = Eigen::Vector3d(2 * pi - 0.1, pi, 1.0 + 4 * pi + 0.5);
  const Eigen::VectorXd d = field_difference(a, b, period);
  CHECK(d(0) == doctest::Approx(-0.2));
  CHECK(d(1) == doctest::Approx(pi));
  CHECK(d(2) == doctest::Approx(0.5));
  CHECK(field_difference(a, b, std::nullopt) == b - a);
}

TEST_CASE("inverse Laplacian kernel against a bordered solve") {
  gen::Gen g(2);
  for (Index n : {8, 17, 64}) {
    const MeshPtr m = build_circle_mesh(n, 2 * pi);
    const Eigen::MatrixXd k = inverse_laplacian_kernel(*m);
    const Eigen::MatrixXd l = stiffness_matrix(*m, unit_edge_stiffness(*m));
    const Eigen::VectorXd w = m->weights();
    // (L + w wᵀ) ψ = Wφ fixes the zero-mean solution when φ has zero mean
    const Eigen::MatrixXd bordered = l + w * w.transpose();
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd phi = g.vector(n);
      phi.array() -= w.dot(phi) / w.sum();
      const Eigen::VectorXd rhs = w.cwiseProduct(phi);
      const Eigen::VectorXd psi = bordered.partialPivLu().solve(rhs);
      CHECK(phi.dot(k * phi) == doctest::Approx(rhs.dot(psi)).epsilon(1e-10));
    }
    CHECK((k * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-9);
  }
  // continuum oracle: ∫ sin(mx) (−∂²)⁻¹ sin(mx) = π/m²
  const MeshPtr fine = build_circle_mesh(256, 2 * pi);
  const Eigen::MatrixXd kf = inverse_laplacian_kernel(*fine);
  for (int mode = 1; mode <= 3; ++mode) {
    const Eigen::VectorXd s = FieldConfig::from_function(fine, [mode](const Eigen::VectorXd &x) {
                                return std::sin(mode * x(0));
                              }).values();
    CHECK(std::abs(s.dot(kf * s) - pi / (mode * mode)) < 1e-3);
  }
}

TEST_CASE("intrinsic action of a local wave is the fixed-end string") {
  gen::Gen g(13);
  ActionSpec wave;
  wave.mesh = build_circle_mesh(24, 2 * pi);
  wave.potential.edge_stiffness = unit_edge_stiffness(*wave.mesh);
  wave.time_steps = 10;
  const RegionDecomposition dec = decompose_sites(wave.mesh, {3, 4, 5, 6, 7, 8});
  const ActionSpec in = intrinsic_action(wave, dec, Side::O);
  CHECK(in.mesh->size() == 8);
  CHECK(in.pinned == dec.side(Side::O).pinned);

  ActionSpec string;
  string.mesh = build_interval_mesh(8, 7 * 2 * pi / 24);
  string.potential.edge_stiffness = unit_edge_stiffness(*string.mesh);
  string.time_steps = 10;
  string.pinned = {0, 7};
  for (int trial = 0; trial < 10; ++trial) {
    Path p = gen::random_path(g, in.mesh, 10, 1.0);
    hold_pinned(in, p);
    const Path q(string.mesh, p.values(), p.dt());
    CHECK(action(in, p) == doctest::Approx(action(string, q)).epsilon(1e-13));
  }

  ActionSpec free;
  free.mesh = wave.mesh;
  CHECK(intrinsic_action(free, dec, Side::N).potential.is_zero());
}

TEST_CASE("intrinsic nonlocal kernel is a sub-block, not a restricted inverse") {
  const Index n = 64;
  ActionSpec spec;
  spec.mesh = build_circle_mesh(n, 2 * pi);
  spec.potential.kernel = inverse_laplacian_kernel(*spec.mesh);
  std::vector<Index> arc;
  for (Index s = 1; s < n / 4; ++s)
    arc.push_back(s);
  const RegionDecomposition dec = decompose_sites(spec.mesh, arc);
  const ActionSpec in = intrinsic_action(spec, dec, Side::O);
  const auto &parents = dec.side(Side::O).parent_sites;
  for (std::size_t i = 0; i < parents.size(); ++i)
    for (std::size_t j = 0; j < parents.size(); ++j)
      CHECK(in.potential.kernel(static_cast<Index>(i), static_cast<Index>(j)) ==
            spec.potential.kernel(parents[i], parents[j]));

  // oracle: Dirichlet chain on the arc interior, K = W L⁻¹ W with W = h
  const Index m = static_cast<Index>(arc.size());
  const double h = 2 * pi / n;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    lap(i, i) = 2 / h;
    if (i > 0)
      lap(i, i - 1) = lap(i - 1, i) = -1 / h;
  }
  const Eigen::MatrixXd dir = h * h * lap.inverse();
  Eigen::MatrixXd block(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      block(i, j) = spec.potential.kernel(arc[static_cast<std::size_t>(i)],
                                          arc[static_cast<std::size_t>(j)]);
  CHECK((block - dir).norm() / dir.norm() > 0.01);

  std::vector<Index> outside;
  for (Index s = 0; s < n; ++s)
    if (s < 1 || s >= n / 4)
      outside.push_back(s);
  const Eigen::MatrixXd lib = dirichlet_inverse_laplacian_kernel(*spec.mesh, outside);
  Eigen::MatrixXd lib_block(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      lib_block(i, j) = lib(arc[static_cast<std::size_t>(i)], arc[static_cast<std::size_t>(j)]);
  CHECK((lib_block - dir).norm() / dir.norm() < 1e-12);
}

TEST_CASE("restrict_action carries pins and truncates local terms") {
  ActionSpec spec;
  spec.mesh = build_circle_mesh(10, 1.0);
  spec.potential.edge_stiffness = unit_edge_stiffness(*spec.mesh);
  spec.potential.site_quadratic = Eigen::VectorXd::LinSpaced(10, 1, 10);
  spec.pinned = {2, 7};
  const ActionSpec r = restrict_action(spec, {1, 2, 3, 4});
  CHECK(r.mesh->size() == 4);
  CHECK(r.pinned == std::vector<Index>{1});
  CHECK(r.potential.site_quadratic == Eigen::Vector4d(2, 3, 4, 5));
  CHECK(r.potential.edge_stiffness.size() == 3);

  const ActionSpec cut = cut_stiffness_at(spec, {0});
  int zeros = 0;
  for (Index e = 0; e < cut.potential.edge_stiffness.size(); ++e)
    zeros += cut.potential.edge_stiffness(e) == 0.0;
  CHECK(zeros == 2);
  CHECK(with_pinned(spec, {5}).pinned.size() == 3);
}
