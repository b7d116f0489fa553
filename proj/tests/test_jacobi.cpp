#include <cmath>
#include <numbers>

#include "doctest.h"

#include "emloc/exemplars.hpp"
#include "emloc/jacobi.hpp"
#include "gen.hpp"

using namespace emloc;

namespace {

FieldConfig pt(const MeshPtr &m, std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v)
    x(i++) = d;
  return {m, x};
}

ExtremalPath solve_straight(const ActionSpec &spec, const FieldConfig &a, const FieldConfig &b) {
  return solve(spec, a, b, straight_path(a, b, spec.time_steps, spec.total_time));
}

// composite Simpson on [lo, hi]
template <typename F> double simpson(F f, double lo, double hi, int n = 20000) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i)
    s += (i % 2 ? 4 : 2) * f(lo + i * h);
  return s * h / 3;
}

} // namespace

TEST_CASE("conformal factor") {
  const ActionSpec free = fixtures::oscillator(0.0);
  CHECK(build_jacobi_metric(free, 0.5).conformal_factor(Eigen::VectorXd::Constant(1, 3.0)) ==
        doctest::Approx(1.0));
  const ActionSpec ho = fixtures::oscillators(Eigen::Vector2d(1, 1));
  const JacobiMetric m = build_jacobi_metric(ho, 1.0);
  CHECK(m.conformal_factor(Eigen::Vector2d::Zero()) == doctest::Approx(2.0));
  CHECK(m.matrix(Eigen::Vector2d::Zero()).isApprox(2 * Eigen::Matrix2d::Identity()));
  CHECK(m.conformal_factor(Eigen::Vector2d(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("forbidden regions are reported by segment") {
  ActionSpec spec = fixtures::oscillator(1.0, 10, 1.0);
  spec.potential.source = Eigen::VectorXd::Constant(1, -1.0); // V = ½x² + x ≥ −½
  const JacobiMetric m = build_jacobi_metric(spec, -0.6);
  const Path p = straight_path(pt(spec.mesh, {-1}), pt(spec.mesh, {1}), 10, 1.0);
  try {
    length(m, p);
    FAIL("expected a forbidden-region error");
  } catch (const ClassicallyForbiddenError &e) {
    CHECK(e.slices().size() == 10);
  }

  // partly forbidden: only segments reaching beyond |x| = 1 fail at E = ½
  const JacobiMetric half = build_jacobi_metric(fixtures::oscillator(1.0, 10, 1.0), 0.5);
  const Path q = straight_path(pt(spec.mesh, {0}), pt(spec.mesh, {2}), 10, 1.0);
  try {
    length(half, q);
    FAIL("expected a forbidden-region error");
  } catch (const ClassicallyForbiddenError &e) {
    // segment 4 ends on the turning point x = 1, which is allowed
    CHECK(e.slices() == std::vector<Index>{5, 6, 7, 8, 9});
  }
  // ends just past the turning point with every quadrature node inside
  const Path r = straight_path(pt(spec.mesh, {0}), pt(spec.mesh, {1.01}), 10, 1.0);
  try {
    length(half, r);
    FAIL("expected a forbidden-region error");
  } catch (const ClassicallyForbiddenError &e) {
    CHECK(e.slices() == std::vector<Index>{9});
  }
}

TEST_CASE("length of simple paths") {
  const ActionSpec free = fixtures::oscillator(0.0, 50, 1.0);
  const JacobiMetric m = build_jacobi_metric(free, 0.5);
  const FieldConfig z = pt(free.mesh, {0});
  CHECK(length(m, straight_path(z, z, 50, 1.0)) == 0.0);
  Path warped = straight_path(z, pt(free.mesh, {1}), 50, 1.0);
  for (Index k = 0; k <= 50; ++k)
    warped.values()(0, k) = std::pow(k / 50.0, 3);
  CHECK(length(m, warped) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("oscillator length against a quadrature oracle") {
  const ActionSpec ho = fixtures::oscillator(1.0, 400, 1.0);
  const ExtremalPath ex = solve_straight(ho, pt(ho.mesh, {0}), pt(ho.mesh, {1}));
  const double e = on_shell_energy(ho, ex.path);
  const double oracle = simpson([e](double x) { return std::sqrt(2 * (e - 0.5 * x * x)); }, 0, 1);
  CHECK(std::abs(length(build_jacobi_metric(ho, e), ex.path) - oracle) < 1e-4);
}

TEST_CASE("length does not depend on the parametrization") {
  gen::Gen g(6);
  const ActionSpec spec = fixtures::oscillators(Eigen::Vector2d(1.0, 2.0), 10, 1.0);
  const JacobiMetric m = build_jacobi_metric(spec, 5.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Vector2d a = g.vector(2), b = g.vector(2);
    const Index n = g.index(150, 300);
    Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(n + 1, 0, 1);
    Path uniform(spec.mesh, Eigen::MatrixXd(2, n + 1), 1.0);
    Path warped = uniform;
    const double power = g.uniform(0.5, 2.5);
    for (Index k = 0; k <= n; ++k) {
      uniform.values().col(k) = a + s(k) * (b - a);
      warped.values().col(k) = a + std::pow(s(k), power) * (b - a);
    }
    CHECK(std::abs(length(m, uniform) - length(m, warped)) < 1e-8);
    const Path re = reparametrize_by_length(m, warped);
    CHECK(image_distance(re, uniform) < 1e-12);
  }
}

TEST_CASE("energy Lagrangian derivatives match finite differences") {
  gen::Gen g(15);
  ActionSpec spec = fixtures::oscillators(Eigen::Vector3d(1.0, 0.5, 2.0), 20, 1.0);
  spec.potential.site_quartic = Eigen::Vector3d(0.1, 0.2, 0.0);
  const JacobiMetric m = build_jacobi_metric(spec, 10.0);
  const JacobiEnergyLagrangian lag(m, 20);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd a = g.vector(3), b = g.vector(3);
    Eigen::VectorXd ga, gb;
    lag.gradient(a, b, ga, gb);
    Eigen::MatrixXd haa, hab, hbb;
    lag.hessian(a, b, haa, hab, hbb);
    for (Index i = 0; i < 3; ++i) {
      const Eigen::VectorXd e = h * Eigen::VectorXd::Unit(3, i);
      const double fa = (lag.value(a + e, b) - lag.value(a - e, b)) / (2 * h);
      const double fb = (lag.value(a, b + e) - lag.value(a, b - e)) / (2 * h);
      CHECK(fa == doctest::Approx(ga(i)).epsilon(1e-6));
      CHECK(fb == doctest::Approx(gb(i)).epsilon(1e-6));
      Eigen::VectorXd ga1, gb1, ga2, gb2;
      lag.gradient(a + e, b, ga1, gb1);
      lag.gradient(a - e, b, ga2, gb2);
      CHECK(((ga1 - ga2) / (2 * h) - haa.col(i)).norm() < 1e-6 * (1 + haa.norm()));
      CHECK(((gb1 - gb2) / (2 * h) - hab.row(i).transpose()).norm() < 1e-6 * (1 + hab.norm()));
      lag.gradient(a, b + e, ga1, gb1);
      lag.gradient(a, b - e, ga2, gb2);
      CHECK(((gb1 - gb2) / (2 * h) - hbb.col(i)).norm() < 1e-6 * (1 + hbb.norm()));
    }
  }
}

TEST_CASE("image distance") {
  gen::Gen g(19);
  const MeshPtr m = build_particle_mesh(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Path p(m, g.matrix(2, 12), 0.1), q(m, g.matrix(2, 9), 0.1);
    CHECK(image_distance(p, p) == 0.0);
    CHECK(image_distance(p, q) == doctest::Approx(image_distance(q, p)));
    const Eigen::Vector2d shift(0.3, -0.4);
    Path moved = p;
    moved.values().colwise() += shift;
    CHECK(image_distance(p, moved) <= 0.5 + 1e-12);
    // reversing the traversal leaves the image unchanged
    const Path rev(m, p.values().rowwise().reverse(), 0.1);
    CHECK(image_distance(p, rev) == 0.0);
  }
  const Path seg(m, (Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished(), 1.0);
  const Path dot(m, (Eigen::MatrixXd(2, 3) << 0.5, 0.5, 0.5, 0.2, 0.2, 0.2).finished(), 1.0);
  CHECK(image_distance(seg, dot) == doctest::Approx(std::hypot(0.5, 0.2)));
}

TEST_CASE("extremals and geodesics share images") {
  SUBCASE("free particle") {
    const ActionSpec s = fixtures::oscillators(Eigen::Vector2d::Zero(), 50, 1.0);
    const ExtremalPath ex = solve_straight(s, pt(s.mesh, {0, 0}), pt(s.mesh, {1, -2}));
    const EquivalenceReport r =
        verify_equivalence(s, ex, build_jacobi_metric(s, on_shell_energy(s, ex.path)), 1e-8);
    CHECK(r.pass);
    CHECK(r.max_deviation < 1e-9);
  }
  SUBCASE("anisotropic oscillator") {
    const ActionSpec s = fixtures::oscillators(Eigen::Vector2d(1.0, 2.0), 400, 1.0);
    const ExtremalPath ex = solve_straight(s, pt(s.mesh, {1, 0}), pt(s.mesh, {0, 1}));
    const double e = on_shell_energy(s, ex.path);
    const EquivalenceReport r = verify_equivalence(s, ex, build_jacobi_metric(s, e), 1e-3);
    CHECK(r.pass);
    CHECK(r.energy == doctest::Approx(e));
    const EquivalenceReport off = verify_equivalence(s, ex, build_jacobi_metric(s, e + 0.5), 1e-3);
    CHECK_FALSE(off.pass);
    CHECK(off.max_deviation > 1e-2);
  }
}
