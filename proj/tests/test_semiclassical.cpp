#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"

#include "emloc/exemplars.hpp"
#include "emloc/semiclassical.hpp"
#include "gen.hpp"

using namespace emloc;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

ExtremalPath solve_straight(const ActionSpec &spec, const FieldConfig &a, const FieldConfig &b,
                            const SolveOptions &o = {}) {
  return solve(spec, a, b, straight_path(a, b, spec.time_steps, spec.total_time), o);
}

FieldConfig pt(const MeshPtr &m, std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v)
    x(i++) = d;
  return {m, x};
}

// exact oscillator kernel without the 1/√(2πiħ) prefactor
cd ho_kernel(double omega, double t, double xi, double xf, double hbar) {
  const double s = omega * ((xi * xi + xf * xf) * std::cos(omega * t) - 2 * xi * xf) /
                   (2 * std::sin(omega * t));
  return std::sqrt(omega / std::abs(std::sin(omega * t))) * std::exp(cd(0, s / hbar));
}

} // namespace

TEST_CASE("Van Vleck determinant of the free particle") {
  for (double t : {0.5, 1.0, 3.0}) {
    const ActionSpec spec = fixtures::oscillator(0.0, 100, t);
    const ExtremalPath ex = solve_straight(spec, pt(spec.mesh, {0}), pt(spec.mesh, {1}));
    for (auto m : {VanVleckMethod::hessian_block, VanVleckMethod::finite_difference}) {
      const VanVleckResult v = van_vleck(spec, ex, m);
      CHECK(std::abs(v.determinant - 1 / t) < 1e-6);
      CHECK_FALSE(v.near_caustic);
    }
  }
}

TEST_CASE("Van Vleck determinant of the oscillator") {
  const ActionSpec spec = fixtures::oscillator(1.0, 200, 1.0);
  const ExtremalPath ex = solve_straight(spec, pt(spec.mesh, {0}), pt(spec.mesh, {1}));
  const VanVleckResult h = van_vleck(spec, ex, VanVleckMethod::hessian_block);
  const VanVleckResult f = van_vleck(spec, ex, VanVleckMethod::finite_difference);
  CHECK(std::abs(h.determinant - 1 / std::sin(1.0)) < 1e-4);
  CHECK(std::abs(f.determinant - 1 / std::sin(1.0)) < 1e-4);
  CHECK(std::abs(h.determinant - f.determinant) / h.determinant < 1e-4);
  CHECK(h.sign == 1);
  CHECK(h.log_abs_determinant == doctest::Approx(std::log(h.determinant)));
}

TEST_CASE("determinant factorizes over uncoupled oscillators") {
  gen::Gen g(41);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Vector3d om(g.uniform(0.1, 2.5), g.uniform(0.1, 2.5), g.uniform(0.1, 2.5));
    const ActionSpec joint = fixtures::oscillators(om, 100, 1.0);
    const Eigen::VectorXd a = g.vector(3), b = g.vector(3);
    const ExtremalPath ex = solve_straight(joint, {joint.mesh, a}, {joint.mesh, b});
    double product = 1.0;
    for (Index i = 0; i < 3; ++i) {
      const ActionSpec one = fixtures::oscillator(om(i), 100, 1.0);
      const ExtremalPath e1 =
          solve_straight(one, pt(one.mesh, {a(i)}), pt(one.mesh, {b(i)}));
      product *= van_vleck(one, e1).determinant;
    }
    CHECK(std::abs(van_vleck(joint, ex).determinant - product) / product < 1e-6);
  }
}

TEST_CASE("method agreement on an anharmonic lattice") {
  ActionSpec spec = fixtures::circle_wave(8, 60, 0.8);
  spec.potential.site_quadratic = Eigen::VectorXd::Constant(8, 0.5);
  spec.potential.site_quartic = Eigen::VectorXd::Constant(8, 0.3);
  const FieldConfig a = FieldConfig::from_function(
      spec.mesh, [](const Eigen::VectorXd &x) { return 0.4 * std::sin(x(0)); });
  const FieldConfig b = FieldConfig::from_function(
      spec.mesh, [](const Eigen::VectorXd &x) { return 0.3 * std::cos(x(0)); });
  const ExtremalPath ex = solve_straight(spec, a, b);
  const VanVleckResult h = van_vleck(spec, ex, VanVleckMethod::hessian_block);
  const VanVleckResult f = van_vleck(spec, ex, VanVleckMethod::finite_difference);
  CHECK(std::abs(h.log_abs_determinant - f.log_abs_determinant) < 1e-4);
  CHECK((h.matrix - f.matrix).norm() / h.matrix.norm() < 1e-4);
}

TEST_CASE("coherent sums") {
  const KernelValue one = coherent_sum({{0.0, 1.0}});
  CHECK(std::abs(one.amplitude - cd(1, 0)) < 1e-15);
  for (double hbar : {1.0, 0.1, 3.0}) {
    const KernelValue k = coherent_sum({{0.7, 2.0}, {0.7 + pi * hbar, 2.0}}, hbar);
    CHECK(std::abs(k.amplitude) < 1e-12);
  }
}

TEST_CASE("free particle kernel matches the exact propagator phase") {
  for (double hbar : {1.0, 0.5}) {
    const double t = 2.0, xi = 0.3, xf = 1.1;
    const ActionSpec spec = fixtures::oscillator(0.0, 64, t);
    const FieldConfig a = pt(spec.mesh, {xi}), b = pt(spec.mesh, {xf});
    const ExtremalSet set = enumerate(spec, a, b, {straight_seed(spec, a, b)});
    KernelOptions ko;
    ko.hbar = hbar;
    const KernelValue k = kernel(spec, set, ko);
    const cd exact = std::sqrt(1 / t) * std::exp(cd(0, (xf - xi) * (xf - xi) / (2 * t * hbar)));
    CHECK(std::abs(k.amplitude - exact) < 1e-9);
    REQUIRE(k.per_extremal.size() == 1);
    CHECK(k.per_extremal[0].action_over_hbar == doctest::Approx(0.16 / hbar));
  }
}

TEST_CASE("oscillator kernel against the Mehler form") {
  const ActionSpec spec = fixtures::oscillator(1.3, 400, 0.9);
  const FieldConfig a = pt(spec.mesh, {0.2}), b = pt(spec.mesh, {-0.4});
  const ExtremalSet set = enumerate(spec, a, b, {straight_seed(spec, a, b)});
  const KernelValue k = kernel(spec, set);
  CHECK(std::abs(k.amplitude - ho_kernel(1.3, 0.9, 0.2, -0.4, 1.0)) < 1e-4);
}

TEST_CASE("a linear source leaves the kernel modulus unchanged") {
  gen::Gen g(3);
  const ActionSpec base = fixtures::oscillator(0.8, 100, 1.2);
  const FieldConfig a = pt(base.mesh, {0.1}), b = pt(base.mesh, {0.6});
  const double ref = std::abs(kernel(base, enumerate(base, a, b, {straight_seed(base, a, b)})).amplitude);
  for (int trial = 0; trial < 5; ++trial) {
    ActionSpec s = base;
    s.potential.source = Eigen::VectorXd::Constant(1, g.uniform(-2, 2));
    const KernelValue k = kernel(s, enumerate(s, a, b, {straight_seed(s, a, b)}));
    CHECK(std::abs(k.amplitude) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("near-caustic extremals are refused unless allowed") {
  // discrete conjugate time: K θ = π with cos θ = 1 − ω²dt²/2
  const Index steps = 50;
  const double dt = std::sqrt(2 * (1 - std::cos(pi / steps)));
  const ActionSpec spec = fixtures::oscillator(1.0, steps, steps * dt * (1 - 1e-10));
  const FieldConfig z = pt(spec.mesh, {0.0});
  SolveOptions loose;
  loose.conjugate_threshold = 0.0;
  const ExtremalPath ex = solve_straight(spec, z, z, loose);
  CHECK(van_vleck(spec, ex, VanVleckMethod::hessian_block, loose).near_caustic);

  ExtremalSet set{{ex}, z, z, kDefaultDedupThreshold, 1, {}};
  KernelOptions ko;
  ko.solve = loose;
  CHECK_THROWS_AS(kernel(spec, set, ko), CausticError);
  ko.allow_caustic = true;
  const KernelValue k = kernel(spec, set, ko);
  CHECK(k.per_extremal[0].near_caustic);
}

TEST_CASE("relative defect") {
  CHECK(std::isnan(relative_defect(cd(0, 0), cd(1, 0))));
  CHECK(relative_defect(cd(2, 0), cd(1, 0)) == doctest::Approx(0.5));
  CHECK(relative_defect(cd(0, 1), cd(0, 1)) == 0.0);
}

TEST_CASE("cross sensitivity") {
  SUBCASE("decoupled by a cut stencil") {
    const ActionSpec w = fixtures::circle_wave(32, 40, 1.0);
    const RegionDecomposition dec = fixtures::quarter_arc(w.mesh);
    const ActionSpec cut = cut_stiffness_at(w, dec.boundary());
    const FieldConfig a = FieldConfig::zero(w.mesh);
    const ExtremalPath ex = solve_straight(cut, a, a);
    CHECK(cross_sensitivity(cut, dec, ex).offdiag_norm < 1e-8);
  }
  SUBCASE("boundary-coupled wave") {
    const ActionSpec w = fixtures::circle_wave(64, 64, 1.0);
    const RegionDecomposition dec = fixtures::quarter_arc(w.mesh);
    const FieldConfig a = FieldConfig::zero(w.mesh);
    CHECK(cross_sensitivity(w, dec, solve_straight(w, a, a)).offdiag_norm > 1e-3);
  }
  SUBCASE("short times do not propagate") {
    double prev = 1e300;
    for (double t : {1.0, 0.1, 0.01}) {
      const ActionSpec w = fixtures::circle_wave(64, 2, t);
      const RegionDecomposition dec = fixtures::quarter_arc(w.mesh);
      const FieldConfig a = FieldConfig::zero(w.mesh);
      const double off = cross_sensitivity(w, dec, solve_straight(w, a, a)).offdiag_norm;
      CHECK(off < prev);
      prev = off;
    }
    CHECK(prev < 1e-5);
  }
}

TEST_CASE("cluster check on uncoupled oscillators") {
  const MeshPtr pair = build_particle_mesh(2);
  const ActionSpec spec = fixtures::oscillators(Eigen::Vector2d(1.0, 0.6), 400, 1.0);
  const RegionDecomposition dec = decompose_sites(pair, {0});
  const FieldConfig a = pt(pair, {0.1, -0.2}), b = pt(pair, {0.5, 0.4});
  const auto [ao, bo] = intrinsic_endpoints(dec, Side::O, a, b);
  const auto [an, bn] = intrinsic_endpoints(dec, Side::N, a, b);
  const ClusterReport r = cluster_check(
      spec, dec, a, b, {straight_seed(spec, a, b)},
      {straight_seed(intrinsic_action(spec, dec, Side::O), ao, bo)},
      {straight_seed(intrinsic_action(spec, dec, Side::N), an, bn)});
  CHECK(r.relative_defect < 1e-8);
  CHECK(r.reindexing_holds);
  const cd exact = ho_kernel(1.0, 1.0, 0.1, 0.5, 1.0) * ho_kernel(0.6, 1.0, -0.2, 0.4, 1.0);
  CHECK(std::abs(r.K_joint - exact) / std::abs(exact) < 1e-4);
}

TEST_CASE("cluster check on a stiffly coupled pair") {
  const MeshPtr pair = build_particle_mesh(2);
  ActionSpec spec;
  spec.mesh = pair;
  spec.field_period = 2 * pi;
  spec.time_steps = 64;
  spec.total_time = 0.5;
  spec.potential.pair_couplings = {{0, 1, 8.0}};
  const RegionDecomposition dec = decompose_sites(pair, {0});
  const FieldConfig a = pt(pair, {0, 0}), b = pt(pair, {pi / 2, pi / 2});
  std::vector<std::vector<int>> wj;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      wj.push_back({i, j});
  const ActionSpec so = intrinsic_action(spec, dec, Side::O);
  const ActionSpec sn = intrinsic_action(spec, dec, Side::N);
  const auto [ao, bo] = intrinsic_endpoints(dec, Side::O, a, b);
  const auto [an, bn] = intrinsic_endpoints(dec, Side::N, a, b);
  const ClusterReport r =
      cluster_check(spec, dec, a, b, winding_seeds(spec, a, b, wj),
                    winding_seeds(so, ao, bo, {{-1}, {0}, {1}}),
                    winding_seeds(sn, an, bn, {{-1}, {0}, {1}}));
  CHECK(r.relative_defect > 0.1);
}
