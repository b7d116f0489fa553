#include <cmath>
#include <numbers>

#include "doctest.h"

#include "emloc/exemplars.hpp"
#include "emloc/extremal.hpp"
#include "gen.hpp"

using namespace emloc;
using std::numbers::pi;

namespace {

FieldConfig point(const MeshPtr &m, double x) { return FieldConfig::constant(m, x); }

ExtremalPath solve_straight(const ActionSpec &spec, const FieldConfig &a, const FieldConfig &b,
                            const SolveOptions &opts = {}) {
  return solve(spec, a, b, straight_path(a, b, spec.time_steps, spec.total_time), opts);
}

// S_cl = ω((x_i² + x_f²) cos ωT − 2 x_i x_f) / (2 sin ωT)
double ho_action(double omega, double t, double xi, double xf) {
  return omega * ((xi * xi + xf * xf) * std::cos(omega * t) - 2 * xi * xf) /
         (2 * std::sin(omega * t));
}

} // namespace

TEST_CASE("free particle is a straight line") {
  const ActionSpec spec = fixtures::oscillator(0.0, 50, 1.0);
  const ExtremalPath ex = solve_straight(spec, point(spec.mesh, 0), point(spec.mesh, 1));
  for (Index k = 0; k <= 50; ++k)
    CHECK(std::abs(ex.path.values()(0, k) - k / 50.0) < 1e-12);
  CHECK(ex.on_shell_action == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(on_shell_momentum(spec, ex, PathEnd::final)[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(on_shell_momentum(spec, ex, PathEnd::initial)[0] == doctest::Approx(1.0).epsilon(1e-10));

  const ExtremalPath still = solve_straight(spec, point(spec.mesh, 2), point(spec.mesh, 2));
  CHECK(std::abs(on_shell_momentum(spec, still, PathEnd::final)[0]) < 1e-12);
}

TEST_CASE("harmonic oscillator against the closed form") {
  const ActionSpec spec = fixtures::oscillator(1.0, 200, 1.0);
  const ExtremalPath ex = solve_straight(spec, point(spec.mesh, 0), point(spec.mesh, 1));
  CHECK(ex.residual_norm < 1e-10);
  double worst = 0;
  for (Index k = 0; k <= 200; ++k) {
    const double t = k * spec.dt();
    worst = std::max(worst, std::abs(ex.path.values()(0, k) - std::sin(t) / std::sin(1.0)));
  }
  CHECK(worst < 1e-4);
  CHECK(std::abs(ex.on_shell_action - ho_action(1, 1, 0, 1)) < 1e-4);
  CHECK(std::abs(on_shell_momentum(spec, ex, PathEnd::final)[0] - std::cos(1.0) / std::sin(1.0)) <
        1e-3);
  CHECK(std::abs(on_shell_momentum(spec, ex, PathEnd::initial)[0] - 1 / std::sin(1.0)) < 1e-3);
  CHECK(eom_residual(spec, ex.path).values().cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("oscillator action on random endpoints") {
  gen::Gen g(31);
  for (int trial = 0; trial < 10; ++trial) {
    const double omega = g.uniform(0.2, 2.0);
    const double t = g.uniform(0.3, 0.9 * pi / omega);
    const double xi = g.uniform(), xf = g.uniform();
    const ActionSpec spec = fixtures::oscillator(omega, 400, t);
    const ExtremalPath ex = solve_straight(spec, point(spec.mesh, xi), point(spec.mesh, xf));
    CHECK(std::abs(ex.on_shell_action - ho_action(omega, t, xi, xf)) < 1e-4);
  }
}

TEST_CASE("focal endpoints raise a conjugate-point error") {
  const ActionSpec spec = fixtures::oscillator(1.0, 200, pi);
  const MeshPtr m = spec.mesh;
  Path guess = straight_path(point(m, 0), point(m, 0), 200, pi);
  for (Index k = 0; k <= 200; ++k)
    guess.values()(0, k) = 0.1 * std::sin(k * pi / 200);
  CHECK_THROWS_AS(solve(spec, point(m, 0), point(m, 0), guess), ConjugatePointError);
}

TEST_CASE("nonconvergence is reported with the final residual") {
  ActionSpec spec = fixtures::oscillator(1.0, 40, 1.0);
  spec.potential.site_quartic = Eigen::VectorXd::Constant(1, 50.0);
  SolveOptions opts;
  opts.max_iters = 1;
  try {
    solve_straight(spec, point(spec.mesh, 0), point(spec.mesh, 2), opts);
    FAIL("expected nonconvergence");
  } catch (const NonConvergenceError &e) {
    CHECK(e.residual() > opts.tol);
  }
}

TEST_CASE("pinned sites must agree at both ends") {
  ActionSpec spec = fixtures::circle_wave(12, 20, 0.5);
  spec.pinned = {0};
  const FieldConfig a = FieldConfig::zero(spec.mesh);
  Eigen::VectorXd bv = Eigen::VectorXd::Zero(12);
  bv(0) = 1.0;
  const FieldConfig b(spec.mesh, bv);
  try {
    solve(spec, a, b, straight_path(a, b, 20, 0.5));
    FAIL("expected a mismatch");
  } catch (const BoundaryMismatchError &e) {
    CHECK(e.sites() == std::vector<Index>{0});
  }
}

TEST_CASE("winding sectors of a particle on a circle") {
  ActionSpec spec;
  spec.mesh = build_particle_mesh(1);
  spec.field_period = 2 * pi;
  spec.time_steps = 40;
  spec.total_time = 1.0;
  const FieldConfig a = point(spec.mesh, 0), b = point(spec.mesh, pi / 2);
  const std::vector<Seed> seeds = winding_seeds(spec, a, b, {{-1}, {0}, {1}});
  const ExtremalSet set = enumerate(spec, a, b, seeds);
  REQUIRE(set.size() == 3);
  for (int w = -1; w <= 1; ++w) {
    const double expected = std::pow(pi / 2 + 2 * pi * w, 2) / 2;
    bool found = false;
    for (const ExtremalPath &ex : set.extremals)
      found |= std::abs(ex.on_shell_action - expected) < 1e-10;
    CHECK(found);
  }
  CHECK_THROWS_AS(winding_seeds(fixtures::oscillator(0.0), a, b, {{1}}), UnsupportedError);
}

TEST_CASE("deduplication") {
  const ActionSpec spec = fixtures::circle_wave(16, 20, 0.5);
  const FieldConfig a = FieldConfig::from_function(
      spec.mesh, [](const Eigen::VectorXd &x) { return std::sin(x(0)); });
  const FieldConfig b = FieldConfig::from_function(
      spec.mesh, [](const Eigen::VectorXd &x) { return 0.5 * std::cos(2 * x(0)); });
  const Seed s = straight_seed(spec, a, b);
  CHECK(enumerate(spec, a, b, {s, s, s}).size() == 1);

  std::vector<Seed> many = mode_seeds(spec, a, b, 4, 0.3);
  many.push_back(s);
  const ExtremalSet set = enumerate(spec, a, b, many);
  CHECK(set.size() == 1);
  CHECK(set.seeds_tried == static_cast<Index>(many.size()));

  // survivors are pairwise separated by at least the threshold
  ActionSpec circ;
  circ.mesh = build_particle_mesh(2);
  circ.field_period = 2 * pi;
  circ.time_steps = 20;
  const FieldConfig p(circ.mesh, Eigen::Vector2d(0, 0.3)), q(circ.mesh, Eigen::Vector2d(1, 2));
  std::vector<std::vector<int>> w;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      w.push_back({i, j});
  const ExtremalSet ws = enumerate(circ, p, q, winding_seeds(circ, p, q, w));
  CHECK(ws.size() == 9);
  for (Index i = 0; i < ws.size(); ++i)
    for (Index j = i + 1; j < ws.size(); ++j)
      CHECK(sup_slice_distance(ws.extremals[static_cast<std::size_t>(i)].path,
                               ws.extremals[static_cast<std::size_t>(j)].path) >=
            ws.dedup_threshold);
}

TEST_CASE("failed seeds give an empty set, not an error") {
  ActionSpec spec = fixtures::oscillator(1.0, 200, pi);
  const FieldConfig z = point(spec.mesh, 0);
  const ExtremalSet set = enumerate(spec, z, z, {straight_seed(spec, z, z)});
  CHECK(set.empty());
  CHECK(set.failures.size() == 1);
}

TEST_CASE("concurrent enumeration equals sequential") {
  ActionSpec spec;
  spec.mesh = build_particle_mesh(2);
  spec.field_period = 2 * pi;
  spec.time_steps = 30;
  spec.potential.pair_couplings = {{0, 1, 0.3}};
  const FieldConfig p(spec.mesh, Eigen::Vector2d(0.1, 0.4)), q(spec.mesh, Eigen::Vector2d(1, 2));
  std::vector<std::vector<int>> w;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      w.push_back({i, j});
  const std::vector<Seed> seeds = winding_seeds(spec, p, q, w);
  const ExtremalSet one = enumerate(spec, p, q, seeds, {}, kDefaultDedupThreshold, 1);
  const ExtremalSet many = enumerate(spec, p, q, seeds, {}, kDefaultDedupThreshold, 4);
  REQUIRE(one.size() == many.size());
  for (std::size_t i = 0; i < one.extremals.size(); ++i) {
    CHECK(one.extremals[i].seed_label == many.extremals[i].seed_label);
    CHECK(one.extremals[i].path.values() == many.extremals[i].path.values());
  }
}

TEST_CASE("Newton agrees with a dense linear solve on random quadratic actions") {
  gen::Gen g(77);
  SolveOptions tight;
  tight.tol = 1e-13;
  for (int trial = 0; trial < 30; ++trial) {
    const ActionSpec spec = gen::random_quadratic_spec(g);
    Eigen::VectorXd av = g.vector(spec.mesh->size()), bv = g.vector(spec.mesh->size());
    for (Index s : spec.pinned)
      bv(s) = av(s);
    const FieldConfig a(spec.mesh, av), b(spec.mesh, bv);
    const Path dense = dense_quadratic_extremal(spec, a, b);
    const ExtremalPath ex = solve_straight(spec, a, b, tight);
    const double scale = dense.values().cwiseAbs().maxCoeff();
    CHECK((ex.path.values() - dense.values()).cwiseAbs().maxCoeff() / scale < 1e-10);
  }
}

TEST_CASE("energy is conserved to second order") {
  const ActionSpec spec = fixtures::oscillator(1.0, 200, 1.0);
  const ExtremalPath ex = solve_straight(spec, point(spec.mesh, 0), point(spec.mesh, 1));
  const Eigen::VectorXd e = step_energies(spec, ex.path);
  const double exact = 0.5 / std::pow(std::sin(1.0), 2);
  CHECK(std::abs(on_shell_energy(spec, ex.path) - exact) < 1e-4);
  CHECK(e.maxCoeff() - e.minCoeff() < 1e-4);
}
