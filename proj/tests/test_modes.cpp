#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <numbers>

#include "doctest.h"

#include "emloc/exemplars.hpp"
#include "emloc/modes.hpp"
#include "gen.hpp"

using namespace emloc;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

cd gaussian_kernel(double omega, double t, double xi, double xf) {
  if (omega == 0.0)
    return std::sqrt(1 / t) * std::exp(cd(0, (xf - xi) * (xf - xi) / (2 * t)));
  const double s = omega * ((xi * xi + xf * xf) * std::cos(omega * t) - 2 * xi * xf) /
                   (2 * std::sin(omega * t));
  return std::sqrt(omega / std::abs(std::sin(omega * t))) * std::exp(cd(0, s));
}

} // namespace

TEST_CASE("circle spectrum matches the lattice dispersion") {
  for (Index n : {8, 13, 32}) {
    const double len = 3.0, h = len / n;
    const ModeBasis b = eigenmodes(build_circle_mesh(n, len), ModeBoundary::periodic, n);
    std::vector<double> oracle;
    for (Index k = 0; k < n; ++k)
      oracle.push_back((2 - 2 * std::cos(2 * pi * k / n)) / (h * h));
    std::sort(oracle.begin(), oracle.end());
    for (Index i = 0; i < n; ++i)
      CHECK(std::abs(b.eigenvalues(i) - oracle[static_cast<std::size_t>(i)]) <
            1e-10 * (1 + oracle.back()));
  }
}

TEST_CASE("continuum limits of the spectrum") {
  const ModeBasis c1 = eigenmodes(build_circle_mesh(64, 2 * pi), ModeBoundary::periodic, 1);
  CHECK(std::abs(c1.eigenvalues(0)) < 1e-10);
  CHECK(c1.eigenvectors.col(0).maxCoeff() - c1.eigenvectors.col(0).minCoeff() < 1e-10);

  const ModeBasis c5 = eigenmodes(build_circle_mesh(256, 2 * pi), ModeBoundary::periodic, 5);
  const double expect[] = {0, 1, 1, 4, 4};
  for (Index i = 0; i < 5; ++i)
    CHECK(std::abs(c5.eigenvalues(i) - expect[i]) < 1e-3);

  const ModeBasis iv = eigenmodes(build_interval_mesh(256, pi / 2), ModeBoundary::dirichlet, 3);
  const double dir[] = {4, 16, 36};
  for (Index i = 0; i < 3; ++i)
    CHECK(std::abs(iv.eigenvalues(i) - dir[i]) / dir[i] < 0.01);
  CHECK(iv.eigenvectors.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(iv.eigenvectors.row(255).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("modes are orthonormal eigenvectors") {
  for (const MeshPtr &m : {build_circle_mesh(40, 2.0), build_interval_mesh(30, 1.5),
                           build_annulus_mesh(5, 12, 1.0, 2.0)}) {
    const ModeBoundary bc =
        m->topology() == Topology::circle ? ModeBoundary::periodic : ModeBoundary::dirichlet;
    const ModeBasis b = eigenmodes(m, bc, 8);
    const Eigen::MatrixXd gram = b.eigenvectors.transpose() * m->weights().asDiagonal() * b.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
    for (Index i = 0; i < 8; ++i)
      CHECK(mode_residual(b, i) < 1e-8);
    for (Index i = 1; i < 8; ++i)
      CHECK(b.eigenvalues(i) >= b.eigenvalues(i - 1));
  }
  CHECK_THROWS_AS(eigenmodes(build_circle_mesh(6, 1.0), ModeBoundary::periodic, 7), InvalidCountError);
  CHECK_THROWS_AS(eigenmodes(build_interval_mesh(6, 1.0), ModeBoundary::dirichlet, 5),
                  InvalidCountError);
}

TEST_CASE("rational arithmetic") {
  gen::Gen g(17);
  CHECK(Rational(6, 8) == Rational(3, 4));
  CHECK(Rational(4, 2).is_integer());
  CHECK(Rational(3, 4).str() == "3/4");
  CHECK_THROWS(Rational(1, 0));
  for (int trial = 0; trial < 200; ++trial) {
    const Rational a(g.index(0, 50), g.index(1, 50)), b(g.index(1, 50), g.index(1, 50));
    CHECK(std::gcd(a.num, a.den) == (a.num == 0 ? a.den : 1));
    CHECK((a + b) - b == a);
    CHECK((a * b) / b == a);
    CHECK((a < b) == (a.to_double() < b.to_double() && !(a == b)));
    CHECK((a + b).to_double() == doctest::Approx(a.to_double() + b.to_double()));
  }
}

TEST_CASE("a quarter region") {
  // the first mode of O is the fourth of M
  const ModeMatchReport r = commensurability(Rational(1, 4), Rational(1));
  CHECK(r.ratio_class == RatioClass::commensurate);
  CHECK(r.surjective());
  REQUIRE(r.matched.size() == 32);
  for (std::int64_t n = 1; n <= 32; ++n) {
    CHECK(r.matched[static_cast<std::size_t>(n - 1)].intrinsic == n);
    CHECK(r.matched[static_cast<std::size_t>(n - 1)].global == 4 * n);
  }
  CHECK(r.matched.front().global == 4);

  const ModeMatchReport cut = commensurability(Rational(1, 4), Rational(1), 32, 20);
  CHECK(cut.matched.size() == 5);
  CHECK(cut.unmatched_intrinsic.front() == 6);
}

TEST_CASE("the complement of a quarter misses its fundamental") {
  const ModeIndependence mi = mode_independence(Rational(1, 4), Rational(1));
  CHECK(mi.O_side.surjective());
  CHECK_FALSE(mi.N_side.surjective());
  CHECK(mi.N_side.unmatched_intrinsic.front() == 1);
  // n · 4/3 is an integer exactly when 3 | n
  for (std::int64_t n = 1; n <= 32; ++n) {
    const bool matched = std::any_of(mi.N_side.matched.begin(), mi.N_side.matched.end(),
                                     [n](const ModeMatch &m) { return m.intrinsic == n; });
    CHECK(matched == (n % 3 == 0));
  }
  CHECK_FALSE(mi.mutual);
  CHECK(mode_independence(Rational(1, 2), Rational(1)).mutual);
}

TEST_CASE("commensurability properties") {
  gen::Gen g(29);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t den = g.index(2, 40);
    const Rational lo(g.index(1, den - 1), den);
    const ModeMatchReport r = commensurability(lo, Rational(1), 24);
    CHECK(r.matched.size() + r.unmatched_intrinsic.size() == 24);
    for (const ModeMatch &m : r.matched)
      CHECK(Rational(m.intrinsic) / lo == Rational(m.global));
    // every match is a multiple of the first reduced numerator
    for (const ModeMatch &m : r.matched)
      CHECK(m.intrinsic % lo.num == 0);
  }
  CHECK_THROWS_AS(commensurability(Rational(1), Rational(1)), InvalidGeometryError);
  CHECK_THROWS_AS(commensurability(Rational(0), Rational(1)), InvalidGeometryError);
}

TEST_CASE("an irrational ratio leaves only the constant field") {
  const ModeMatchReport r = commensurability_irrational("1/sqrt(2)");
  CHECK(r.matched.empty());
  CHECK(r.ratio_class == RatioClass::incommensurate);
  CHECK(r.only_constant_solution);
  CHECK(r.irrational == "1/sqrt(2)");
  CHECK(r.unmatched_intrinsic.size() == 32);
}

TEST_CASE("mode sector kernels") {
  const ActionSpec f = fixtures::circle_wave(64, 200, 0.5);
  const ModeBasis basis = eigenmodes(f.mesh, ModeBoundary::periodic, 8);
  gen::Gen g(5);
  const Eigen::VectorXd ai = g.vector(8, 0.3), af = g.vector(8, 0.3);
  const std::vector<std::vector<Index>> halves = {{0, 1, 2, 3}, {4, 5, 6, 7}};

  const ModeSectorReport r = mode_sector_kernel(f, basis, halves, ai, af);
  CHECK(r.relative_defect < 1e-8);
  CHECK(r.max_offsector_coupling < 1e-10);
  cd exact = 1.0;
  for (Index i = 0; i < 8; ++i)
    exact *= gaussian_kernel(std::sqrt(std::max(0.0, basis.eigenvalues(i))), 0.5, ai(i), af(i));
  CHECK(std::abs(r.K_joint - exact) / std::abs(exact) < 1e-3);

  const ModeSectorReport all = mode_sector_kernel(f, basis, {{0, 1, 2, 3, 4, 5, 6, 7}}, ai, af);
  CHECK(all.relative_defect == 0.0);

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(8, 8);
  c(0, 4) = c(4, 0) = 0.2;
  c(1, 5) = c(5, 1) = 0.2;
  const ModeSectorReport coupled = mode_sector_kernel(f, basis, halves, 4 * ai, 4 * af, 1.0, c);
  CHECK(coupled.relative_defect > 0.01);
  CHECK(coupled.max_offsector_coupling == doctest::Approx(0.2));

  ActionSpec quartic = f;
  quartic.potential.site_quartic = Eigen::VectorXd::Ones(64);
  CHECK_THROWS_AS(mode_sector_kernel(quartic, basis, halves, ai, af), UnsupportedError);
  CHECK_THROWS_AS(mode_sector_kernel(f, basis, {{0, 1}, {2, 3}}, ai, af), InvalidCountError);
}
