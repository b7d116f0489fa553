#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/SparseLU>

#include "emloc/exemplars.hpp"
#include "emloc/svg.hpp"

namespace emloc {

double annulus_exact(double r, double theta) {
  // (A r⁵ + B r⁻⁵) sin 5θ with A·2⁵ + B·2⁻⁵ = 0 and A·4⁵ + B·4⁻⁵ = 4.
  const double a = 4.0 / 1023.0;
  const double b = -1024.0 * a;
  return (a * std::pow(r, 5) + b * std::pow(r, -5)) * std::sin(5.0 * theta);
}

namespace {

struct PolarGrid {
  Index nr, nt;
  double dr, dt;
  double r(Index i) const { return kAnnulusInner + dr * static_cast<double>(i); }
  Index wrap(Index j) const { return (j % nt + nt) % nt; }
};

/// Second-order operator u_rr + u_r / r + u_θθ / r² at interior node (i, j).
double apply_plain(const PolarGrid &g, const Eigen::MatrixXd &u, Index i, Index j) {
  const double r = g.r(i);
  const double urr = (u(i + 1, j) - 2 * u(i, j) + u(i - 1, j)) / (g.dr * g.dr);
  const double ur = (u(i + 1, j) - u(i - 1, j)) / (2 * g.dr);
  const double utt = (u(i, g.wrap(j + 1)) - 2 * u(i, j) + u(i, g.wrap(j - 1))) / (g.dt * g.dt);
  return urr + ur / r + utt / (r * r);
}

/// Fourth-order version; one-sided radial stencils next to the two rings.
double apply_fourth(const PolarGrid &g, const Eigen::MatrixXd &u, Index i, Index j) {
  const double r = g.r(i);
  const Index last = g.nr - 1;
  auto c = [&](Index k) { return u(k, j); };
  double urr, ur;
  if (i == 1) {
    urr = (10 * c(0) - 15 * c(1) - 4 * c(2) + 14 * c(3) - 6 * c(4) + c(5)) / (12 * g.dr * g.dr);
    ur = (-3 * c(0) - 10 * c(1) + 18 * c(2) - 6 * c(3) + c(4)) / (12 * g.dr);
  } else if (i == last - 1) {
    urr = (10 * c(last) - 15 * c(last - 1) - 4 * c(last - 2) + 14 * c(last - 3) -
           6 * c(last - 4) + c(last - 5)) /
          (12 * g.dr * g.dr);
    ur = -(-3 * c(last) - 10 * c(last - 1) + 18 * c(last - 2) - 6 * c(last - 3) + c(last - 4)) /
         (12 * g.dr);
  } else {
    urr = (-c(i + 2) + 16 * c(i + 1) - 30 * c(i) + 16 * c(i - 1) - c(i - 2)) / (12 * g.dr * g.dr);
    ur = (-c(i + 2) + 8 * c(i + 1) - 8 * c(i - 1) + c(i - 2)) / (12 * g.dr);
  }
  auto t = [&](Index k) { return u(i, g.wrap(j + k)); };
  const double utt = (-t(2) + 16 * t(1) - 30 * t(0) + 16 * t(-1) - t(-2)) / (12 * g.dt * g.dt);
  return urr + ur / r + utt / (r * r);
}

} // namespace

AnnulusSolution solve_annulus(Index n_r, Index n_theta, bool deferred_correction) {
  AnnulusSolution out;
  out.mesh = build_annulus_mesh(n_r, n_theta, kAnnulusInner, kAnnulusOuter);
  const PolarGrid g{n_r, n_theta, (kAnnulusOuter - kAnnulusInner) / static_cast<double>(n_r - 1),
                    2 * M_PI / static_cast<double>(n_theta)};
  const Index inner = n_r - 2;
  const Index unknowns = inner * n_theta;
  auto id = [&](Index i, Index j) { return (i - 1) * n_theta + g.wrap(j); };

  Eigen::MatrixXd boundary = Eigen::MatrixXd::Zero(n_r, n_theta);
  for (Index j = 0; j < n_theta; ++j)
    boundary(n_r - 1, j) = 4.0 * std::sin(5.0 * g.dt * static_cast<double>(j));

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
  for (Index i = 1; i <= inner; ++i) {
    const double r = g.r(i);
    const double cm = 1 / (g.dr * g.dr) - 1 / (2 * r * g.dr);
    const double cp = 1 / (g.dr * g.dr) + 1 / (2 * r * g.dr);
    const double ct = 1 / (r * r * g.dt * g.dt);
    for (Index j = 0; j < n_theta; ++j) {
      const Index row = id(i, j);
      trips.emplace_back(row, row, -2 / (g.dr * g.dr) - 2 * ct);
      trips.emplace_back(row, id(i, j + 1), ct);
      trips.emplace_back(row, id(i, j - 1), ct);
      if (i - 1 >= 1)
        trips.emplace_back(row, id(i - 1, j), cm);
      else
        rhs(row) -= cm * boundary(0, j);
      if (i + 1 <= inner)
        trips.emplace_back(row, id(i + 1, j), cp);
      else
        rhs(row) -= cp * boundary(n_r - 1, j);
    }
  }
  Eigen::SparseMatrix<double> a(unknowns, unknowns);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw Error("annulus system is singular");

  auto to_grid = [&](const Eigen::VectorXd &x) {
    Eigen::MatrixXd u = boundary;
    for (Index i = 1; i <= inner; ++i)
      for (Index j = 0; j < n_theta; ++j)
        u(i, j) = x(id(i, j));
    return u;
  };
  out.plain = to_grid(lu.solve(rhs));
  out.corrected = out.plain;
  if (deferred_correction && n_r >= 7 && n_theta >= 5) {
    Eigen::VectorXd tau(unknowns);
    for (Index i = 1; i <= inner; ++i)
      for (Index j = 0; j < n_theta; ++j)
        tau(id(i, j)) = apply_fourth(g, out.plain, i, j) - apply_plain(g, out.plain, i, j);
    out.corrected = to_grid(lu.solve(rhs - tau));
  }

  out.exact.resize(n_r, n_theta);
  for (Index i = 0; i < n_r; ++i)
    for (Index j = 0; j < n_theta; ++j)
      out.exact(i, j) = annulus_exact(g.r(i), g.dt * static_cast<double>(j));
  out.plain_max_error = (out.plain - out.exact).cwiseAbs().maxCoeff();
  out.max_error = (out.corrected - out.exact).cwiseAbs().maxCoeff();
  return out;
}

namespace {

/// Trigonometric interpolation of one ring at angle θ.
double ring_value(const Eigen::VectorXd &ring, double theta) {
  const Index n = ring.size();
  double sum = 0.0;
  for (Index m = 0; m <= n / 2; ++m) {
    double a = 0.0, b = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double ang = 2 * M_PI * static_cast<double>(m * j) / static_cast<double>(n);
      a += ring(j) * std::cos(ang);
      b += ring(j) * std::sin(ang);
    }
    double scale = (m == 0 || 2 * m == n) ? 1.0 / static_cast<double>(n) : 2.0 / static_cast<double>(n);
    sum += scale * (a * std::cos(static_cast<double>(m) * theta) +
                    (2 * m == n ? 0.0 : b * std::sin(static_cast<double>(m) * theta)));
  }
  return sum;
}

} // namespace

ExperimentResult run_annulus(Index n_r, Index n_theta, const RunOptions &options) {
  ExperimentResult res;
  res.name = "annulus";
  if (n_r < 17 || n_theta < 64) {
    res.error("grid", "annulus experiment needs n_r >= 17 and n_theta >= 64");
    return res;
  }
  const AnnulusSolution sol = solve_annulus(n_r, n_theta, true);
  res.below("max_error", sol.max_error, 1e-3);
  res.info("plain_max_error", sol.plain_max_error);
  res.equal("inner_ring_max_abs", sol.corrected.row(0).cwiseAbs().maxCoeff(), 0.0);

  const double dtheta = 2 * M_PI / static_cast<double>(n_theta);
  double outer_mismatch = 0.0;
  for (Index j = 0; j < n_theta; ++j)
    outer_mismatch = std::max(outer_mismatch,
                              std::abs(sol.corrected(n_r - 1, j) -
                                       4.0 * std::sin(5.0 * dtheta * static_cast<double>(j))));
  res.equal("outer_ring_max_mismatch", outer_mismatch, 0.0);
  res.below("outer_value_at_pi_over_10_error",
            std::abs(ring_value(sol.corrected.row(n_r - 1).transpose(), M_PI / 10) - 4.0), 1e-12);

  const double dr = (kAnnulusOuter - kAnnulusInner) / static_cast<double>(n_r - 1);
  const double pos = (3.0 - kAnnulusInner) / dr;
  const Index ring = static_cast<Index>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(ring)) < 1e-12) {
    const double value = ring_value(sol.corrected.row(ring).transpose(), M_PI / 10);
    res.info("value_r3_theta_pi_over_10", value);
    res.info("oracle_r3_theta_pi_over_10", annulus_exact(3.0, M_PI / 10));
    res.below("interior_point_error", std::abs(value - annulus_exact(3.0, M_PI / 10)), 1e-3);
  }
  res.info("n_r", static_cast<double>(n_r));
  res.info("n_theta", static_cast<double>(n_theta));
  res.info("weight_sum_relative_error",
           std::abs(sol.mesh->weights().sum() - M_PI * (16.0 - 4.0)) / (M_PI * 12.0));

  if (!options.out_dir.empty()) {
    const std::filesystem::path dir(options.out_dir);
    const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(
        Eigen::MatrixXd(sol.corrected.transpose()).data(), n_r * n_theta);
    const Eigen::MatrixXd err = sol.corrected - sol.exact;
    const Eigen::VectorXd err_flat =
        Eigen::Map<const Eigen::VectorXd>(Eigen::MatrixXd(err.transpose()).data(), n_r * n_theta);
    {
      std::ofstream f(dir / "annulus_field.csv", std::ios::binary);
      write_field_csv(f, FieldConfig(sol.mesh, flat));
    }
    {
      std::ofstream f(dir / "annulus_error.csv", std::ios::binary);
      write_field_csv(f, FieldConfig(sol.mesh, err_flat));
    }
    svg::write((dir / "annulus_field.svg").string(),
               svg::heatmap("Laplace solution on the annulus", sol.corrected, "spoke (theta)",
                            "ring (r)"));
    svg::write((dir / "annulus_error.svg").string(),
               svg::heatmap("Error against separation of variables", err, "spoke (theta)",
                            "ring (r)"));
    Eigen::VectorXd r(n_r), num(n_r), ex(n_r);
    const Index spoke = n_theta / 20;
    for (Index i = 0; i < n_r; ++i) {
      r(i) = kAnnulusInner + dr * static_cast<double>(i);
      num(i) = sol.corrected(i, spoke);
      ex(i) = sol.exact(i, spoke);
    }
    svg::write((dir / "annulus_profile.svg").string(),
               svg::line_plot("Radial profile", {{"numerical", r, num}, {"exact", r, ex}}, "r",
                              "phi"));
    res.artifacts = {"annulus_field.csv", "annulus_error.csv", "annulus_field.svg",
                     "annulus_error.svg", "annulus_profile.svg"};
  }
  return res;
}

} // namespace emloc
