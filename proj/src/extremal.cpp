#include "emloc/extremal.hpp"

#include <cmath>
#include <future>
#include <sstream>

#include "emloc/modes.hpp"

namespace emloc {

namespace {

void check_endpoints(const ActionSpec &spec, const FieldConfig &phi_i,
                     const FieldConfig &phi_f) {
  require_same_mesh(spec.mesh, phi_i.mesh(), "solve (initial endpoint)");
  require_same_mesh(spec.mesh, phi_f.mesh(), "solve (final endpoint)");
  std::vector<Index> offending;
  for (Index p : spec.pinned) {
    if (std::abs(field_difference(Eigen::VectorXd::Constant(1, phi_i[p]),
                                  Eigen::VectorXd::Constant(1, phi_f[p]),
                                  spec.field_period)(0)) > kGlueTolerance)
      offending.push_back(p);
  }
  if (!offending.empty())
    throw BoundaryMismatchError("endpoints disagree on pinned sites", std::move(offending));
}

} // namespace

ExtremalPath solve(const ActionSpec &spec, const FieldConfig &phi_i,
                   const FieldConfig &phi_f, const Path &initial_guess,
                   const SolveOptions &options) {
  spec.validate();
  check_endpoints(spec, phi_i, phi_f);
  require_same_mesh(spec.mesh, initial_guess.mesh(), "solve (initial guess)");
  if (initial_guess.time_steps() != spec.time_steps)
    throw MeshMismatchError("initial guess has the wrong number of slices");
  const Index k_end = spec.time_steps;
  const auto &g = initial_guess.values();
  const double mismatch =
      std::max(field_difference(g.col(0), phi_i.values(), spec.field_period).cwiseAbs().maxCoeff(),
               field_difference(g.col(k_end), phi_f.values(), spec.field_period)
                   .cwiseAbs()
                   .maxCoeff());
  if (mismatch > 1e-9)
    throw BoundaryMismatchError("initial guess does not match the endpoints", {});

  Eigen::MatrixXd slices = g;
  slices.col(0) = phi_i.values();
  slices.col(k_end) = phi_f.values();
  for (Index p : spec.pinned)
    slices.row(p).setConstant(phi_i[p]);

  const ActionLagrangian lag(spec);
  NewtonResult r = solve_stationary(lag, std::move(slices), spec.free_sites(), options);
  ExtremalPath ex{Path(spec.mesh, std::move(r.slices), spec.dt()), 0.0, r.residual_norm,
                  "", r.iterations, r.relative_min_eigenvalue};
  ex.on_shell_action = discrete_sum(lag, ex.path.values());
  return ex;
}

double sup_slice_distance(const Path &p, const Path &q, const std::optional<double> &period) {
  require_same_mesh(p.mesh(), q.mesh(), "sup_slice_distance");
  if (p.slice_count() != q.slice_count())
    throw MeshMismatchError("paths have different slice counts");
  const Eigen::VectorXd &w = p.mesh()->weights();
  double best = 0.0;
  for (Index k = 0; k < p.slice_count(); ++k) {
    const Eigen::VectorXd d = field_difference(q.values().col(k), p.values().col(k), period);
    best = std::max(best, std::sqrt((w.array() * d.array().square()).sum()));
  }
  return best;
}

ExtremalSet enumerate(const ActionSpec &spec, const FieldConfig &phi_i,
                      const FieldConfig &phi_f, const std::vector<Seed> &seeds,
                      const SolveOptions &options, double dedup_threshold, int jobs) {
  if (seeds.empty())
    throw Error("enumerate needs at least one seed");
  struct Outcome {
    std::optional<ExtremalPath> path;
    std::string failure;
  };
  auto run = [&](const Seed &seed) -> Outcome {
    try {
      ExtremalPath ex = solve(spec, phi_i, phi_f, seed.path, options);
      ex.seed_label = seed.label;
      return {std::move(ex), {}};
    } catch (const NonConvergenceError &e) {
      return {std::nullopt, e.what()};
    } catch (const ConjugatePointError &e) {
      return {std::nullopt, e.what()};
    }
  };

  std::vector<Outcome> outcomes(seeds.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i)
      outcomes[i] = run(seeds[i]);
  } else {
    for (std::size_t start = 0; start < seeds.size(); start += static_cast<std::size_t>(jobs)) {
      std::vector<std::future<Outcome>> batch;
      const std::size_t stop = std::min(seeds.size(), start + static_cast<std::size_t>(jobs));
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(std::async(std::launch::async, run, std::cref(seeds[i])));
      for (std::size_t i = start; i < stop; ++i)
        outcomes[i] = batch[i - start].get();
    }
  }

  ExtremalSet set{{}, phi_i, phi_f, dedup_threshold, static_cast<Index>(seeds.size()), {}};
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    Outcome &o = outcomes[i];
    if (!o.path) {
      set.failures.push_back({seeds[i].label, o.failure});
      continue;
    }
    bool duplicate = false;
    for (const ExtremalPath &kept : set.extremals) {
      if (sup_slice_distance(kept.path, o.path->path, spec.field_period) < dedup_threshold) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate)
      set.extremals.push_back(std::move(*o.path));
  }
  return set;
}

FieldConfig on_shell_momentum(const ActionSpec &spec, const ExtremalPath &ex, PathEnd end) {
  require_same_mesh(spec.mesh, ex.path.mesh(), "on_shell_momentum");
  const ActionLagrangian lag(spec);
  const auto &v = ex.path.values();
  Eigen::VectorXd ga, gb;
  if (end == PathEnd::final) {
    lag.gradient(v.col(v.cols() - 2), v.col(v.cols() - 1), ga, gb);
    return {spec.mesh, gb};
  }
  lag.gradient(v.col(0), v.col(1), ga, gb);
  return {spec.mesh, -ga};
}

double on_shell_energy(const ActionSpec &spec, const Path &path) {
  return step_energies(spec, path).mean();
}

Seed straight_seed(const ActionSpec &spec, const FieldConfig &phi_i,
                   const FieldConfig &phi_f) {
  return {"straight", straight_path(phi_i, phi_f, spec.time_steps, spec.total_time)};
}

std::vector<Seed> mode_seeds(const ActionSpec &spec, const FieldConfig &phi_i,
                             const FieldConfig &phi_f, Index n_modes, double amplitude) {
  std::vector<Seed> seeds{straight_seed(spec, phi_i, phi_f)};
  if (n_modes <= 0)
    return seeds;
  const Index free = static_cast<Index>(spec.free_sites().size());
  const Index k = std::min(n_modes, free);
  const ModeBasis basis = eigenmodes(spec.mesh, ModeBoundary::dirichlet, k, spec.pinned);
  const Index steps = spec.time_steps;
  for (Index m = 0; m < k; ++m) {
    const Eigen::VectorXd shape = basis.eigenvectors.col(m);
    for (double sign : {1.0, -1.0}) {
      Path p = seeds.front().path;
      for (Index t = 1; t < steps; ++t) {
        const double bump = std::sin(M_PI * static_cast<double>(t) / static_cast<double>(steps));
        p.values().col(t) += sign * amplitude * bump * shape;
      }
      std::ostringstream label;
      label << "mode" << m << (sign > 0 ? "+" : "-");
      seeds.push_back({label.str(), std::move(p)});
    }
  }
  return seeds;
}

std::vector<Seed> winding_seeds(const ActionSpec &spec, const FieldConfig &phi_i,
                                const FieldConfig &phi_f,
                                const std::vector<std::vector<int>> &windings) {
  if (!spec.field_period)
    throw UnsupportedError("winding seeds need a circle-valued field");
  const double period = *spec.field_period;
  const Eigen::VectorXd base = field_difference(phi_i.values(), phi_f.values(), spec.field_period);
  std::vector<Seed> seeds;
  for (const auto &w : windings) {
    if (static_cast<Index>(w.size()) != spec.mesh->size())
      throw MeshMismatchError("winding vector needs one entry per site");
    Eigen::VectorXd total = base;
    std::ostringstream label;
    label << "winding(";
    for (std::size_t s = 0; s < w.size(); ++s) {
      total(static_cast<Index>(s)) += period * w[s];
      label << (s ? "," : "") << w[s];
    }
    label << ")";
    Eigen::MatrixXd v(spec.mesh->size(), spec.time_steps + 1);
    for (Index t = 0; t <= spec.time_steps; ++t)
      v.col(t) = phi_i.values() +
                 total * (static_cast<double>(t) / static_cast<double>(spec.time_steps));
    v.col(spec.time_steps) = phi_f.values();
    seeds.push_back({label.str(), Path(spec.mesh, std::move(v), spec.dt())});
  }
  return seeds;
}

} // namespace emloc
