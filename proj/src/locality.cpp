#include "emloc/locality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace emloc {

const char *to_string(Verdict v) {
  switch (v) {
  case Verdict::localized:
    return "localized";
  case Verdict::injective_only:
    return "injective_only";
  case Verdict::not_localized:
    return "not_localized";
  }
  return "?";
}

Path project_path(const Path &path, const RegionDecomposition &dec, Side side) {
  require_same_mesh(path.mesh(), dec.parent(), "project_path");
  const RegionSide &rs = dec.side(side);
  Eigen::MatrixXd v(static_cast<Index>(rs.parent_sites.size()), path.slice_count());
  for (std::size_t r = 0; r < rs.parent_sites.size(); ++r)
    v.row(static_cast<Index>(r)) = path.values().row(rs.parent_sites[r]);
  return {rs.mesh, std::move(v), path.dt()};
}

Path glue_path(const Path &p_O, const Path &p_N, const RegionDecomposition &dec, double tol) {
  if (p_O.slice_count() != p_N.slice_count())
    throw MeshMismatchError("glue_path: slice counts differ");
  Eigen::MatrixXd v(dec.parent()->size(), p_O.slice_count());
  for (Index k = 0; k < p_O.slice_count(); ++k)
    v.col(k) = glue(p_O.slice(k), p_N.slice(k), dec, tol).values();
  return {dec.parent(), std::move(v), p_O.dt()};
}

namespace {

/// sup_t ‖p(t) − q(t)‖ over the sites flagged in `mask` (all when empty).
double masked_distance(const Path &p, const Path &q, const SuperMetric &metric,
                       const std::optional<double> &period, const std::vector<char> &mask) {
  require_same_mesh(p.mesh(), q.mesh(), "epsilon_distance");
  if (p.slice_count() != q.slice_count())
    throw MeshMismatchError("epsilon_distance: slice counts differ");
  double worst = 0.0;
  for (Index k = 0; k < p.slice_count(); ++k) {
    const Eigen::VectorXd base = p.values().col(k);
    const Eigen::VectorXd w = metric.diagonal(*p.mesh(), base);
    const Eigen::VectorXd d = field_difference(base, q.values().col(k), period);
    double s = 0.0;
    for (Index x = 0; x < d.size(); ++x)
      if (mask.empty() || mask[static_cast<std::size_t>(x)])
        s += w(x) * d(x) * d(x);
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

ActionSpec with_time_steps(ActionSpec spec, Index steps) {
  spec.time_steps = steps;
  return spec;
}

double refinement_error(const ActionSpec &spec, const FieldConfig &phi_i,
                        const FieldConfig &phi_f, const SolveOptions &options) {
  const ActionSpec fine = with_time_steps(spec, 2 * spec.time_steps);
  const ExtremalPath coarse_ex = solve(spec, phi_i, phi_f, straight_seed(spec, phi_i, phi_f).path, options);
  const ExtremalPath fine_ex = solve(fine, phi_i, phi_f, straight_seed(fine, phi_i, phi_f).path, options);
  Eigen::MatrixXd sub(spec.mesh->size(), spec.time_steps + 1);
  for (Index k = 0; k <= spec.time_steps; ++k)
    sub.col(k) = fine_ex.path.values().col(2 * k);
  return sup_slice_distance(coarse_ex.path, Path(spec.mesh, std::move(sub), spec.dt()),
                            spec.field_period);
}

} // namespace

double epsilon_distance(const Path &p, const Path &q, const SuperMetric &metric,
                        const std::optional<double> &period) {
  return masked_distance(p, q, metric, period, {});
}

std::vector<Seed> make_seeds(const ActionSpec &spec, const FieldConfig &phi_i,
                             const FieldConfig &phi_f, const SeedStrategy &strategy) {
  return mode_seeds(spec, phi_i, phi_f, strategy.n_modes, strategy.amplitude);
}

std::pair<FieldConfig, FieldConfig> intrinsic_endpoints(const RegionDecomposition &dec,
                                                        Side side, const FieldConfig &phi_i,
                                                        const FieldConfig &phi_f) {
  const FieldConfig a = project(phi_i, dec, side);
  Eigen::VectorXd b = project(phi_f, dec, side).values();
  for (Index l : dec.side(side).pinned)
    b(l) = a[l];
  return {a, FieldConfig(a.mesh(), std::move(b))};
}

LocalityReport test_localization(const ActionSpec &spec, const RegionDecomposition &dec,
                                 const FieldConfig &phi_i, const FieldConfig &phi_f,
                                 const std::vector<Seed> &seeds_global,
                                 const std::vector<Seed> &seeds_intrinsic, double epsilon,
                                 Side side, const LocalityOptions &options) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidThresholdError("epsilon must be positive and finite");
  require_same_mesh(spec.mesh, dec.parent(), "test_localization");

  const ExtremalSet global = enumerate(spec, phi_i, phi_f, seeds_global, options.solve,
                                       options.dedup_threshold, options.jobs);
  if (global.empty())
    throw InconclusiveError("no global extremal found; localization cannot be tested");
  const ActionSpec intrinsic = intrinsic_action(spec, dec, side);
  const auto [a, b] = intrinsic_endpoints(dec, side, phi_i, phi_f);
  const ExtremalSet local = enumerate(intrinsic, a, b, seeds_intrinsic, options.solve,
                                      options.dedup_threshold, options.jobs);

  const RegionSide &rs = dec.side(side);
  std::vector<char> interior(rs.parent_sites.size(), 1);
  for (Index l : rs.pinned)
    interior[static_cast<std::size_t>(l)] = 0;

  LocalityReport r;
  r.side = side;
  r.epsilon = epsilon;
  r.global_count = global.size();
  r.intrinsic_count = local.size();
  r.global_seeds = global.seeds_tried;
  r.intrinsic_seeds = local.seeds_tried;

  const Index ng = global.size(), ni = local.size();
  Eigen::MatrixXd dist(ng, ni);
  std::vector<Path> projected;
  for (const ExtremalPath &g : global.extremals)
    projected.push_back(project_path(g.path, dec, side));
  for (Index g = 0; g < ng; ++g)
    for (Index i = 0; i < ni; ++i)
      dist(g, i) = masked_distance(projected[static_cast<std::size_t>(g)],
                                   local.extremals[static_cast<std::size_t>(i)].path,
                                   options.metric, spec.field_period, interior);

  const double inf = std::numeric_limits<double>::infinity();
  r.global_deviation.assign(static_cast<std::size_t>(ng), inf);
  r.intrinsic_deviation.assign(static_cast<std::size_t>(ni), inf);
  for (Index g = 0; g < ng; ++g)
    for (Index i = 0; i < ni; ++i) {
      auto &dg = r.global_deviation[static_cast<std::size_t>(g)];
      auto &di = r.intrinsic_deviation[static_cast<std::size_t>(i)];
      dg = std::min(dg, dist(g, i));
      di = std::min(di, dist(g, i));
    }
  r.max_deviation = *std::max_element(r.global_deviation.begin(), r.global_deviation.end());
  r.condition_i = std::all_of(r.global_deviation.begin(), r.global_deviation.end(),
                              [&](double d) { return d <= epsilon; });
  r.condition_ii = std::all_of(r.intrinsic_deviation.begin(), r.intrinsic_deviation.end(),
                               [&](double d) { return d <= epsilon; });
  r.verdict = r.condition_i ? (r.condition_ii ? Verdict::localized : Verdict::injective_only)
                            : Verdict::not_localized;

  struct Candidate {
    double d;
    Index g, i;
  };
  std::vector<Candidate> candidates;
  for (Index g = 0; g < ng; ++g)
    for (Index i = 0; i < ni; ++i)
      if (dist(g, i) <= epsilon)
        candidates.push_back({dist(g, i), g, i});
  std::sort(candidates.begin(), candidates.end(), [](const Candidate &x, const Candidate &y) {
    if (x.d != y.d)
      return x.d < y.d;
    if (x.g != y.g)
      return x.g < y.g;
    return x.i < y.i;
  });
  std::vector<char> used_g(static_cast<std::size_t>(ng), 0), used_i(static_cast<std::size_t>(ni), 0);
  for (const Candidate &c : candidates) {
    if (used_g[static_cast<std::size_t>(c.g)] || used_i[static_cast<std::size_t>(c.i)])
      continue;
    used_g[static_cast<std::size_t>(c.g)] = used_i[static_cast<std::size_t>(c.i)] = 1;
    r.matching.pairs.push_back({c.g, c.i, c.d});
  }
  for (Index g = 0; g < ng; ++g)
    if (!used_g[static_cast<std::size_t>(g)])
      r.matching.unmatched_global.push_back(g);
  for (Index i = 0; i < ni; ++i)
    if (!used_i[static_cast<std::size_t>(i)])
      r.matching.unmatched_intrinsic.push_back(i);

  for (const ExtremalPath &g : global.extremals)
    for (Index s : dec.boundary())
      for (Index k = 0; k < g.path.slice_count(); ++k) {
        double d = g.path.values()(s, k) - phi_i[s];
        if (spec.field_period)
          d = field_difference(Eigen::VectorXd::Constant(1, phi_i[s]),
                               Eigen::VectorXd::Constant(1, g.path.values()(s, k)),
                               spec.field_period)(0);
        r.boundary_drift = std::max(r.boundary_drift, std::abs(d));
      }
  return r;
}

LocalityReport test_localization(const ActionSpec &spec, const RegionDecomposition &dec,
                                 const FieldConfig &phi_i, const FieldConfig &phi_f,
                                 const SeedStrategy &seeds, double epsilon, Side side,
                                 const LocalityOptions &options) {
  const ActionSpec intrinsic = intrinsic_action(spec, dec, side);
  const auto [a, b] = intrinsic_endpoints(dec, side, phi_i, phi_f);
  return test_localization(spec, dec, phi_i, phi_f, make_seeds(spec, phi_i, phi_f, seeds),
                           make_seeds(intrinsic, a, b, seeds), epsilon, side, options);
}

MutualIndependence test_mutual_independence(const ActionSpec &spec,
                                            const RegionDecomposition &dec,
                                            const FieldConfig &phi_i, const FieldConfig &phi_f,
                                            const SeedStrategy &seeds, double epsilon,
                                            const LocalityOptions &options) {
  MutualIndependence m;
  m.O_indep_of_N = test_localization(spec, dec, phi_i, phi_f, seeds, epsilon, Side::O, options);
  m.N_indep_of_O = test_localization(spec, dec, phi_i, phi_f, seeds, epsilon, Side::N, options);
  m.mutual = m.O_indep_of_N.verdict == Verdict::localized &&
             m.N_indep_of_O.verdict == Verdict::localized;
  return m;
}

Calibration calibrate_epsilon(const ActionSpec &spec, const RegionDecomposition &dec,
                              const FieldConfig &phi_i, const FieldConfig &phi_f, Side side,
                              const SolveOptions &options) {
  const ActionSpec intrinsic = intrinsic_action(spec, dec, side);
  const auto [a, b] = intrinsic_endpoints(dec, side, phi_i, phi_f);
  Calibration c;
  c.discretization_error = std::max({refinement_error(spec, phi_i, phi_f, options),
                                     refinement_error(intrinsic, a, b, options), options.tol});
  c.epsilon = kEpsilonSafetyFactor * c.discretization_error;
  return c;
}

AdditivityReport check_additivity(const ActionSpec &spec, const RegionDecomposition &dec,
                                  const std::vector<Path> &sample_paths) {
  const ActionSpec spec_O = intrinsic_action(spec, dec, Side::O);
  const ActionSpec spec_N = intrinsic_action(spec, dec, Side::N);
  std::optional<ActionSpec> spec_B;
  if (!dec.boundary().empty())
    spec_B = restrict_action(spec, dec.boundary());
  AdditivityReport r;
  for (const Path &p : sample_paths) {
    double defect = action(spec, p) - action(spec_O, project_path(p, dec, Side::O)) -
                    action(spec_N, project_path(p, dec, Side::N));
    if (spec_B) {
      Eigen::MatrixXd v(static_cast<Index>(dec.boundary().size()), p.slice_count());
      for (std::size_t r_ = 0; r_ < dec.boundary().size(); ++r_)
        v.row(static_cast<Index>(r_)) = p.values().row(dec.boundary()[r_]);
      defect += action(*spec_B, Path(spec_B->mesh, std::move(v), p.dt()));
    }
    r.defects.push_back(std::abs(defect));
    r.max_defect = std::max(r.max_defect, std::abs(defect));
  }
  return r;
}

ProductMetricReport check_product_metric(const MetricField &metric,
                                         const RegionDecomposition &dec,
                                         const FieldConfig &base, int samples, double spread,
                                         std::uint64_t seed) {
  require_same_mesh(base.mesh(), dec.parent(), "check_product_metric");
  const auto &o = dec.interior_O();
  const auto &n = dec.interior_N();
  const Eigen::MatrixXd g0 = metric(base.values());
  const Eigen::MatrixXd oo0 = select(g0, o, o), nn0 = select(g0, n, n);
  const double scale_o = oo0.norm(), scale_n = nn0.norm();
  ProductMetricReport r;
  r.cross_block_norm = select(g0, o, n).norm() / scale_o;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-spread, spread);
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x = base.values();
    for (Index site : n)
      x(site) += unif(rng);
    const Eigen::MatrixXd g = metric(x);
    r.warp_factor_variation = std::max(r.warp_factor_variation,
                                       (select(g, o, o) - oo0).norm() / scale_o);
    r.n_block_variation = std::max(r.n_block_variation, (select(g, n, n) - nn0).norm() / scale_n);
    r.cross_block_norm = std::max(r.cross_block_norm, select(g, o, n).norm() / scale_o);
  }
  r.is_product = r.warp_factor_variation < kProductTolerance &&
                 r.cross_block_norm < kProductTolerance;
  return r;
}

} // namespace emloc
