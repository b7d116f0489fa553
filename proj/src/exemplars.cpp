#include "emloc/exemplars.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>

#include <Eigen/Dense>

#include "emloc/svg.hpp"

namespace emloc {

namespace {

bool lt(double v, double b) { return !std::isnan(v) && v < b; }

void put(ExperimentResult &r, const std::string &key, double value, MetricCheck::Kind kind,
         double bound, bool pass) {
  r.metrics[key] = MetricCheck{value, kind, bound, pass};
  if (!pass)
    r.pass = false;
}

} // namespace

void ExperimentResult::below(const std::string &key, double value, double bound) {
  put(*this, key, value, MetricCheck::Kind::below, bound, lt(value, bound));
}

void ExperimentResult::above(const std::string &key, double value, double bound) {
  put(*this, key, value, MetricCheck::Kind::above, bound, !std::isnan(value) && value > bound);
}

void ExperimentResult::equal(const std::string &key, double value, double bound) {
  put(*this, key, value, MetricCheck::Kind::equal, bound, value == bound);
}

void ExperimentResult::info(const std::string &key, double value) {
  metrics[key] = MetricCheck{value, MetricCheck::Kind::info, 0.0, true};
}

void ExperimentResult::error(const std::string &key, const std::string &message) {
  details["errors"][key] = message;
  pass = false;
}

std::vector<std::string> ExperimentResult::failures() const {
  std::vector<std::string> out;
  for (const auto &[key, m] : metrics)
    if (!m.pass)
      out.push_back(key);
  if (details.contains("errors"))
    for (const auto &[key, msg] : details["errors"].items())
      out.push_back(key + ": " + msg.get<std::string>());
  return out;
}

json to_json(const ExperimentResult &r) {
  static const char *const kinds[] = {"below", "above", "equal", "info"};
  json metrics = json::object();
  for (const auto &[key, m] : r.metrics) {
    json j = {{"value", m.value}, {"kind", kinds[static_cast<int>(m.kind)]}, {"pass", m.pass}};
    if (m.kind != MetricCheck::Kind::info)
      j["bound"] = m.bound;
    metrics[key] = j;
  }
  return {{"name", r.name},   {"pass", r.pass},         {"metrics", metrics},
          {"artifacts", r.artifacts}, {"details", r.details}, {"failures", r.failures()}};
}

// ---------------------------------------------------------------------------
// fixtures

namespace fixtures {

ActionSpec oscillator(double omega, Index steps, double total_time) {
  return oscillators(Eigen::VectorXd::Constant(1, omega), steps, total_time);
}

ActionSpec oscillators(const Eigen::VectorXd &omegas, Index steps, double total_time) {
  ActionSpec s;
  s.mesh = build_particle_mesh(omegas.size());
  if (omegas.cwiseAbs().maxCoeff() > 0)
    s.potential.site_quadratic = omegas.cwiseProduct(omegas);
  s.time_steps = steps;
  s.total_time = total_time;
  return s;
}

ActionSpec circle_wave(Index n_sites, Index steps, double total_time) {
  ActionSpec s;
  s.mesh = build_circle_mesh(n_sites, 2 * M_PI);
  s.potential.edge_stiffness = unit_edge_stiffness(*s.mesh);
  s.time_steps = steps;
  s.total_time = total_time;
  return s;
}

ActionSpec nonlocal_source(Index n_sites, double amplitude, Index source_begin,
                           Index source_end, Index steps, double total_time) {
  ActionSpec s;
  s.mesh = build_circle_mesh(n_sites, 2 * M_PI);
  s.potential.kernel = inverse_laplacian_kernel(*s.mesh);
  s.potential.source = Eigen::VectorXd::Zero(n_sites);
  s.potential.source.segment(source_begin, source_end - source_begin).setConstant(amplitude);
  s.time_steps = steps;
  s.total_time = total_time;
  return s;
}

RegionDecomposition quarter_arc(const MeshPtr &circle) {
  std::vector<Index> sel;
  for (Index i = 1; i < circle->size() / 4; ++i)
    sel.push_back(i);
  return decompose_sites(circle, sel);
}

} // namespace fixtures

// ---------------------------------------------------------------------------
// dense oracle

Path dense_quadratic_extremal(const ActionSpec &spec, const FieldConfig &phi_i,
                              const FieldConfig &phi_f) {
  spec.validate();
  const Potential &pot = spec.potential;
  if (spec.field_period || !pot.pair_couplings.empty() ||
      (pot.site_quartic.size() > 0 && pot.site_quartic.cwiseAbs().maxCoeff() > 0))
    throw UnsupportedError("dense oracle needs a quadratic action on a real field");

  const Mesh &mesh = *spec.mesh;
  const Index n = mesh.size();
  const Eigen::VectorXd w = mesh.weights();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  if (pot.edge_stiffness.size() > 0) {
    const auto &edges = mesh.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double c = pot.edge_stiffness(static_cast<Index>(e)) / edges[e].length;
      h(edges[e].a, edges[e].a) += c;
      h(edges[e].b, edges[e].b) += c;
      h(edges[e].a, edges[e].b) -= c;
      h(edges[e].b, edges[e].a) -= c;
    }
  }
  if (pot.site_quadratic.size() > 0)
    h.diagonal() += w.cwiseProduct(pot.site_quadratic);
  if (pot.kernel.size() > 0)
    h += pot.kernel;
  Eigen::VectorXd g0 = Eigen::VectorXd::Zero(n);
  if (pot.source.size() > 0)
    g0 = -w.cwiseProduct(pot.source);
  const Eigen::VectorXd mass =
      spec.mass_density.size() > 0 ? Eigen::VectorXd(spec.mass_density.cwiseProduct(w)) : w;

  std::vector<bool> is_pinned(static_cast<std::size_t>(n), false);
  for (Index p : spec.pinned)
    is_pinned[static_cast<std::size_t>(p)] = true;
  std::vector<Index> free;
  for (Index s = 0; s < n; ++s)
    if (!is_pinned[static_cast<std::size_t>(s)])
      free.push_back(s);
  const Index nf = static_cast<Index>(free.size());
  const Index steps = spec.time_steps;
  const double dt = spec.dt();

  Eigen::MatrixXd values(n, steps + 1);
  for (Index k = 0; k <= steps; ++k)
    values.col(k) = phi_i.values();
  for (Index s : free)
    values(s, steps) = phi_f[s];
  if (steps < 2 || nf == 0)
    return {spec.mesh, values, dt};

  // Stationarity at slice k: M(2φ_k − φ_{k−1} − φ_{k+1})/dt − dt(g0 + Hφ_k) = 0.
  const Index dim = (steps - 1) * nf;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs(dim);
  for (Index k = 1; k < steps; ++k) {
    const Index base = (k - 1) * nf;
    for (Index r = 0; r < nf; ++r) {
      const Index s = free[static_cast<std::size_t>(r)];
      double b = dt * g0(s);
      for (Index p : spec.pinned)
        b += dt * h(s, p) * phi_i[p];
      if (k == 1)
        b += mass(s) / dt * phi_i[s];
      if (k == steps - 1)
        b += mass(s) / dt * phi_f[s];
      rhs(base + r) = b;
      for (Index c = 0; c < nf; ++c)
        a(base + r, base + c) = -dt * h(s, free[static_cast<std::size_t>(c)]);
      a(base + r, base + r) += 2 * mass(s) / dt;
      if (k > 1)
        a(base + r, base - nf + r) = -mass(s) / dt;
      if (k < steps - 1)
        a(base + r, base + nf + r) = -mass(s) / dt;
    }
  }
  // The stacked system is symmetric; it is positive definite below the first
  // conjugate time.
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  const Eigen::VectorXd x =
      llt.info() == Eigen::Success ? Eigen::VectorXd(llt.solve(rhs)) : Eigen::VectorXd(a.partialPivLu().solve(rhs));
  for (Index k = 1; k < steps; ++k)
    for (Index r = 0; r < nf; ++r)
      values(free[static_cast<std::size_t>(r)], k) = x((k - 1) * nf + r);
  return {spec.mesh, values, dt};
}

// ---------------------------------------------------------------------------
// circle wave

namespace {

constexpr double kCircleWaveTime = 0.07;
constexpr Index kCircleWaveSteps = 64;
constexpr std::int64_t kCircleWaveCheckedModes = 4;

std::filesystem::path out_path(const RunOptions &o, const std::string &name) {
  return std::filesystem::path(o.out_dir) / name;
}

void write_text(const std::filesystem::path &p, const std::string &text) {
  std::ofstream f(p, std::ios::binary);
  if (!f)
    throw Error("cannot write " + p.string());
  f << text;
}

Eigen::VectorXd linspace_sites(Index n) {
  return Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
}

} // namespace

ExperimentResult run_circle_wave(std::int64_t num, std::int64_t den, const RunOptions &options) {
  ExperimentResult res;
  res.name = "circle_wave";
  if (!(num >= 1 && num < den)) {
    res.error("ratio", "need 1 <= num < den");
    return res;
  }
  const Rational ratio(num, den);
  const ModeIndependence mi = mode_independence(ratio, Rational(1));
  res.details["O_side"] = to_json(mi.O_side);
  res.details["N_side"] = to_json(mi.N_side);
  res.details["mutual"] = mi.mutual;
  res.info("O_matched", static_cast<double>(mi.O_side.matched.size()));
  res.info("O_unmatched", static_cast<double>(mi.O_side.unmatched_intrinsic.size()));
  res.info("N_matched", static_cast<double>(mi.N_side.matched.size()));
  res.info("N_unmatched", static_cast<double>(mi.N_side.unmatched_intrinsic.size()));

  // Exact bookkeeping: O mode n matches n′ = n·den/num whenever that is integral.
  bool exact_ok = true;
  for (const ModeMatch &m : mi.O_side.matched)
    exact_ok = exact_ok && m.global * ratio.num == m.intrinsic * ratio.den;
  for (std::int64_t n : mi.O_side.unmatched_intrinsic)
    exact_ok = exact_ok && (n * ratio.den) % ratio.num != 0;
  res.equal("O_match_rule_violations", exact_ok ? 0.0 : 1.0, 0.0);

  // Lattice with ∂O on sites: O interior is sites 1..n_O − 1, ∂O = {0, n_O}.
  const Index n_sites = 32 * ratio.den;
  const Index n_O = 32 * ratio.num;
  const ActionSpec spec = fixtures::circle_wave(n_sites, kCircleWaveSteps, kCircleWaveTime);
  std::vector<Index> sel;
  for (Index i = 1; i < n_O; ++i)
    sel.push_back(i);
  const RegionDecomposition dec = decompose_sites(spec.mesh, sel);
  const double len_O = 2 * M_PI * ratio.to_double();
  const double len_N = 2 * M_PI - len_O;

  // Matched O modes: the global standing wave with nodes at ∂O, restricted to
  // O, must satisfy the intrinsic equations.
  const ActionSpec spec_O = intrinsic_action(spec, dec, Side::O);
  double worst_residual = 0.0;
  Index checked = 0;
  json restricted = json::array();
  for (const ModeMatch &m : mi.O_side.matched) {
    if (m.intrinsic > kCircleWaveCheckedModes)
      break;
    if (m.global % 2 != 0) {
      restricted.push_back({{"n", m.intrinsic}, {"n_prime", m.global}, {"checked", false}});
      continue;
    }
    const double k = static_cast<double>(m.global) / 2.0;
    auto wave = [k](double amp) {
      return [k, amp](const Eigen::VectorXd &x) { return amp * std::sin(k * x(0)); };
    };
    const FieldConfig a = FieldConfig::from_function(spec.mesh, wave(1.0));
    const FieldConfig b = FieldConfig::from_function(spec.mesh, wave(0.5));
    const ExtremalPath ex = solve(spec, a, b, straight_seed(spec, a, b).path, options.solve);
    const Path p_O = project_path(ex.path, dec, Side::O);
    const double r = eom_residual(spec_O, p_O).values().cwiseAbs().maxCoeff();
    worst_residual = std::max(worst_residual, r);
    ++checked;
    restricted.push_back(
        {{"n", m.intrinsic}, {"n_prime", m.global}, {"checked", true}, {"residual", r}});
  }
  res.details["restricted_global_modes"] = restricted;
  res.info("restricted_modes_checked", static_cast<double>(checked));
  if (checked > 0)
    res.below("restricted_mode_max_residual", worst_residual, 1e-6);

  // Unmatched N fundamental: the global extremal leaks into O, so the N side
  // is not localized for this data.
  const bool n_fundamental_unmatched =
      !mi.N_side.unmatched_intrinsic.empty() && mi.N_side.unmatched_intrinsic.front() == 1;
  if (ratio == Rational(1, 4))
    res.equal("N_fundamental_unmatched", n_fundamental_unmatched ? 1.0 : 0.0, 1.0);
  else
    res.info("N_fundamental_unmatched", n_fundamental_unmatched ? 1.0 : 0.0);
  if (n_fundamental_unmatched) {
    auto fund = [&](double amp) {
      return [&, amp](const Eigen::VectorXd &x) {
        const double s = x(0);
        return s > len_O ? amp * std::sin(M_PI * (s - len_O) / len_N) : 0.0;
      };
    };
    const FieldConfig a = FieldConfig::from_function(spec.mesh, fund(1.0));
    const FieldConfig b = FieldConfig::from_function(spec.mesh, fund(0.5));
    const Calibration cal = calibrate_epsilon(spec, dec, a, b, Side::N, options.solve);
    LocalityOptions lo;
    lo.solve = options.solve;
    const LocalityReport rep =
        test_localization(spec, dec, a, b, SeedStrategy{}, cal.epsilon, Side::N, lo);
    res.details["N_localization"] = to_json(rep);
    res.info("N_epsilon", cal.epsilon);
    res.above("N_fundamental_deviation", rep.max_deviation, 1e-3);
    res.equal("N_side_not_localized", rep.verdict == Verdict::localized ? 0.0 : 1.0, 1.0);
  }

  if (!options.out_dir.empty()) {
    write_text(out_path(options, "circle_wave_modes.txt"),
               mode_match_table(mi.O_side, "O") + "\n" + mode_match_table(mi.N_side, "N"));
    res.artifacts.push_back("circle_wave_modes.txt");
    // Profile of the first checked global mode and its restriction.
    if (!mi.O_side.matched.empty() && mi.O_side.matched.front().global % 2 == 0) {
      const double k = static_cast<double>(mi.O_side.matched.front().global) / 2.0;
      const FieldConfig f =
          FieldConfig::from_function(spec.mesh, [k](const Eigen::VectorXd &x) {
            return std::sin(k * x(0));
          });
      {
        std::ofstream os(out_path(options, "circle_wave_mode.csv"), std::ios::binary);
        write_field_csv(os, f);
      }
      Eigen::VectorXd xo(n_O + 1), yo(n_O + 1);
      for (Index i = 0; i <= n_O; ++i) {
        xo(i) = static_cast<double>(i);
        yo(i) = f[i];
      }
      svg::write(out_path(options, "circle_wave_mode.svg").string(),
                 svg::line_plot("Lowest matched global standing wave",
                                {{"global", linspace_sites(n_sites), f.values()},
                                 {"restriction to O", xo, yo}},
                                "site", "phi"));
      res.artifacts.push_back("circle_wave_mode.csv");
      res.artifacts.push_back("circle_wave_mode.svg");
    }
  }
  return res;
}

ExperimentResult run_circle_wave_irrational(const std::string &ratio_symbol,
                                            const RunOptions &options) {
  ExperimentResult res;
  res.name = "circle_wave_irrational";
  const ModeMatchReport rep = commensurability_irrational(ratio_symbol);
  res.details["O_side"] = to_json(rep);
  res.equal("only_constant_solution", rep.only_constant_solution ? 1.0 : 0.0, 1.0);
  res.equal("matched", static_cast<double>(rep.matched.size()), 0.0);
  if (!options.out_dir.empty()) {
    write_text(out_path(options, "circle_wave_irrational_modes.txt"), mode_match_table(rep, "O"));
    res.artifacts.push_back("circle_wave_irrational_modes.txt");
  }
  return res;
}

// ---------------------------------------------------------------------------
// nonlocal source

namespace {

constexpr Index kNonlocalSites = 64;
constexpr Index kNonlocalSourceBegin = 40;
constexpr Index kNonlocalSourceEnd = 48;
constexpr Index kNonlocalSteps = 64;
constexpr double kNonlocalTime = 2.0;

} // namespace

ExperimentResult run_nonlocal_source(const RunOptions &options,
                                     const std::vector<double> &amplitudes) {
  ExperimentResult res;
  res.name = "nonlocal_source";
  json rows = json::array();
  std::vector<double> devs;
  Eigen::VectorXd amp_plot(static_cast<Index>(amplitudes.size()));
  Eigen::VectorXd dev_plot(amp_plot.size()), oracle_plot(amp_plot.size());
  double worst_oracle_gap = 0.0;

  // Oracle: dense solves of the global and intrinsic problems at unit source.
  // With zero endpoints the extremals are linear in the amplitude, so the
  // deviation at amplitude a is |a| times the unit value.
  const ActionSpec unit = fixtures::nonlocal_source(kNonlocalSites, 1.0, kNonlocalSourceBegin,
                                                    kNonlocalSourceEnd, kNonlocalSteps,
                                                    kNonlocalTime);
  const RegionDecomposition unit_dec = fixtures::quarter_arc(unit.mesh);
  const FieldConfig unit_zero = FieldConfig::zero(unit.mesh);
  const Path unit_global = dense_quadratic_extremal(unit, unit_zero, unit_zero);
  double unit_oracle = 0.0;
  {
    const ActionSpec spec_O = intrinsic_action(unit, unit_dec, Side::O);
    const auto [a_O, b_O] = intrinsic_endpoints(unit_dec, Side::O, unit_zero, unit_zero);
    const Path in = dense_quadratic_extremal(spec_O, a_O, b_O);
    const Path g_O = project_path(unit_global, unit_dec, Side::O);
    const auto &parent = unit_dec.side(Side::O).parent_sites;
    const auto &bnd = unit_dec.boundary();
    for (Index k = 0; k < g_O.slice_count(); ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l < parent.size(); ++l) {
        if (std::find(bnd.begin(), bnd.end(), parent[l]) != bnd.end())
          continue;
        const Index li = static_cast<Index>(l);
        const double d = g_O.values()(li, k) - in.values()(li, k);
        s += g_O.mesh()->weights()(li) * d * d;
      }
      unit_oracle = std::max(unit_oracle, std::sqrt(s));
    }
  }
  res.above("oracle_unit_deviation", unit_oracle, 0.01);

  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    const double amp = amplitudes[i];
    const ActionSpec spec = fixtures::nonlocal_source(kNonlocalSites, amp, kNonlocalSourceBegin,
                                                      kNonlocalSourceEnd, kNonlocalSteps,
                                                      kNonlocalTime);
    const RegionDecomposition dec = fixtures::quarter_arc(spec.mesh);
    const FieldConfig zero = FieldConfig::zero(spec.mesh);
    const Calibration cal = calibrate_epsilon(spec, dec, zero, zero, Side::O, options.solve);
    LocalityOptions lo;
    lo.solve = options.solve;
    const LocalityReport rep =
        test_localization(spec, dec, zero, zero, SeedStrategy{}, cal.epsilon, Side::O, lo);
    const double oracle = std::abs(amp) * unit_oracle;
    worst_oracle_gap = std::max(worst_oracle_gap, std::abs(oracle - rep.max_deviation));
    devs.push_back(rep.max_deviation);
    amp_plot(static_cast<Index>(i)) = amp;
    dev_plot(static_cast<Index>(i)) = rep.max_deviation;
    oracle_plot(static_cast<Index>(i)) = oracle;
    rows.push_back({{"amplitude", amp},
                    {"epsilon", cal.epsilon},
                    {"deviation", rep.max_deviation},
                    {"oracle_deviation", oracle},
                    {"verdict", to_string(rep.verdict)},
                    {"condition_i", rep.condition_i}});
    if (amp == 0.0)
      res.equal("amplitude_0_localized", rep.verdict == Verdict::localized ? 1.0 : 0.0, 1.0);
    if (amp == 1.0) {
      res.above("amplitude_1_deviation", rep.max_deviation, 0.01);
      res.equal("amplitude_1_condition_i_fails", rep.condition_i ? 0.0 : 1.0, 1.0);
    }
  }
  res.details["sweep"] = rows;
  res.below("oracle_relative_gap", worst_oracle_gap / unit_oracle, 1e-6);
  double monotone_violation = 0.0;
  for (std::size_t i = 1; i < devs.size(); ++i)
    if (amplitudes[i] >= amplitudes[i - 1])
      monotone_violation = std::max(monotone_violation, devs[i - 1] - devs[i]);
  res.below("monotonicity_violation", monotone_violation, 1e-12);

  // The intrinsic kernel (a sub-block of the global inverse) is not the
  // inverse of the Dirichlet Laplacian on O ∪ ∂O.
  {
    const ActionSpec spec = fixtures::nonlocal_source(kNonlocalSites, 0.0, kNonlocalSourceBegin,
                                                      kNonlocalSourceEnd, 2, 1.0);
    const RegionDecomposition dec = fixtures::quarter_arc(spec.mesh);
    const ActionSpec spec_O = intrinsic_action(spec, dec, Side::O);
    const Eigen::MatrixXd dir =
        dirichlet_inverse_laplacian_kernel(*spec_O.mesh, dec.side(Side::O).pinned);
    std::vector<Index> inner;
    for (Index l = 0; l < spec_O.mesh->size(); ++l)
      if (std::find(spec_O.pinned.begin(), spec_O.pinned.end(), l) == spec_O.pinned.end())
        inner.push_back(l);
    const Eigen::MatrixXd k_in = select(spec_O.potential.kernel, inner, inner);
    const Eigen::MatrixXd d_in = select(dir, inner, inner);
    res.above("intrinsic_kernel_vs_dirichlet_relative", (k_in - d_in).norm() / d_in.norm(), 0.01);
  }

  if (!options.out_dir.empty()) {
    svg::write(out_path(options, "nonlocal_sweep.svg").string(),
               svg::line_plot("Deviation of projected extremal from intrinsic extremal",
                              {{"detector", amp_plot, dev_plot}, {"dense oracle", amp_plot, oracle_plot}},
                              "source amplitude", "deviation"));
    res.artifacts.push_back("nonlocal_sweep.svg");
    {
      {
        std::ofstream os(out_path(options, "nonlocal_global_path.csv"), std::ios::binary);
        write_path_csv(os, unit_global);
      }
      const Eigen::MatrixXd grid = unit_global.values().transpose();
      svg::write(out_path(options, "nonlocal_global_path.svg").string(),
                 svg::heatmap("Global extremal, unit source", grid, "site", "time slice"));
      res.artifacts.push_back("nonlocal_global_path.csv");
      res.artifacts.push_back("nonlocal_global_path.svg");
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// registry and batch runner

const std::vector<Experiment> &registry() {
  static const std::vector<Experiment> experiments = {
      {"annulus", "Laplace equation on the annulus 2 < r < 4 against separation of variables",
       [](const RunOptions &o) { return run_annulus(33, 128, o); }},
      {"circle_wave", "Free wave on the circle, [O]/[M] = 1/4: mode matching and N-side failure",
       [](const RunOptions &o) { return run_circle_wave(1, 4, o); }},
      {"circle_wave_irrational", "Irrational region length: only the constant field survives",
       [](const RunOptions &o) { return run_circle_wave_irrational("1/sqrt(2)", o); }},
      {"nonlocal_source", "Inverse-Laplacian action with a source outside O",
       [](const RunOptions &o) { return run_nonlocal_source(o); }},
      {"van_vleck", "Endpoint sensitivity determinants against closed forms",
       [](const RunOptions &o) { return run_van_vleck_suite(o); }},
      {"cluster", "Kernel factorization for decoupled, winding and coupled systems",
       [](const RunOptions &o) { return run_cluster_suite(o); }},
      {"locality", "Localization detector, additivity, product metric and cross sensitivity",
       [](const RunOptions &o) { return run_locality_suite(o); }},
      {"jacobi", "Jacobi-metric geodesics against action extremals",
       [](const RunOptions &o) { return run_jacobi_suite(o); }},
      {"discretization", "Gradient check, convergence order and energy drift",
       [](const RunOptions &o) { return run_discretization_suite(o); }},
  };
  return experiments;
}

VerifyAllResult verify_all(const std::vector<Experiment> &experiments, const RunOptions &options,
                           int jobs) {
  VerifyAllResult out;
  auto run_one = [&options](const Experiment &e) {
    try {
      ExperimentResult r = e.run(options);
      r.name = e.name;
      return r;
    } catch (const std::exception &ex) {
      ExperimentResult r;
      r.name = e.name;
      r.error("exception", ex.what());
      return r;
    }
  };
  const std::size_t batch = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < experiments.size(); start += batch) {
    std::vector<std::future<ExperimentResult>> futures;
    const std::size_t stop = std::min(experiments.size(), start + batch);
    for (std::size_t i = start; i < stop; ++i)
      futures.push_back(std::async(batch > 1 ? std::launch::async : std::launch::deferred,
                                   run_one, std::cref(experiments[i])));
    for (auto &f : futures)
      out.results.push_back(f.get());
  }
  out.pass = !out.results.empty();
  for (const ExperimentResult &r : out.results)
    out.pass = out.pass && r.pass;
  return out;
}

json summary_json(const VerifyAllResult &r) {
  json experiments = json::array();
  json failures = json::array();
  for (const ExperimentResult &e : r.results) {
    experiments.push_back({{"name", e.name}, {"pass", e.pass}, {"result", e.name + "_result.json"}});
    for (const std::string &f : e.failures())
      failures.push_back(e.name + "." + f);
  }
  return {{"pass", r.pass}, {"experiments", experiments}, {"failures", failures}};
}

} // namespace emloc
