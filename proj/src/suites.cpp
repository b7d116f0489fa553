#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/Dense>

#include "emloc/exemplars.hpp"
#include "emloc/svg.hpp"

namespace emloc {

namespace {

std::string out_file(const RunOptions &o, const std::string &name) {
  return (std::filesystem::path(o.out_dir) / name).string();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

FieldConfig point(const MeshPtr &mesh, std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v)
    x(i++) = d;
  return {mesh, x};
}

std::function<double(const Eigen::VectorXd &)> bump(double centre, double width, double amp) {
  return [=](const Eigen::VectorXd &x) {
    const double d = (x(0) - centre) / width;
    return amp * std::exp(-d * d);
  };
}

ExtremalPath straight_solve(const ActionSpec &spec, const FieldConfig &a, const FieldConfig &b,
                            const SolveOptions &opts) {
  return solve(spec, a, b, straight_seed(spec, a, b).path, opts);
}

/// Boundary-cut wave on a 64-site circle: short time, smooth bumps.
struct CutWave {
  ActionSpec spec;
  ActionSpec cut;
  RegionDecomposition dec;
  FieldConfig phi_i, phi_f;
};

CutWave cut_wave() {
  ActionSpec w = fixtures::circle_wave(64, 64, 0.15);
  RegionDecomposition dec = fixtures::quarter_arc(w.mesh);
  ActionSpec c = cut_stiffness_at(w, dec.boundary());
  FieldConfig a = FieldConfig::from_function(w.mesh, bump(0.8, 0.3, 1.0));
  FieldConfig b = FieldConfig::from_function(w.mesh, bump(2.4, 0.3, 0.5));
  return {std::move(w), std::move(c), std::move(dec), std::move(a), std::move(b)};
}

Path random_path(const ActionSpec &spec, std::mt19937_64 &rng, double spread) {
  std::normal_distribution<double> nd(0.0, spread);
  Eigen::MatrixXd v(spec.mesh->size(), spec.time_steps + 1);
  for (Index k = 0; k < v.cols(); ++k)
    for (Index s = 0; s < v.rows(); ++s)
      v(s, k) = nd(rng);
  for (Index p : spec.pinned)
    v.row(p).setConstant(v(p, 0));
  return {spec.mesh, v, spec.dt()};
}

} // namespace

// ---------------------------------------------------------------------------

ExperimentResult run_van_vleck_suite(const RunOptions &options) {
  ExperimentResult res;
  res.name = "van_vleck";
  const SolveOptions &so = options.solve;
  double worst_agreement = 0.0;
  json fixtures_json = json::object();
  auto both = [&](const std::string &name, const ActionSpec &spec, const ExtremalPath &ex) {
    const VanVleckResult h = van_vleck(spec, ex, VanVleckMethod::hessian_block, so);
    const VanVleckResult f = van_vleck(spec, ex, VanVleckMethod::finite_difference, so);
    worst_agreement = std::max(worst_agreement, rel(f.determinant, h.determinant));
    fixtures_json[name] = {{"hessian_block", to_json(h)}, {"finite_difference", to_json(f)}};
    return std::pair{h.determinant, f.determinant};
  };

  {
    const ActionSpec ho = fixtures::oscillator(1.0, 200, 1.0);
    const FieldConfig a = point(ho.mesh, {0.0}), b = point(ho.mesh, {1.0});
    const ExtremalPath ex = straight_solve(ho, a, b, so);
    const auto [dh, df] = both("oscillator", ho, ex);
    const double exact = 1.0 / std::sin(1.0);
    res.below("oscillator_det_hessian_error", std::abs(dh - exact), 1e-4);
    res.below("oscillator_det_fd_error", std::abs(df - exact), 1e-4);
    res.below("oscillator_action_error", std::abs(ex.on_shell_action - 0.5 / std::tan(1.0)), 1e-5);
    res.below("oscillator_final_momentum_error",
              std::abs(on_shell_momentum(ho, ex, PathEnd::final)[0] - 1.0 / std::tan(1.0)), 1e-4);
  }
  {
    const ActionSpec fp = fixtures::oscillator(0.0, 200, 1.0);
    const FieldConfig a = point(fp.mesh, {0.0}), b = point(fp.mesh, {1.0});
    const ExtremalPath ex = straight_solve(fp, a, b, so);
    const auto [dh, df] = both("free_particle", fp, ex);
    res.below("free_det_hessian_error", std::abs(dh - 1.0), 1e-6);
    res.below("free_det_fd_error", std::abs(df - 1.0), 1e-6);
    ExtremalSet set{{ex}, a, b, kDefaultDedupThreshold, 1, {}};
    const KernelValue k = kernel(fp, set);
    res.below("free_kernel_phase_error", std::abs(k.amplitude - std::polar(1.0, 0.5)), 1e-9);
  }
  {
    Eigen::VectorXd om(2);
    om << 1.0, 2.0;
    const ActionSpec two = fixtures::oscillators(om, 200, 1.0);
    const FieldConfig a = point(two.mesh, {0.0, 0.2}), b = point(two.mesh, {1.0, -0.4});
    const ExtremalPath ex = straight_solve(two, a, b, so);
    const auto [dh, df] = both("two_oscillators", two, ex);
    const double exact = (1.0 / std::sin(1.0)) * (2.0 / std::sin(2.0));
    res.below("two_oscillators_det_relative_error", rel(dh, exact), 1e-4);
    res.below("two_oscillators_fd_relative_error", rel(df, exact), 1e-4);
  }
  {
    ActionSpec an = fixtures::oscillator(1.0, 128, 1.0);
    an.potential.site_quartic = Eigen::VectorXd::Constant(1, 0.5);
    const FieldConfig a = point(an.mesh, {0.2}), b = point(an.mesh, {0.9});
    both("anharmonic", an, straight_solve(an, a, b, so));
  }
  {
    ActionSpec w = fixtures::circle_wave(16, 64, 0.5);
    w.potential.site_quadratic = Eigen::VectorXd::Constant(16, 0.5);
    const FieldConfig a = FieldConfig::from_function(w.mesh, bump(1.0, 0.6, 1.0));
    const FieldConfig b = FieldConfig::from_function(w.mesh, bump(3.0, 0.6, -0.5));
    both("lattice_wave", w, straight_solve(w, a, b, so));
  }
  res.below("method_agreement_relative", worst_agreement, 1e-4);
  res.details["fixtures"] = fixtures_json;
  return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_cluster_suite(const RunOptions &options) {
  ExperimentResult res;
  res.name = "cluster";
  KernelOptions ko;
  ko.solve = options.solve;
  const MeshPtr pair = build_particle_mesh(2);
  const RegionDecomposition dec = decompose_sites(pair, {0});

  auto seeds_for = [](const ActionSpec &s, const FieldConfig &a, const FieldConfig &b,
                      const std::vector<std::vector<int>> &w) {
    return w.empty() ? std::vector<Seed>{straight_seed(s, a, b)} : winding_seeds(s, a, b, w);
  };
  auto run = [&](const std::string &name, const ActionSpec &spec, const FieldConfig &a,
                 const FieldConfig &b, const std::vector<std::vector<int>> &wj,
                 const std::vector<std::vector<int>> &wo,
                 const std::vector<std::vector<int>> &wn) {
    const ActionSpec so = intrinsic_action(spec, dec, Side::O);
    const ActionSpec sn = intrinsic_action(spec, dec, Side::N);
    const auto [ao, bo] = intrinsic_endpoints(dec, Side::O, a, b);
    const auto [an, bn] = intrinsic_endpoints(dec, Side::N, a, b);
    const ClusterReport rep = cluster_check(spec, dec, a, b, seeds_for(spec, a, b, wj),
                                            seeds_for(so, ao, bo, wo), seeds_for(sn, an, bn, wn),
                                            ko);
    res.details[name] = to_json(rep);
    return rep;
  };

  {
    Eigen::VectorXd om(2);
    om << 1.0, 1.5;
    const ActionSpec s = fixtures::oscillators(om, 200, 1.0);
    const ClusterReport r =
        run("decoupled_oscillators", s, point(pair, {0.0, 0.3}), point(pair, {1.0, -0.5}), {}, {}, {});
    res.below("decoupled_defect", r.relative_defect, 1e-6);
  }
  {
    ActionSpec s;
    s.mesh = pair;
    s.field_period = 2 * M_PI;
    s.time_steps = 64;
    s.total_time = 1.0;
    std::vector<std::vector<int>> wj;
    for (int w0 : {-1, 0, 1})
      for (int w1 : {0, 1})
        wj.push_back({w0, w1});
    const ClusterReport r = run("winding_3x2", s, point(pair, {0.0, 0.0}),
                                point(pair, {M_PI / 2, M_PI / 3}), wj, {{-1}, {0}, {1}}, {{0}, {1}});
    res.equal("winding_joint_count", static_cast<double>(r.joint_count), 6.0);
    res.equal("winding_count_product",
              static_cast<double>(r.O_count * r.N_count), static_cast<double>(r.joint_count));
    res.below("winding_defect", r.relative_defect, 1e-6);
  }
  {
    ActionSpec s;
    s.mesh = pair;
    s.field_period = 2 * M_PI;
    s.time_steps = 64;
    s.total_time = 0.5;
    s.potential.pair_couplings.push_back({0, 1, 8.0});
    std::vector<std::vector<int>> wj;
    for (int w0 : {-1, 0, 1})
      for (int w1 : {-1, 0, 1})
        wj.push_back({w0, w1});
    const ClusterReport r = run("bell_pair", s, point(pair, {0.0, 0.0}),
                                point(pair, {M_PI / 2, M_PI / 2}), wj, {{-1}, {0}, {1}},
                                {{-1}, {0}, {1}});
    res.above("bell_defect", r.relative_defect, 0.1);
    res.info("bell_joint_count", static_cast<double>(r.joint_count));
  }
  {
    const ActionSpec f = fixtures::circle_wave(64, 64, 0.5);
    const ModeBasis basis = eigenmodes(f.mesh, ModeBoundary::periodic, 8);
    Eigen::VectorXd ai(8), af(8);
    ai << 0.1, 0.2, -0.1, 0.3, 0.05, -0.2, 0.1, 0.15;
    af << 0.3, -0.1, 0.2, 0.1, -0.15, 0.1, 0.2, -0.05;
    const std::vector<std::vector<Index>> halves = {{0, 1, 2, 3}, {4, 5, 6, 7}};
    const ModeSectorReport dec_r = mode_sector_kernel(f, basis, halves, ai, af);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(8, 8);
    c(0, 4) = c(4, 0) = 0.2;
    c(1, 5) = c(5, 1) = 0.2;
    const double scale = 4.0;
    const ModeSectorReport cpl = mode_sector_kernel(f, basis, halves, scale * ai, scale * af, 1.0, c);
    const ModeSectorReport one = mode_sector_kernel(f, basis, {{0, 1, 2, 3, 4, 5, 6, 7}}, ai, af);
    res.below("mode_sector_decoupled_defect", dec_r.relative_defect, 1e-6);
    res.above("mode_sector_coupled_defect", cpl.relative_defect, 0.01);
    res.equal("mode_sector_single_defect", one.relative_defect, 0.0);
    res.details["mode_sector_decoupled"] = to_json(dec_r);
    res.details["mode_sector_coupled"] = to_json(cpl);
  }
  return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_locality_suite(const RunOptions &options) {
  ExperimentResult res;
  res.name = "locality";
  LocalityOptions lo;
  lo.solve = options.solve;
  const CutWave cw = cut_wave();
  const SeedStrategy seeds{2, 0.1};

  const Calibration cal = calibrate_epsilon(cw.cut, cw.dec, cw.phi_i, cw.phi_f, Side::O, options.solve);
  res.info("cut_epsilon", cal.epsilon);
  const LocalityReport cut = test_localization(cw.cut, cw.dec, cw.phi_i, cw.phi_f, seeds,
                                               cal.epsilon, Side::O, lo);
  const LocalityReport uncut = test_localization(cw.spec, cw.dec, cw.phi_i, cw.phi_f, seeds,
                                                 cal.epsilon, Side::O, lo);
  res.details["cut_wave"] = to_json(cut);
  res.details["uncut_wave"] = to_json(uncut);
  res.equal("cut_wave_localized", cut.verdict == Verdict::localized ? 1.0 : 0.0, 1.0);
  res.info("cut_wave_deviation", cut.max_deviation);
  res.equal("uncut_wave_not_localized", uncut.verdict == Verdict::localized ? 0.0 : 1.0, 1.0);
  res.info("uncut_wave_deviation", uncut.max_deviation);

  const MutualIndependence mut =
      test_mutual_independence(cw.cut, cw.dec, cw.phi_i, cw.phi_f, seeds, cal.epsilon, lo);
  res.details["cut_wave_mutual"] = to_json(mut);
  res.equal("cut_wave_mutual", mut.mutual ? 1.0 : 0.0, 1.0);

  std::mt19937_64 rng(11);
  std::vector<Path> samples;
  for (int i = 0; i < 4; ++i)
    samples.push_back(random_path(cw.spec, rng, 0.5));
  auto additivity = [](const ActionSpec &spec, const RegionDecomposition &dec,
                       const std::vector<Path> &paths) {
    double scale = 0.0;
    for (const Path &p : paths)
      scale = std::max(scale, std::abs(action(spec, p)));
    return check_additivity(spec, dec, paths).max_defect / scale;
  };
  res.below("wave_additivity_relative_defect", additivity(cw.spec, cw.dec, samples), 1e-12);
  res.below("cut_wave_additivity_relative_defect", additivity(cw.cut, cw.dec, samples), 1e-12);

  const ActionSpec nl = fixtures::nonlocal_source(64, 1.0, 40, 48, 64, 2.0);
  const RegionDecomposition nl_dec = fixtures::quarter_arc(nl.mesh);
  std::vector<Path> nl_samples;
  for (int i = 0; i < 4; ++i) {
    // Static histories, so the potential dominates the action.
    Path p = random_path(nl, rng, 0.5);
    for (Index k = 1; k < p.slice_count(); ++k)
      p.values().col(k) = p.values().col(0);
    nl_samples.push_back(std::move(p));
  }
  res.above("nonlocal_additivity_relative_defect", additivity(nl, nl_dec, nl_samples), 1e-6);

  const FieldConfig zero = FieldConfig::zero(nl.mesh);
  const ExtremalPath nl_ex = straight_solve(nl, zero, zero, options.solve);
  res.above("nonlocal_cross_sensitivity", cross_sensitivity(nl, nl_dec, nl_ex).offdiag_norm, 0.01);
  const ExtremalPath w_ex = straight_solve(cw.spec, cw.phi_i, cw.phi_f, options.solve);
  const ExtremalPath c_ex = straight_solve(cw.cut, cw.phi_i, cw.phi_f, options.solve);
  res.above("wave_cross_sensitivity", cross_sensitivity(cw.spec, cw.dec, w_ex).offdiag_norm, 0.01);
  res.below("cut_wave_cross_sensitivity", cross_sensitivity(cw.cut, cw.dec, c_ex).offdiag_norm,
            1e-12);

  // Product structure of configuration-space metrics on a 32-site circle.
  const MeshPtr circ = build_circle_mesh(32, 2 * M_PI);
  const RegionDecomposition pd = fixtures::quarter_arc(circ);
  const FieldConfig base = FieldConfig::from_function(circ, bump(2.0, 1.0, 0.3));
  const Eigen::VectorXd w = circ->weights();
  std::vector<bool> in_N(32, false);
  for (Index s : pd.interior_N())
    in_N[static_cast<std::size_t>(s)] = true;
  auto n_mean = [&](const Eigen::VectorXd &phi) {
    double m = 0.0;
    for (Index s : pd.interior_N())
      m += phi(s);
    return m / static_cast<double>(pd.interior_N().size());
  };
  const MetricField flat = [&](const Eigen::VectorXd &) {
    return Eigen::MatrixXd(w.asDiagonal());
  };
  const MetricField warped = [&](const Eigen::VectorXd &phi) {
    return Eigen::MatrixXd((std::exp(n_mean(phi)) * w).asDiagonal());
  };
  const MetricField split = [&](const Eigen::VectorXd &phi) {
    Eigen::VectorXd d = w;
    for (Index s = 0; s < 32; ++s)
      if (in_N[static_cast<std::size_t>(s)])
        d(s) *= 1.0 + phi(s) * phi(s);
    return Eigen::MatrixXd(d.asDiagonal());
  };
  const ProductMetricReport pf = check_product_metric(flat, pd, base);
  const ProductMetricReport pw = check_product_metric(warped, pd, base);
  const ProductMetricReport ps = check_product_metric(split, pd, base);
  res.equal("flat_metric_is_product", pf.is_product ? 1.0 : 0.0, 1.0);
  res.equal("split_metric_is_product", ps.is_product ? 1.0 : 0.0, 1.0);
  res.equal("warped_metric_is_product", pw.is_product ? 1.0 : 0.0, 0.0);
  res.above("warped_metric_warp_variation", pw.warp_factor_variation, 1e-3);
  {
    ActionSpec js = fixtures::circle_wave(32, 8, 1.0);
    js.potential.site_quadratic = Eigen::VectorXd::Ones(32);
    const JacobiMetric jm = build_jacobi_metric(js, 10.0);
    const ProductMetricReport pj =
        check_product_metric([&](const Eigen::VectorXd &phi) { return jm.matrix(phi); }, pd, base);
    res.equal("jacobi_metric_is_product", pj.is_product ? 1.0 : 0.0, 0.0);
  }

  if (!options.out_dir.empty()) {
    const Eigen::VectorXd sites = Eigen::VectorXd::LinSpaced(64, 0, 63);
    const Index mid = cw.spec.time_steps / 2;
    svg::write(out_file(options, "locality_cut_wave.svg"),
               svg::line_plot("Mid-time slice of global extremals",
                              {{"cut action", sites, c_ex.path.values().col(mid)},
                               {"coupled action", sites, w_ex.path.values().col(mid)}},
                              "site", "phi"));
    res.artifacts.push_back("locality_cut_wave.svg");
    std::ofstream os(out_file(options, "locality_cut_wave_path.csv"), std::ios::binary);
    write_path_csv(os, c_ex.path);
    res.artifacts.push_back("locality_cut_wave_path.csv");
  }
  return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_jacobi_suite(const RunOptions &options) {
  ExperimentResult res;
  res.name = "jacobi";
  const SolveOptions &so = options.solve;
  {
    Eigen::VectorXd om(2);
    om << 1.0, 2.0;
    const ActionSpec s = fixtures::oscillators(om, 400, 1.0);
    const FieldConfig a = point(s.mesh, {1.0, 0.0}), b = point(s.mesh, {0.0, 1.0});
    const ExtremalPath ex = straight_solve(s, a, b, so);
    const double e = on_shell_energy(s, ex.path);
    const EquivalenceReport ok = verify_equivalence(s, ex, build_jacobi_metric(s, e), 1e-3, so);
    const EquivalenceReport off =
        verify_equivalence(s, ex, build_jacobi_metric(s, e + 0.5), 1e-3, so);
    res.details["anisotropic"] = to_json(ok);
    res.details["wrong_energy"] = to_json(off);
    res.below("anisotropic_image_deviation", ok.max_deviation, 1e-3);
    res.above("wrong_energy_image_deviation", off.max_deviation, 1e-2);
    res.info("energy", e);
    if (!options.out_dir.empty()) {
      const Path g = jacobi_geodesic(build_jacobi_metric(s, e),
                                     reparametrize_by_length(build_jacobi_metric(s, e), ex.path), so);
      const Path gw =
          jacobi_geodesic(build_jacobi_metric(s, e + 0.5),
                          reparametrize_by_length(build_jacobi_metric(s, e + 0.5), ex.path), so);
      svg::write(out_file(options, "jacobi_paths.svg"),
                 svg::line_plot("Configuration-space images",
                                {{"action extremal", ex.path.values().row(0), ex.path.values().row(1)},
                                 {"geodesic at E", g.values().row(0), g.values().row(1)},
                                 {"geodesic at E + 0.5", gw.values().row(0), gw.values().row(1)}},
                                "x", "y"));
      res.artifacts.push_back("jacobi_paths.svg");
    }
  }
  {
    // Length of x(t) = sin t / sin 1 at E = 1 / (2 sin²1): ∫₀¹ √(2E − x²) dx.
    const ActionSpec ho = fixtures::oscillator(1.0, 400, 1.0);
    const ExtremalPath ex = straight_solve(ho, point(ho.mesh, {0.0}), point(ho.mesh, {1.0}), so);
    const double e = 0.5 / (std::sin(1.0) * std::sin(1.0));
    const double a2 = 2 * e, a = std::sqrt(a2);
    const double exact = 0.5 * (std::sqrt(a2 - 1.0) + a2 * std::asin(1.0 / a));
    res.below("oscillator_length_relative_error",
              rel(length(build_jacobi_metric(ho, e), ex.path), exact), 1e-4);
  }
  {
    const ActionSpec fp = fixtures::oscillators(Eigen::VectorXd::Zero(2), 32, 1.0);
    const FieldConfig a = point(fp.mesh, {0.0, 0.0}), b = point(fp.mesh, {1.0, 2.0});
    const JacobiMetric m = build_jacobi_metric(fp, 1.0);
    const Path g = jacobi_geodesic(m, a, b, 32, so);
    const Path line = straight_path(a, b, 32, 1.0);
    res.below("free_geodesic_vs_line", image_distance(g, line), 1e-10);
    res.below("free_length_relative_error", rel(length(m, g), std::sqrt(2.0) * std::sqrt(5.0)),
              1e-12);
  }
  return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_discretization_suite(const RunOptions &options) {
  ExperimentResult res;
  res.name = "discretization";
  const SolveOptions &so = options.solve;

  {
    std::mt19937_64 rng(3);
    ActionSpec w = fixtures::circle_wave(16, 16, 1.0);
    w.potential.site_quadratic = Eigen::VectorXd::Ones(16);
    w.potential.site_quartic = Eigen::VectorXd::Constant(16, 0.3);
    w.potential.source = Eigen::VectorXd::LinSpaced(16, -0.5, 0.5);
    w.pinned = {3};
    ActionSpec p;
    p.mesh = build_particle_mesh(3);
    p.field_period = 2 * M_PI;
    p.time_steps = 16;
    p.potential.pair_couplings = {{0, 1, 2.0}, {1, 2, 0.7}};
    double worst = 0.0;
    for (const ActionSpec *spec : {&w, &p}) {
      for (int trial = 0; trial < 2; ++trial) {
        Path path = random_path(*spec, rng, 0.5);
        const Eigen::MatrixXd r = eom_residual(*spec, path).values();
        Eigen::MatrixXd fd = Eigen::MatrixXd::Zero(r.rows(), r.cols());
        const std::vector<Index> free = spec->free_sites();
        const double h = 1e-5;
        for (Index k = 1; k < path.time_steps(); ++k)
          for (Index s : free) {
            const double keep = path.values()(s, k);
            path.values()(s, k) = keep + h;
            const double up = action(*spec, path);
            path.values()(s, k) = keep - h;
            const double dn = action(*spec, path);
            path.values()(s, k) = keep;
            fd(s, k) = (up - dn) / (2 * h);
          }
        worst = std::max(worst, (r - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff());
      }
    }
    res.below("gradient_check_relative", worst, 1e-6);
  }

  Eigen::VectorXd ks(4), action_err(4), drift(4);
  {
    const Index steps[] = {25, 50, 100, 200};
    const double exact = 0.5 / std::tan(1.0);
    for (int i = 0; i < 4; ++i) {
      const ActionSpec ho = fixtures::oscillator(1.0, steps[i], 1.0);
      const ExtremalPath ex = straight_solve(ho, point(ho.mesh, {0.0}), point(ho.mesh, {1.0}), so);
      ks(i) = static_cast<double>(steps[i]);
      action_err(i) = std::abs(ex.on_shell_action - exact);

      ActionSpec an = fixtures::oscillator(1.0, steps[i], 1.0);
      an.potential.site_quartic = Eigen::VectorXd::Ones(1);
      const ExtremalPath ea = straight_solve(an, point(an.mesh, {0.0}), point(an.mesh, {1.0}), so);
      const Eigen::VectorXd en = step_energies(an, ea.path);
      drift(i) = en.maxCoeff() - en.minCoeff();
    }
    auto order = [](const Eigen::VectorXd &e) {
      double worst = 0.0;
      for (Index i = 0; i + 1 < e.size(); ++i)
        worst = std::max(worst, std::abs(std::log2(e(i) / e(i + 1)) - 2.0));
      return worst;
    };
    res.below("action_order_deviation_from_2", order(action_err), 0.2);
    res.below("energy_drift_order_deviation_from_2", order(drift), 0.2);
    res.details["action_error"] = std::vector<double>(action_err.data(), action_err.data() + 4);
    res.details["energy_drift"] = std::vector<double>(drift.data(), drift.data() + 4);
  }
  {
    ActionSpec w = fixtures::circle_wave(16, 32, 0.8);
    w.potential.site_quadratic = Eigen::VectorXd::Constant(16, 0.7);
    w.potential.source = Eigen::VectorXd::LinSpaced(16, 0.0, 1.0);
    w.pinned = {0};
    const FieldConfig a = FieldConfig::from_function(w.mesh, bump(2.0, 0.7, 1.0));
    const FieldConfig b = FieldConfig::from_function(w.mesh, bump(4.0, 0.7, -0.3));
    const FieldConfig bb(w.mesh, [&] {
      Eigen::VectorXd v = b.values();
      v(0) = a[0];
      return v;
    }());
    SolveOptions tight = so;
    tight.tol = std::min(so.tol, 1e-13);
    const ExtremalPath ex = straight_solve(w, a, bb, tight);
    const Path dense = dense_quadratic_extremal(w, a, bb);
    res.below("dense_oracle_max_difference",
              (ex.path.values() - dense.values()).cwiseAbs().maxCoeff(), 1e-10);
  }

  if (!options.out_dir.empty()) {
    Eigen::VectorXd lk = ks.array().log10(), la = action_err.array().log10(),
                    ld = drift.array().log10();
    svg::write(out_file(options, "discretization_convergence.svg"),
               svg::line_plot("Refinement in time",
                              {{"action error", lk, la}, {"energy drift", lk, ld}},
                              "log10 steps", "log10 value"));
    res.artifacts.push_back("discretization_convergence.svg");
  }
  return res;
}

} // namespace emloc
