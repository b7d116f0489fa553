#include "emloc/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "emloc/svg.hpp"

namespace emloc {

namespace {

[[noreturn]] void fail(const std::string &key, const std::string &msg) {
  throw ConfigError(key + ": " + msg, key);
}

/// Typed access to one JSON object; every key must be consumed.
class Reader {
public:
  Reader(const json &j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string &k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string &k) const { return j_.contains(k); }

  const json &raw(const std::string &k) {
    seen_.insert(k);
    return j_.at(k);
  }

  double number(const std::string &k) {
    if (!has(k))
      fail(key(k), "missing");
    const json &v = raw(k);
    if (!v.is_number())
      fail(key(k), "expected a number");
    return v.get<double>();
  }
  double number(const std::string &k, double fallback) { return has(k) ? number(k) : fallback; }
  double positive(const std::string &k, double fallback) {
    const double v = number(k, fallback);
    if (!(v > 0))
      fail(key(k), "must be positive");
    return v;
  }

  std::int64_t integer(const std::string &k) {
    if (!has(k))
      fail(key(k), "missing");
    const json &v = raw(k);
    if (!v.is_number_integer())
      fail(key(k), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string &k, std::int64_t fallback) {
    return has(k) ? integer(k) : fallback;
  }

  std::string string(const std::string &k) {
    if (!has(k))
      fail(key(k), "missing");
    const json &v = raw(k);
    if (!v.is_string())
      fail(key(k), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string &k, const std::string &fallback) {
    return has(k) ? string(k) : fallback;
  }

  bool flag(const std::string &k, bool fallback) {
    if (!has(k))
      return fallback;
    const json &v = raw(k);
    if (!v.is_boolean())
      fail(key(k), "expected true or false");
    return v.get<bool>();
  }

  std::vector<std::int64_t> integers(const std::string &k) {
    const json &v = raw(k);
    if (!v.is_array())
      fail(key(k), "expected an array of integers");
    std::vector<std::int64_t> out;
    for (const json &e : v) {
      if (!e.is_number_integer())
        fail(key(k), "expected an array of integers");
      out.push_back(e.get<std::int64_t>());
    }
    return out;
  }

  std::vector<double> numbers(const std::string &k) {
    const json &v = raw(k);
    if (!v.is_array())
      fail(key(k), "expected an array of numbers");
    std::vector<double> out;
    for (const json &e : v) {
      if (!e.is_number())
        fail(key(k), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void done() const {
    for (const auto &[k, v] : j_.items())
      if (!seen_.count(k))
        fail(key(k), "unknown key");
  }

private:
  const json &j_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::vector<std::string> kSuiteKinds = {"van_vleck", "cluster", "locality", "jacobi",
                                              "discretization"};

MeshPtr build_mesh(Reader r) {
  const std::string topo = r.string("topology");
  MeshPtr mesh;
  try {
    if (topo == "circle")
      mesh = build_circle_mesh(r.integer("sites"), r.positive("circumference", 2 * M_PI));
    else if (topo == "interval")
      mesh = build_interval_mesh(r.integer("sites"), r.positive("length", 1.0));
    else if (topo == "annulus")
      mesh = build_annulus_mesh(r.integer("n_r"), r.integer("n_theta"), r.positive("r1", 2.0),
                                r.positive("r2", 4.0));
    else if (topo == "particle")
      mesh = build_particle_mesh(r.integer("dim"));
    else
      fail(r.key("topology"), "unknown topology '" + topo + "'");
  } catch (const ConfigError &) {
    throw;
  } catch (const Error &e) {
    fail(r.key("topology"), e.what());
  }
  r.done();
  return mesh;
}

void add_potential_term(ActionSpec &spec, Reader r) {
  const Index n = spec.mesh->size();
  const std::string kind = r.string("kind");
  Potential &p = spec.potential;
  auto ensure = [n](Eigen::VectorXd &v) {
    if (v.size() == 0)
      v = Eigen::VectorXd::Zero(n);
  };
  if (kind == "gradient") {
    const double k = r.number("stiffness", 1.0);
    p.edge_stiffness = unit_edge_stiffness(*spec.mesh) * k;
  } else if (kind == "site_quadratic") {
    ensure(p.site_quadratic);
    p.site_quadratic.array() += r.number("value");
  } else if (kind == "site_quartic") {
    ensure(p.site_quartic);
    p.site_quartic.array() += r.number("value");
  } else if (kind == "source") {
    ensure(p.source);
    const double amp = r.number("amplitude");
    Index begin = 0, end = n;
    if (r.has("sites")) {
      const auto s = r.integers("sites");
      if (s.size() != 2 || s[0] < 0 || s[1] > n || s[0] >= s[1])
        fail(r.key("sites"), "expected [begin, end) within the mesh");
      begin = s[0];
      end = s[1];
    }
    p.source.segment(begin, end - begin).array() += amp;
  } else if (kind == "inverse_laplacian") {
    const double scale = r.number("scale", 1.0);
    Eigen::MatrixXd k = inverse_laplacian_kernel(*spec.mesh) * scale;
    p.kernel = p.kernel.size() == 0 ? k : Eigen::MatrixXd(p.kernel + k);
  } else if (kind == "pair") {
    const std::int64_t a = r.integer("a"), b = r.integer("b");
    if (a < 0 || b < 0 || a >= n || b >= n || a == b)
      fail(r.key("a"), "pair sites out of range");
    p.pair_couplings.push_back({a, b, r.number("strength")});
  } else {
    fail(r.key("kind"), "unknown potential kind '" + kind + "'");
  }
  r.done();
}

ActionSpec build_action(const MeshPtr &mesh, Reader r) {
  ActionSpec spec;
  spec.mesh = mesh;
  spec.time_steps = r.integer("time_steps", 64);
  spec.total_time = r.positive("total_time", 1.0);
  if (r.has("mass_density"))
    spec.mass_density = Eigen::VectorXd::Constant(mesh->size(), r.positive("mass_density", 1.0));
  if (r.has("field_period"))
    spec.field_period = r.positive("field_period", 2 * M_PI);
  if (r.has("pinned"))
    for (std::int64_t s : r.integers("pinned"))
      spec.pinned.push_back(s);
  if (r.has("potential")) {
    const json &terms = r.raw("potential");
    if (!terms.is_array())
      fail(r.key("potential"), "expected an array of terms");
    for (std::size_t i = 0; i < terms.size(); ++i)
      add_potential_term(spec, Reader(terms[i], r.key("potential") + "[" + std::to_string(i) + "]"));
  }
  r.done();
  try {
    spec.validate();
  } catch (const Error &e) {
    fail(r.key("potential"), e.what());
  }
  return spec;
}

RegionDecomposition build_region(const MeshPtr &mesh, Reader r) {
  std::vector<Index> sel;
  if (r.has("sites")) {
    const auto s = r.integers("sites");
    if (s.size() != 2 || s[0] < 0 || s[1] > mesh->size() || s[0] >= s[1])
      fail(r.key("sites"), "expected [begin, end) within the mesh");
    for (Index i = s[0]; i < s[1]; ++i)
      sel.push_back(i);
  } else if (r.has("list")) {
    for (std::int64_t s : r.integers("list"))
      sel.push_back(s);
  } else {
    fail(r.key("sites"), "missing (or give 'list')");
  }
  r.done();
  try {
    return decompose_sites(mesh, sel);
  } catch (const Error &e) {
    fail(r.key("sites"), e.what());
  }
}

FieldConfig build_field(const MeshPtr &mesh, Reader r, const std::string &base_dir) {
  const std::string kind = r.string("kind");
  FieldConfig out = FieldConfig::zero(mesh);
  if (kind == "zero") {
  } else if (kind == "constant") {
    out = FieldConfig::constant(mesh, r.number("value"));
  } else if (kind == "bump") {
    const double c = r.number("centre"), w = r.positive("width", 1.0), a = r.number("amplitude", 1.0);
    out = FieldConfig::from_function(mesh, [=](const Eigen::VectorXd &x) {
      const double d = (x(0) - c) / w;
      return a * std::exp(-d * d);
    });
  } else if (kind == "sine") {
    const double k = r.number("wavenumber"), a = r.number("amplitude", 1.0),
                 ph = r.number("phase", 0.0);
    out = FieldConfig::from_function(
        mesh, [=](const Eigen::VectorXd &x) { return a * std::sin(k * x(0) + ph); });
  } else if (kind == "values") {
    const auto v = r.numbers("values");
    if (static_cast<Index>(v.size()) != mesh->size())
      fail(r.key("values"), "needs one value per site");
    out = FieldConfig(mesh, Eigen::Map<const Eigen::VectorXd>(v.data(), mesh->size()));
  } else if (kind == "csv") {
    const std::string file = r.string("file");
    const std::filesystem::path p = std::filesystem::path(base_dir) / file;
    std::ifstream is(p);
    if (!is)
      fail(r.key("file"), "cannot open " + p.string());
    try {
      out = read_field_csv(is, mesh);
    } catch (const Error &e) {
      fail(r.key("file"), e.what());
    }
  } else {
    fail(r.key("kind"), "unknown field kind '" + kind + "'");
  }
  r.done();
  return out;
}

struct Problem {
  ActionSpec spec;
  std::optional<RegionDecomposition> dec;
  std::optional<FieldConfig> phi_i, phi_f;
  Side side = Side::O;
  std::optional<double> epsilon;
  SeedStrategy seeds;
  double dedup = kDefaultDedupThreshold;
  std::optional<double> hbar;
  std::optional<Verdict> expect;
};

Problem build_problem(const json &params, const std::string &base_dir) {
  Reader r(params, "localization");
  Problem p;
  const MeshPtr mesh = build_mesh(Reader(r.raw("mesh"), r.key("mesh")));
  p.spec = build_action(mesh, Reader(r.has("action") ? r.raw("action") : json::object(), r.key("action")));
  p.dec = build_region(mesh, Reader(r.raw("region"), r.key("region")));
  if (r.flag("cut_at_boundary", false))
    p.spec = cut_stiffness_at(p.spec, p.dec->boundary());
  {
    Reader e(r.raw("endpoints"), r.key("endpoints"));
    p.phi_i = build_field(mesh, Reader(e.raw("initial"), e.key("initial")), base_dir);
    p.phi_f = build_field(mesh, Reader(e.raw("final"), e.key("final")), base_dir);
    e.done();
  }
  const std::string side = r.string("side", "O");
  if (side != "O" && side != "N")
    fail(r.key("side"), "expected \"O\" or \"N\"");
  p.side = side == "O" ? Side::O : Side::N;
  if (r.has("epsilon")) {
    const json &e = r.raw("epsilon");
    if (e.is_string() && e.get<std::string>() == "calibrate") {
    } else if (e.is_number() && e.get<double>() > 0) {
      p.epsilon = e.get<double>();
    } else {
      fail(r.key("epsilon"), "expected a positive number or \"calibrate\"");
    }
  }
  if (r.has("seeds")) {
    Reader s(r.raw("seeds"), r.key("seeds"));
    p.seeds.n_modes = s.integer("modes", 0);
    p.seeds.amplitude = s.number("amplitude", 0.1);
    s.done();
  }
  p.dedup = r.positive("dedup_threshold", kDefaultDedupThreshold);
  if (r.has("hbar"))
    p.hbar = r.positive("hbar", 1.0);
  if (r.has("expect")) {
    const std::string v = r.string("expect");
    if (v == "localized")
      p.expect = Verdict::localized;
    else if (v == "injective_only")
      p.expect = Verdict::injective_only;
    else if (v == "not_localized")
      p.expect = Verdict::not_localized;
    else
      fail(r.key("expect"), "unknown verdict '" + v + "'");
  }
  r.done();
  return p;
}

/// Validates experiment parameters by kind; returns them normalized.
json check_params(const std::string &kind, const json &params, const std::string &base_dir) {
  if (kind == "annulus") {
    Reader r(params, "annulus");
    json out = {{"n_r", r.integer("n_r", 33)}, {"n_theta", r.integer("n_theta", 128)}};
    r.done();
    return out;
  }
  if (kind == "circle_wave") {
    Reader r(params, "circle_wave");
    json out = json::object();
    if (r.has("irrational")) {
      out["irrational"] = r.string("irrational");
    } else {
      const auto ratio = r.has("ratio") ? r.integers("ratio") : std::vector<std::int64_t>{1, 4};
      if (ratio.size() != 2 || ratio[0] < 1 || ratio[0] >= ratio[1])
        fail("circle_wave.ratio", "expected [num, den] with 1 <= num < den");
      out["ratio"] = ratio;
    }
    r.done();
    return out;
  }
  if (kind == "nonlocal_source") {
    Reader r(params, "nonlocal_source");
    json out = {{"amplitudes", r.has("amplitudes") ? r.numbers("amplitudes")
                                                   : std::vector<double>{0.0, 0.5, 1.0}}};
    r.done();
    return out;
  }
  if (kind == "localization") {
    build_problem(params, base_dir);
    return params;
  }
  if (std::find(kSuiteKinds.begin(), kSuiteKinds.end(), kind) != kSuiteKinds.end()) {
    Reader(params, kind).done();
    return params;
  }
  fail("experiment", "unknown experiment kind '" + kind + "'");
}

ExperimentResult run_localization(const json &params, const std::string &base_dir,
                                  const RunOptions &options) {
  Problem p = build_problem(params, base_dir);
  ExperimentResult res;
  res.name = "localization";
  const RegionDecomposition &dec = *p.dec;
  double eps = 0.0;
  if (p.epsilon) {
    eps = *p.epsilon;
  } else {
    const Calibration cal = calibrate_epsilon(p.spec, dec, *p.phi_i, *p.phi_f, p.side, options.solve);
    res.info("discretization_error", cal.discretization_error);
    eps = cal.epsilon;
  }
  LocalityOptions lo;
  lo.solve = options.solve;
  lo.dedup_threshold = p.dedup;
  const LocalityReport rep =
      test_localization(p.spec, dec, *p.phi_i, *p.phi_f, p.seeds, eps, p.side, lo);
  res.details["report"] = to_json(rep);
  res.info("epsilon", eps);
  res.info("max_deviation", rep.max_deviation);
  res.info("boundary_drift", rep.boundary_drift);
  res.info("global_count", static_cast<double>(rep.global_count));
  res.info("intrinsic_count", static_cast<double>(rep.intrinsic_count));
  res.details["verdict"] = to_string(rep.verdict);
  if (p.expect)
    res.equal("verdict_matches_expectation", rep.verdict == *p.expect ? 1.0 : 0.0, 1.0);

  const ExtremalSet set =
      enumerate(p.spec, *p.phi_i, *p.phi_f, make_seeds(p.spec, *p.phi_i, *p.phi_f, p.seeds),
                options.solve, p.dedup);
  res.details["extremals"] = to_json(p.spec, set);
  if (p.hbar && !set.empty()) {
    KernelOptions ko;
    ko.hbar = *p.hbar;
    ko.solve = options.solve;
    try {
      res.details["kernel"] = to_json(kernel(p.spec, set, ko));
    } catch (const CausticError &e) {
      res.error("kernel", e.what());
    }
  }
  if (!options.out_dir.empty() && !set.empty()) {
    const Path &path = set.extremals.front().path;
    const std::filesystem::path dir(options.out_dir);
    {
      std::ofstream os(dir / "localization_extremal.csv", std::ios::binary);
      write_path_csv(os, path);
    }
    svg::write((dir / "localization_extremal.svg").string(),
               svg::heatmap("Global extremal", path.values().transpose(), "site", "time slice"));
    res.artifacts = {"localization_extremal.csv", "localization_extremal.svg"};
  }
  return res;
}

} // namespace

const std::vector<std::string> &config_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k = {"annulus", "circle_wave", "nonlocal_source", "localization"};
    k.insert(k.end(), kSuiteKinds.begin(), kSuiteKinds.end());
    return k;
  }();
  return kinds;
}

ExperimentConfig parse_config(const std::string &text, const std::string &base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error &e) {
    int line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << "syntax error at line " << line << ", column " << col;
    throw ConfigError(msg.str(), "", line, col);
  }

  Reader r(root, "");
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.kind = r.string("experiment");
  cfg.name = r.string("name", cfg.kind);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos)
    fail("name", "must be a plain file stem");
  if (r.has("solver")) {
    Reader s(r.raw("solver"), "solver");
    cfg.solve.tol = s.positive("tol", cfg.solve.tol);
    cfg.solve.max_iters = static_cast<int>(s.integer("max_iters", cfg.solve.max_iters));
    if (cfg.solve.max_iters <= 0)
      fail("solver.max_iters", "must be positive");
    cfg.solve.regularization = s.number("regularization", cfg.solve.regularization);
    if (cfg.solve.regularization < 0)
      fail("solver.regularization", "must be nonnegative");
    cfg.solve.conjugate_threshold = s.positive("conjugate_threshold", cfg.solve.conjugate_threshold);
    s.done();
  }
  if (r.has("output")) {
    Reader o(r.raw("output"), "output");
    if (o.has("dir"))
      cfg.out_dir = o.string("dir");
    o.done();
  }
  const json params = r.has(cfg.kind) ? r.raw(cfg.kind) : json::object();
  r.done();
  cfg.params = check_params(cfg.kind, params, base_dir);
  return cfg;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ConfigError("cannot open config " + path, "");
  std::ostringstream ss;
  ss << is.rdbuf();
  const std::filesystem::path p(path);
  return parse_config(ss.str(), p.has_parent_path() ? p.parent_path().string() : ".");
}

ExperimentResult run_config(const ExperimentConfig &config, const RunOptions &options) {
  RunOptions o = options;
  o.solve = config.solve;
  const json &p = config.params;
  ExperimentResult res;
  if (config.kind == "annulus") {
    res = run_annulus(p["n_r"].get<Index>(), p["n_theta"].get<Index>(), o);
  } else if (config.kind == "circle_wave") {
    if (p.contains("irrational"))
      res = run_circle_wave_irrational(p["irrational"].get<std::string>(), o);
    else
      res = run_circle_wave(p["ratio"][0].get<std::int64_t>(), p["ratio"][1].get<std::int64_t>(), o);
  } else if (config.kind == "nonlocal_source") {
    res = run_nonlocal_source(o, p["amplitudes"].get<std::vector<double>>());
  } else if (config.kind == "localization") {
    res = run_localization(p, config.base_dir, o);
  } else if (config.kind == "van_vleck") {
    res = run_van_vleck_suite(o);
  } else if (config.kind == "cluster") {
    res = run_cluster_suite(o);
  } else if (config.kind == "locality") {
    res = run_locality_suite(o);
  } else if (config.kind == "jacobi") {
    res = run_jacobi_suite(o);
  } else if (config.kind == "discretization") {
    res = run_discretization_suite(o);
  } else {
    fail("experiment", "unknown experiment kind '" + config.kind + "'");
  }
  res.name = config.name;
  return res;
}

} // namespace emloc
