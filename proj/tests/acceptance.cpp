// One line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <Eigen/Dense>

#include "emloc/exemplars.hpp"
#include "emloc/modes.hpp"
#include "emloc/semiclassical.hpp"

using namespace emloc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Line {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string &what) {
    pass = pass && ok;
    if (!detail.empty())
      detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
  void below(const std::string &what, double v, double bound) {
    check(v < bound, what + " " + fmt(v) + " < " + fmt(bound));
  }
  void above(const std::string &what, double v, double bound) {
    check(v > bound, what + " " + fmt(v) + " > " + fmt(bound));
  }
};

double metric(const ExperimentResult &r, const std::string &key) {
  const auto it = r.metrics.find(key);
  return it == r.metrics.end() ? std::nan("") : it->second.value;
}

int failures = 0;

void report(int id, const std::string &name, const std::function<Line()> &body) {
  Line line;
  try {
    line = body();
  } catch (const std::exception &e) {
    line.pass = false;
    line.detail = std::string("exception: ") + e.what();
  }
  failures += line.pass ? 0 : 1;
  std::printf("[%s] %d %s: %s\n", line.pass ? "PASS" : "FAIL", id, name.c_str(), line.detail.c_str());
  std::fflush(stdout);
}

Line annulus() {
  Line l;
  const auto t0 = Clock::now();
  const AnnulusSolution sol = solve_annulus(33, 128);
  const double elapsed = seconds_since(t0);
  // separation of variables: (A r⁵ + B r⁻⁵) sin 5θ, φ(2) = 0, φ(4) = 4 sin 5θ
  Eigen::Matrix2d m;
  m << std::pow(2.0, 5), std::pow(2.0, -5), std::pow(4.0, 5), std::pow(4.0, -5);
  const Eigen::Vector2d ab = m.partialPivLu().solve(Eigen::Vector2d(0, 4));
  double err = 0;
  const Eigen::MatrixXd &pos = sol.mesh->positions();
  for (Index s = 0; s < sol.mesh->size(); ++s) {
    const double r = pos(s, 0), th = pos(s, 1);
    const double exact = (ab(0) * std::pow(r, 5) + ab(1) * std::pow(r, -5)) * std::sin(5 * th);
    err = std::max(err, std::abs(sol.corrected(s / 128, s % 128) - exact));
  }
  l.below("max error at 33x128", err, 1e-3);
  l.below("runtime s", elapsed, 5.0);
  return l;
}

Line commensurability_check() {
  Line l;
  const auto t0 = Clock::now();
  const ModeMatchReport quarter = commensurability(Rational(1, 4), Rational(1), 32);
  bool all = quarter.matched.size() == 32 && quarter.unmatched_intrinsic.empty();
  for (std::size_t i = 0; all && i < quarter.matched.size(); ++i)
    all = quarter.matched[i].intrinsic == static_cast<std::int64_t>(i + 1) &&
          quarter.matched[i].global == 4 * quarter.matched[i].intrinsic;
  l.check(all, "1/4: n <= 32 all matched by n' = 4n");
  const ModeIndependence mi = mode_independence(Rational(1, 4), Rational(1), 32);
  l.check(!mi.N_side.unmatched_intrinsic.empty() && mi.N_side.unmatched_intrinsic.front() == 1,
          "N fundamental unmatched at [O]/[N] = 1/3");
  l.below("runtime s", seconds_since(t0), 1.0);
  return l;
}

Line van_vleck_check() {
  Line l;
  const ActionSpec ho = fixtures::oscillator(1.0, 200, 1.0);
  const FieldConfig a = FieldConfig::constant(ho.mesh, 0.0), b = FieldConfig::constant(ho.mesh, 1.0);
  const ExtremalPath ex = solve(ho, a, b, straight_path(a, b, 200, 1.0));
  const double exact = 1 / std::sin(1.0);
  const double dh = van_vleck(ho, ex, VanVleckMethod::hessian_block).determinant;
  const double df = van_vleck(ho, ex, VanVleckMethod::finite_difference).determinant;
  l.below("HO Schur error", std::abs(dh - exact), 1e-4);
  l.below("HO finite-difference error", std::abs(df - exact), 1e-4);
  const ActionSpec fp = fixtures::oscillator(0.0, 200, 1.0);
  const ExtremalPath ef = solve(fp, a, b, straight_path(a, b, 200, 1.0));
  l.below("free error", std::max(std::abs(van_vleck(fp, ef, VanVleckMethod::hessian_block).determinant - 1),
                                 std::abs(van_vleck(fp, ef, VanVleckMethod::finite_difference).determinant - 1)),
          1e-6);
  const ExperimentResult suite = run_van_vleck_suite();
  l.below("method agreement over fixtures", metric(suite, "method_agreement_relative"), 1e-4);
  l.check(suite.pass, "suite");
  return l;
}

Line cluster_check_line() {
  Line l;
  const ExperimentResult r = run_cluster_suite();
  l.below("decoupled defect", metric(r, "decoupled_defect"), 1e-6);
  l.check(metric(r, "winding_joint_count") == 6 && metric(r, "winding_count_product") == 6,
          "3x2 winding joint count " + fmt(metric(r, "winding_joint_count")) + " = 3*2");
  l.below("winding defect", metric(r, "winding_defect"), 1e-6);
  l.above("Bell-pair defect", metric(r, "bell_defect"), 0.1);
  return l;
}

Line detector() {
  Line l;
  const ExperimentResult loc = run_locality_suite();
  l.check(metric(loc, "cut_wave_localized") == 1,
          "cut wave localized at eps " + fmt(metric(loc, "cut_epsilon")));
  const ExperimentResult nl = run_nonlocal_source({}, {0.0, 0.5, 1.0});
  l.check(metric(nl, "amplitude_1_condition_i_fails") == 1, "source 1: condition (i) fails");
  l.above("source 1 deviation", metric(nl, "amplitude_1_deviation"), 0.01);
  l.below("monotonicity violation", metric(nl, "monotonicity_violation"), 1e-12);
  l.below("dense oracle gap", metric(nl, "oracle_relative_gap"), 1e-6);
  return l;
}

Line jacobi() {
  Line l;
  const ExperimentResult r = run_jacobi_suite();
  l.below("image deviation at 400 steps", metric(r, "anisotropic_image_deviation"), 1e-3);
  l.above("wrong-energy deviation", metric(r, "wrong_energy_image_deviation"), 1e-2);
  return l;
}

Line discretization() {
  Line l;
  const ExperimentResult r = run_discretization_suite();
  l.below("residual vs finite differences", metric(r, "gradient_check_relative"), 1e-6);
  l.below("|action order - 2|", metric(r, "action_order_deviation_from_2"), 0.2);
  l.below("|energy drift order - 2|", metric(r, "energy_drift_order_deviation_from_2"), 0.2);
  return l;
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string("\"") + EMLOC_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Line end_to_end() {
  Line l;
  const fs::path work = EMLOC_WORK_DIR;
  fs::remove_all(work);
  fs::path dirs[2] = {work / "first", work / "second"};
  for (int i = 0; i < 2; ++i) {
    const auto t0 = Clock::now();
    const int code = run_cli("verify-all --out \"" + dirs[i].string() + "\"");
    const double elapsed = seconds_since(t0);
    l.check(code == 0, "run " + std::to_string(i + 1) + " exit " + std::to_string(code));
    l.below("run " + std::to_string(i + 1) + " s", elapsed, 300.0);
  }
  int compared = 0, differing = 0;
  for (const auto &entry : fs::directory_iterator(dirs[0])) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".json" || name.find("_metadata") != std::string::npos)
      continue;
    ++compared;
    if (!fs::exists(dirs[1] / name) || slurp(entry.path()) != slurp(dirs[1] / name))
      ++differing;
  }
  l.check(compared >= 10 && differing == 0,
          std::to_string(compared) + " JSON files, " + std::to_string(differing) + " differ");
  return l;
}

} // namespace

int main() {
  report(1, "annulus", annulus);
  report(2, "commensurability", commensurability_check);
  report(3, "Van Vleck", van_vleck_check);
  report(4, "cluster decomposition", cluster_check_line);
  report(5, "localization detector", detector);
  report(6, "Jacobi equivalence", jacobi);
  report(7, "solver and discretization", discretization);
  report(8, "end-to-end verify-all", end_to_end);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
