// Batch runner for the canned experiments and oracle suites.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "emloc/config.hpp"

namespace fs = std::filesystem;
using namespace emloc;

namespace {

constexpr const char *kVersion = "1.0.0";

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

/// --out, then $EMLOC_OUT_DIR, then the config, then "out".
std::string resolve_out_dir(const std::string &flag, const std::optional<std::string> &config) {
  if (!flag.empty())
    return flag;
  if (const char *env = std::getenv("EMLOC_OUT_DIR"); env && *env)
    return env;
  if (config)
    return *config;
  return "out";
}

void print_registry() {
  for (const Experiment &e : registry())
    std::printf("%-24s %s\n", e.name.c_str(), e.description.c_str());
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_table(const ExperimentResult &r) {
  static const char *const ops[] = {"<", ">", "==", ""};
  std::printf("%s: %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL");
  for (const auto &[key, m] : r.metrics) {
    std::string bound;
    if (m.kind != MetricCheck::Kind::info)
      bound = std::string(ops[static_cast<int>(m.kind)]) + " " + format_value(m.bound);
    std::printf("  %-4s %-44s %-14s %s\n", m.kind == MetricCheck::Kind::info ? "" : (m.pass ? "ok" : "FAIL"),
                key.c_str(), format_value(m.value).c_str(), bound.c_str());
  }
  if (r.details.contains("errors"))
    for (const auto &[key, msg] : r.details["errors"].items())
      std::printf("  FAIL %s: %s\n", key.c_str(), msg.get<std::string>().c_str());
}

void report_failures(const ExperimentResult &r) {
  for (const auto &[key, m] : r.metrics)
    if (!m.pass)
      std::fprintf(stderr, "FAIL %s.%s = %s (bound %s)\n", r.name.c_str(), key.c_str(),
                   format_value(m.value).c_str(), format_value(m.bound).c_str());
  if (r.details.contains("errors"))
    for (const auto &[key, msg] : r.details["errors"].items())
      std::fprintf(stderr, "FAIL %s.%s: %s\n", r.name.c_str(), key.c_str(),
                   msg.get<std::string>().c_str());
}

int cmd_run(const std::string &config_path, const std::string &out_flag,
            std::optional<double> solver_tol) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError &e) {
    if (e.line() > 0)
      std::fprintf(stderr, "%s:%d:%d: %s\n", config_path.c_str(), e.line(), e.column(), e.what());
    else
      std::fprintf(stderr, "%s: %s\n", config_path.c_str(), e.what());
    return 2;
  }
  if (solver_tol)
    cfg.solve.tol = *solver_tol;
  RunOptions opts;
  opts.out_dir = resolve_out_dir(out_flag, cfg.out_dir);
  fs::create_directories(opts.out_dir);

  const std::string started = timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res;
  try {
    res = run_config(cfg, opts);
  } catch (const ConfigError &e) {
    std::fprintf(stderr, "%s: %s\n", config_path.c_str(), e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir(opts.out_dir);
  write_json_file((dir / (cfg.name + "_result.json")).string(), to_json(res));
  write_json_file((dir / (cfg.name + "_metadata.json")).string(),
                  {{"experiment", cfg.kind},
                   {"config", config_path},
                   {"started", started},
                   {"finished", timestamp()},
                   {"elapsed_seconds", elapsed},
                   {"version", kVersion}});
  print_table(res);
  if (!res.pass)
    report_failures(res);
  return res.pass ? 0 : 1;
}

int cmd_verify_all(const std::string &out_flag, int jobs, const std::vector<std::string> &only,
                   std::optional<double> solver_tol) {
  std::vector<Experiment> selected;
  for (const Experiment &e : registry())
    if (only.empty() || std::find(only.begin(), only.end(), e.name) != only.end())
      selected.push_back(e);
  if (selected.empty()) {
    std::fprintf(stderr, "no experiments\n");
    return 1;
  }
  RunOptions opts;
  opts.out_dir = resolve_out_dir(out_flag, std::nullopt);
  if (solver_tol)
    opts.solve.tol = *solver_tol;
  fs::create_directories(opts.out_dir);

  const std::string started = timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyAllResult all = verify_all(selected, opts, jobs);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir(opts.out_dir);
  for (const ExperimentResult &r : all.results) {
    write_json_file((dir / (r.name + "_result.json")).string(), to_json(r));
    print_table(r);
  }
  write_json_file((dir / "verify_all_summary.json").string(), summary_json(all));
  write_json_file((dir / "verify_all_metadata.json").string(),
                  {{"started", started},
                   {"finished", timestamp()},
                   {"elapsed_seconds", elapsed},
                   {"jobs", jobs},
                   {"version", kVersion}});
  for (const ExperimentResult &r : all.results)
    if (!r.pass)
      report_failures(r);
  std::printf("%s: %zu experiments, %s\n", all.pass ? "PASS" : "FAIL", all.results.size(),
              all.pass ? "all criteria met" : "see failures above");
  return all.pass ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Semi-classical locality experiments on lattice field models"};
  app.set_version_flag("--version", kVersion);
  bool list = false;
  std::optional<double> solver_tol;
  app.add_flag("--list", list, "Print the experiment registry");
  app.add_option("--solver-tol", solver_tol, "Override the Newton residual tolerance")
      ->check(CLI::PositiveNumber);

  auto *run = app.add_subcommand("run", "Run one experiment from a config file");
  std::string config_path, run_out;
  bool run_list = false;
  run->add_option("config", config_path, "Config file (JSON)");
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--list", run_list, "Print the experiment registry");

  auto *va = app.add_subcommand("verify-all", "Run every experiment and oracle suite");
  std::string va_out;
  int jobs = 1;
  std::vector<std::string> only;
  va->add_option("--out", va_out, "Output directory");
  va->add_option("--jobs", jobs, "Experiments run concurrently")->check(CLI::PositiveNumber);
  va->add_option("--only", only, "Restrict to the named experiments");

  CLI11_PARSE(app, argc, argv);

  if (list || run_list) {
    print_registry();
    return 0;
  }
  if (run->parsed()) {
    if (config_path.empty()) {
      std::fprintf(stderr, "run: a config file is required\n");
      return 2;
    }
    return cmd_run(config_path, run_out, solver_tol);
  }
  if (va->parsed())
    return cmd_verify_all(va_out, jobs, only, solver_tol);
  std::cout << app.help();
  return 2;
}
