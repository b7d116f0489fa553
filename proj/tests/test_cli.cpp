#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = EMLOC_WORK_DIR;

int run(const std::string &args) {
  const std::string cmd = std::string("\"") + EMLOC_CLI_PATH + "\" " + args + " >\"" +
                          (kWork / "stdout.txt").string() + "\" 2>\"" +
                          (kWork / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path write(const std::string &name, const std::string &text) {
  const fs::path p = kWork / name;
  std::ofstream(p) << text;
  return p;
}

std::string config(const std::string &name) { return std::string(EMLOC_CONFIG_DIR) + "/" + name; }

} // namespace

TEST_CASE("informational flags") {
  fs::create_directories(kWork);
  CHECK(run("--version") == 0);
  CHECK(run("--list") == 0);
  CHECK(slurp(kWork / "stdout.txt").find("nonlocal_source") != std::string::npos);
  CHECK(run("run --list") == 0);
  CHECK(run("") == 2);
  CHECK(run("run") == 2);
}

TEST_CASE("run writes result and metadata") {
  fs::create_directories(kWork);
  const fs::path out = kWork / "run_annulus";
  fs::remove_all(out);
  CHECK(run("run \"" + config("annulus.cfg") + "\" --out \"" + out.string() + "\"") == 0);
  const auto result = nlohmann::json::parse(slurp(out / "annulus_result.json"));
  CHECK(result["pass"] == true);
  CHECK(result["metrics"]["max_error"]["value"].get<double>() < 1e-3);
  const auto meta = nlohmann::json::parse(slurp(out / "annulus_metadata.json"));
  CHECK(meta.contains("elapsed_seconds"));
  CHECK(fs::exists(out / "annulus_field.svg"));
}

TEST_CASE("configuration errors exit with 2") {
  fs::create_directories(kWork);
  const fs::path syntax = write("syntax.cfg", "{\n  \"experiment\": \"annulus\",\n  oops\n}\n");
  CHECK(run("run \"" + syntax.string() + "\"") == 2);
  CHECK(slurp(kWork / "stderr.txt").find("syntax.cfg:3:") != std::string::npos);

  const fs::path key = write("key.cfg", R"({"experiment": "annulus", "annulus": {"n_rr": 3}})");
  CHECK(run("run \"" + key.string() + "\"") == 2);
  CHECK(slurp(kWork / "stderr.txt").find("annulus.n_rr") != std::string::npos);

  CHECK(run("run \"" + (kWork / "absent.cfg").string() + "\"") == 2);
}

TEST_CASE("failed criteria exit with 1") {
  fs::create_directories(kWork);
  const fs::path small = write("small.cfg", R"({
    "experiment": "annulus",
    "annulus": { "n_r": 5, "n_theta": 16 }
  })");
  CHECK(run("run \"" + small.string() + "\" --out \"" + (kWork / "small").string() + "\"") == 1);
  CHECK(run("verify-all --only nothing --out \"" + (kWork / "none").string() + "\"") == 1);
  CHECK(run("--solver-tol 0.1 verify-all --only van_vleck --out \"" + (kWork / "loose").string() +
            "\"") == 1);
  CHECK(slurp(kWork / "stderr.txt").find("FAIL van_vleck.") != std::string::npos);
}

TEST_CASE("verify-all subset") {
  fs::create_directories(kWork);
  const fs::path out = kWork / "subset";
  fs::remove_all(out);
  CHECK(run("verify-all --only annulus jacobi --jobs 2 --out \"" + out.string() + "\"") == 0);
  const auto summary = nlohmann::json::parse(slurp(out / "verify_all_summary.json"));
  CHECK(summary["pass"] == true);
  CHECK(summary["experiments"].size() == 2);
  CHECK(fs::exists(out / "jacobi_result.json"));
}

TEST_CASE("output directory from the environment") {
  fs::create_directories(kWork);
  const fs::path out = kWork / "from_env";
  fs::remove_all(out);
  CHECK(::setenv("EMLOC_OUT_DIR", out.string().c_str(), 1) == 0);
  CHECK(run("run \"" + config("circle_wave_irrational.cfg") + "\"") == 0);
  ::unsetenv("EMLOC_OUT_DIR");
  CHECK(fs::exists(out / "circle_wave_irrational_result.json"));
}
