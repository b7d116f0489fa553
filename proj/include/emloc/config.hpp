#pragma once

#include <optional>
#include <string>

#include "emloc/exemplars.hpp"

namespace emloc {

/// Bad configuration. `line`/`column` are set for syntax errors, `key` for
/// unknown or invalid entries (dotted path, e.g. "action.potential[1].kind").
class ConfigError : public Error {
public:
  ConfigError(const std::string &what, std::string key, int line = 0, int column = 0)
      : Error(what), key_(std::move(key)), line_(line), column_(column) {}
  const std::string &key() const noexcept { return key_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  std::string key_;
  int line_;
  int column_;
};

/// A validated experiment description.
struct ExperimentConfig {
  std::string kind;
  std::string name; ///< result file stem; defaults to kind
  json params = json::object();
  SolveOptions solve;
  std::optional<std::string> out_dir;
  std::string base_dir; ///< relative file references resolve here
};

/// Experiment kinds a config may name.
const std::vector<std::string> &config_kinds();

ExperimentConfig parse_config(const std::string &text, const std::string &base_dir = ".");
ExperimentConfig load_config(const std::string &path);

/// Runs the experiment; `options.solve` is taken from the config.
ExperimentResult run_config(const ExperimentConfig &config, const RunOptions &options);

} // namespace emloc
