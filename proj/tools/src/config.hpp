#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "barrier/cross_section.hpp"
#include "barrier/manifolds.hpp"
#include "barrier/potential.hpp"
#include "barrier/quasimode.hpp"

namespace barrier::cli {

/// A config value that violates the schema; `field` is its dotted path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error("schema error at " + field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"trajectory", "trapped",          "series",   "amplitude",
                                              "cross-section", "verify-asymptotics", "quasimode"};
  return names;
}

struct AsymptoticsConfig {
  std::vector<double> alpha{0.5, 1.0, 1.5};
  std::vector<double> beta{0.0, 1.0};
  std::vector<double> lambdas{1e3, 1e4, 1e5};
};

struct QuasimodeConfig {
  std::vector<double> lambdas{1.0};
  std::vector<double> h_grid;  ///< empty: the run's h grid
};

struct RunConfig {
  // Blocks a task needs are checked when that task runs.
  std::optional<PotentialModel> potential;
  std::optional<Eigen::VectorXd> omega;
  std::optional<Eigen::VectorXd> theta;
  double z = 0.0;
  std::vector<double> h_grid;
  /// Energy of the classical data; E₀ unless given.
  std::optional<double> classical_energy;
  int series_degree = 6;
  TrappedOptions trapped;
  SearchBox regular_box;
  InnerMethod inner_method = InnerMethod::Auto;
  AsymptoticsConfig asymptotics;
  QuasimodeConfig quasimode;
  std::vector<std::string> tasks;
  std::filesystem::path output_dir = "out";
};

/// Validates against the schema; every failure names the offending field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// The potential block alone, e.g. {"kind": "gaussian", "E0": 0.5, "n": 2}.
PotentialModel parse_potential(const nlohmann::json& j);

}  // namespace barrier::cli
