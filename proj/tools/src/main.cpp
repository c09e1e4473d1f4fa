// barrier-scatter: config-driven driver for the barrier-top scattering toolkit.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "runner.hpp"

namespace {

int execute(const std::string& config_path, const std::string& out, const std::string& only) {
  using namespace barrier::cli;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("<file>", "cannot read " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    RunConfig c = parse_config(j);
    if (!out.empty()) c.output_dir = out;
    const std::vector<std::string> tasks = only.empty() ? c.tasks : std::vector<std::string>{only};
    const RunReport r = run_tasks(c, tasks, ss.str(), threads_from_env());
    for (const auto& t : r.tasks) {
      std::cout << t.name << ": " << status_name(t.status);
      if (!t.reason.empty()) std::cout << " (" << t.reason << ")";
      std::cout << "\n";
    }
    return r.all_ok() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical scattering at a barrier top: trajectories, trapped data, amplitude and checks"};
  app.require_subcommand(1);
  std::string config, out;
  std::string chosen;

  auto add = [&](const std::string& name, const std::string& help, const std::string& task) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->callback([&chosen, task] { chosen = task.empty() ? "*" : task; });
  };
  add("run", "run every task listed in the config", "");
  add("trajectory", "regular scattering trajectories (CSV)", "trajectory");
  add("trapped", "trapped incoming/outgoing curves (JSON)", "trapped");
  add("series", "Taylor data of V, phi_+ and coupling constants (JSON)", "series");
  add("amplitude", "leading-order amplitude terms and h-sweep (JSON, CSV)", "amplitude");
  add("cross-section", "total cross-section main term per h (CSV)", "cross-section");
  add("verify-asymptotics", "oscillatory-integral asymptotics check (CSV)", "verify-asymptotics");
  add("quasimode", "quasimode resolvent lower-bound check (CSV)", "quasimode");

  CLI11_PARSE(app, argc, argv);
  return execute(config, out, chosen == "*" ? "" : chosen);
}
