#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "config.hpp"
#include "runner.hpp"

using namespace barrier::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("barrier_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json radial_config() {
  return json::parse(R"({
    "potential": {"kind": "gaussian", "E0": 0.5, "n": 2},
    "omega": [1.0, 0.0],
    "theta": [0.6, 0.8],
    "z": 0.5,
    "h_grid": [0.01, 0.005, 0.002],
    "tasks": ["trajectory", "trapped", "series", "amplitude", "cross-section"]
  })");
}

json oracle_config() {
  return json::parse(R"({
    "h_grid": [1e-2, 1e-3, 1e-4],
    "asymptotics": {"alpha": [0.5, 1.0], "beta": [0, 1], "lambdas": [1e3, 1e4, 1e5]},
    "tasks": ["verify-asymptotics"]
  })");
}

RunReport run(json j, const fs::path& out) {
  j["output"] = out.string();
  const RunConfig c = parse_config(j);
  return run_tasks(c, c.tasks, j.dump(), 1);
}

std::string schema_field(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, UnknownPotentialKind) {
  json j = radial_config();
  j["potential"]["kind"] = "morse";
  EXPECT_EQ(schema_field(j), "potential.kind");
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("potential.kind"), std::string::npos);
  }
}

TEST(Config, FieldInvariants) {
  json j = radial_config();
  j["omega"] = {1.0, 1e-3};
  EXPECT_EQ(schema_field(j), "omega");
  j = radial_config();
  j["h_grid"] = {0.01, 0.02};
  EXPECT_EQ(schema_field(j), "h_grid");
  j = radial_config();
  j["tasks"] = json::array();
  EXPECT_EQ(schema_field(j), "tasks");
  j = radial_config();
  j["tasks"] = {"plot"};
  EXPECT_EQ(schema_field(j).rfind("tasks", 0), 0u);
  j = radial_config();
  j["potential"].erase("E0");
  EXPECT_EQ(schema_field(j), "potential.E0");
}

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"radial2d.json", "oracles.json"}) {
    std::ifstream in(fs::path(BARRIER_CONFIG_DIR) / name);
    ASSERT_TRUE(in) << name;
    EXPECT_NO_THROW(parse_config(json::parse(in))) << name;
  }
}

TEST(Run, AsymptoticsOnlyWritesOneCsv) {
  const auto out = scratch("asymptotics");
  const auto r = run(oracle_config(), out);
  ASSERT_EQ(r.tasks.size(), 1u);
  EXPECT_EQ(r.tasks[0].status, TaskStatus::Ok);
  ASSERT_EQ(r.tasks[0].outputs.size(), 1u);
  EXPECT_EQ(fs::path(r.tasks[0].outputs[0]).extension(), ".csv");
  EXPECT_TRUE(r.all_ok());
  const json rep = json::parse(slurp(out / "report.json"));
  EXPECT_EQ(rep.at("tasks").at(0).at("status"), "ok");
  EXPECT_EQ(rep.at("outputs").size(), 1u);
  EXPECT_FALSE(rep.at("config_hash").get<std::string>().empty());
}

TEST(Run, AmplitudeWithoutTrappedIsSkipped) {
  const auto out = scratch("missing_dep");
  json j = radial_config();
  j["tasks"] = {"amplitude"};
  const auto r = run(j, out);
  ASSERT_EQ(r.tasks.size(), 1u);
  EXPECT_EQ(r.tasks[0].status, TaskStatus::Skipped);
  EXPECT_EQ(r.tasks[0].reason, "missing dependency: trapped");
  EXPECT_FALSE(r.all_ok());
}

TEST(Run, DependencyOrderAndCache) {
  const auto out = scratch("order");
  json j = radial_config();
  j["tasks"] = {"amplitude", "trapped"};
  const auto r = run(j, out);
  ASSERT_EQ(r.tasks.size(), 2u);
  EXPECT_EQ(r.tasks[0].name, "trapped");
  EXPECT_EQ(r.tasks[1].name, "amplitude");
  EXPECT_TRUE(r.all_ok());
  // A later run may reuse the trapped data left in the output directory.
  j["tasks"] = {"amplitude"};
  EXPECT_TRUE(run(j, out).all_ok());
}

TEST(Run, FailureDoesNotAbortIndependentTasks) {
  const auto out = scratch("partial");
  json j = radial_config();
  j["potential"] = {{"kind", "quadratic-local"}, {"E0", 0.5}, {"lambdas", {1.0, 2.0}}};
  j["tasks"] = {"cross-section", "verify-asymptotics"};
  j["asymptotics"] = {{"alpha", {1.0}}, {"beta", {0}}, {"lambdas", {1e3, 1e4}}};
  const auto r = run(j, out);
  ASSERT_EQ(r.tasks.size(), 2u);
  EXPECT_EQ(r.tasks[0].status, TaskStatus::Failed);
  EXPECT_FALSE(r.tasks[0].reason.empty());
  EXPECT_EQ(r.tasks[1].status, TaskStatus::Ok);
}

TEST(Run, RerunIsByteIdentical) {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  const auto ra = run(radial_config(), a);
  const auto rb = run(radial_config(), b);
  ASSERT_TRUE(ra.all_ok());
  ASSERT_TRUE(rb.all_ok());
  std::size_t files = 0;
  for (const auto& t : ra.tasks)
    for (const auto& f : t.outputs) {
      EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
      ++files;
    }
  EXPECT_GE(files, 5u);
  EXPECT_EQ(run(radial_config(), a).config_hash, ra.config_hash);
}

TEST(Run, SeventeenSignificantDigits) {
  const auto out = scratch("digits");
  run(oracle_config(), out);
  std::istringstream csv(slurp(out / "verify_asymptotics.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  const double v = std::stod(row.substr(row.rfind(',') + 1));
  std::ostringstream os;
  os.precision(17);
  os << v;
  EXPECT_EQ(std::stod(os.str()), v);
}

TEST(Run, TrappedJsonRoundTrip) {
  const auto out = scratch("trapped");
  json j = radial_config();
  j["tasks"] = {"trapped"};
  ASSERT_TRUE(run(j, out).all_ok());
  const json t = json::parse(slurp(out / "trapped.json"));
  for (const auto& side : {"incoming", "outgoing"})
    for (const auto& rec : t.at(side)) EXPECT_EQ(to_json(trapped_from_json(rec)), rec);
}
