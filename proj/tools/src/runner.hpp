#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "barrier/manifolds.hpp"
#include "config.hpp"

namespace barrier::cli {

enum class TaskStatus { Ok, Failed, Skipped };

const char* status_name(TaskStatus s);

struct TaskRecord {
  std::string name;
  TaskStatus status = TaskStatus::Skipped;
  std::string reason;                ///< module error verbatim, or the skip reason
  std::vector<std::string> outputs;  ///< file names inside the output directory
  double seconds = 0.0;
  nlohmann::json checks;             ///< task-specific verification summary
};

struct RunReport {
  std::vector<TaskRecord> tasks;
  std::string config_hash;
  std::string version;
  int threads = 1;
  bool all_ok() const;
};

/// Worker count from BARRIER_THREADS (default 1).
int threads_from_env();

/// Runs `tasks` (in dependency order, whatever order they are listed in) and writes every
/// output plus report.json into the config's output directory.
RunReport run_tasks(const RunConfig& config, const std::vector<std::string>& tasks, const std::string& config_text,
                    int threads);

/// Loads, validates and runs the config's own task list.
RunReport run_config(const std::filesystem::path& path, const std::filesystem::path& out_override = {});

nlohmann::json to_json(const TrappedTrajectory& t);
TrappedTrajectory trapped_from_json(const nlohmann::json& j);

/// Writes through a temporary file and a rename, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace barrier::cli
