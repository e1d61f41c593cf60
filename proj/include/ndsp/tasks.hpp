#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ndsp/config.hpp"
#include "ndsp/report.hpp"

namespace ndsp {

struct TaskResult {
  std::string name;  // file stem, e.g. "02-relationship"
  std::string type;
  Json report;
  std::vector<std::pair<std::string, CsvTable>> tables;  // file suffix, table
  bool assertionBearing = false;
  bool pass = true;
  std::string summary;
};

struct RunOutcome {
  std::vector<TaskResult> results;
  bool failed() const;
};

/// Runs every task of the config in order. ConfigError, CapacityError and
/// InvalidArgument propagate (the latter rethrown as ConfigError naming the task).
RunOutcome executeRun(const RunConfig& config);

/// One JSON per task and one CSV per table, under output.directory.
void emitRun(const RunOutcome& outcome, const OutputSpec& output);

TaskResult runTask(const RunConfig& config, const CoverEngine& engine, const TaskSpec& task,
                   std::size_t index);

}  // namespace ndsp
