#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ndsp/measure.hpp"
#include "ndsp/oracle.hpp"
#include "ndsp/systems.hpp"

namespace ndsp {

inline constexpr int kConfigVersion = 1;

struct Schedules {
  std::vector<double> eps{0.5};
  std::vector<std::size_t> n;
  std::vector<double> delta{0.1, 0.01, 0.0};
  std::size_t N = 4;
  std::size_t Nmax = 12;
  std::size_t parts = 4;
  double tol = 1e-8;
  double chainTol = 0.05;
};

struct TaskSpec {
  std::string type;
  nlohmann::json params;  // object; "type" removed
  std::string field;      // "tasks[i]"
};

struct OutputSpec {
  std::filesystem::path directory = "ndsp-out";
  bool json = true;
  bool csv = true;
};

struct RunConfig {
  nlohmann::json document;
  std::shared_ptr<const System> system;
  PointSet K;
  Potential potential = Potential::zero(1);
  Schedules schedules;
  std::optional<nlohmann::json> measure;  // default measure for measure tasks
  OracleBudget budget;
  std::vector<TaskSpec> tasks;
  OutputSpec output;
};

extern const std::vector<std::string> kTaskTypes;

/// Reads a config file; `.ini`, `.cfg` and `.conf` use the table encoding,
/// anything else is parsed as JSON.
nlohmann::json readConfigDocument(const std::filesystem::path& path);

/// Table encoding: `key = value` lines where values are JSON literals (bare
/// words become strings), `[a.b]` opens a nested table, `[[name]]` appends a
/// table to the array `name`. `#` and `;` start comments.
nlohmann::json parseIniConfig(const std::string& text);

/// Validates a config document. Throws ConfigError naming the field.
RunConfig parseRunConfig(const nlohmann::json& document);
RunConfig loadRunConfig(const std::filesystem::path& path);

/// Point selector: "all", a list of indices, or {"prefix": [...]} on shifts.
PointSet parseSubset(const nlohmann::json& entry, const System& system, const std::string& field);

/// Measure descriptor: "uniform", {"type": "dirac"|"bernoulli"|"weights"|
/// "uniform"|"conditioned"|"empirical", ...}.
DiscreteMeasure parseMeasure(const nlohmann::json& entry, const System& system,
                             const std::string& field);

/// Largest n any task of the config needs from the geometry.
std::size_t requiredHorizon(const RunConfig& config);

}  // namespace ndsp
