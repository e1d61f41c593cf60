#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ndsp/config.hpp"
#include "ndsp/error.hpp"
#include "ndsp/report.hpp"
#include "ndsp/tasks.hpp"
#include "ndsp/verify.hpp"

namespace {

using namespace ndsp;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kConfig = 1, kAssertion = 2, kCapacity = 3 };

void printOutcome(const RunOutcome& outcome) {
  for (const auto& r : outcome.results) {
    const char* tag = !r.assertionBearing ? "info" : (r.pass ? "pass" : "FAIL");
    std::printf("[%s] %s: %s\n", tag, r.name.c_str(), r.summary.c_str());
  }
}

int runConfigFile(const fs::path& path, bool oracleOnly) {
  RunConfig cfg = loadRunConfig(path);
  if (oracleOnly) {
    std::vector<TaskSpec> kept;
    for (auto& t : cfg.tasks) {
      if (t.type == "oracle-compare") kept.push_back(t);
    }
    if (kept.empty()) kept.push_back(TaskSpec{"oracle-compare", nlohmann::json::object(), "tasks[0]"});
    cfg.tasks = std::move(kept);
  }
  const RunOutcome outcome = executeRun(cfg);
  emitRun(outcome, cfg.output);
  printOutcome(outcome);
  return outcome.failed() ? kAssertion : kOk;
}

nlohmann::json systemDescriptor(const std::string& arg) {
  if (!arg.empty() && (arg.front() == '{' || arg.front() == '[')) return nlohmann::json::parse(arg);
  if (fs::is_regular_file(arg)) {
    nlohmann::json doc = readConfigDocument(arg);
    return doc.contains("system") ? doc["system"] : doc;
  }
  return nlohmann::json{{"family", arg}};
}

int describe(const std::string& arg) {
  const System sys = builtinSystem(systemDescriptor(arg));
  Json j;
  j["family"] = sys.family;
  j["descriptor"] = Json::parse(sys.descriptor.dump());
  j["points"] = sys.metric().size();
  j["diameter"] = sys.metric().diameter();
  j["maxHorizon"] = sys.maxHorizon ? Json(*sys.maxHorizon) : Json(nullptr);
  if (const auto& per = sys.maps.periodicity()) {
    j["mapPeriod"] = Json{{"preperiod", per->preperiod}, {"period", per->period}};
  }
  j["hasLimitMap"] = sys.limitMap.has_value();
  j["testFunctions"] = sys.testFunctions.size();
  double lo = 0.0, hi = 0.0;
  for (std::size_t x = 0; x < sys.metric().size(); ++x) {
    const double v = sys.potential(static_cast<Point>(x));
    lo = x == 0 ? v : std::min(lo, v);
    hi = x == 0 ? v : std::max(hi, v);
  }
  j["potentialRange"] = Json::array({lo, hi});
  std::cout << dumpJson(j);
  return kOk;
}

int verify(const fs::path& fixtures, const fs::path& out, const std::vector<int>& only) {
  VerifyOptions opts{fixtures, only};
  const auto results = runAcceptance(opts);
  bool all = true;
  for (const auto& r : results) {
    const bool inTime = r.limitSeconds <= 0.0 || r.seconds <= r.limitSeconds;
    const bool ok = r.pass && inTime;
    all = all && ok;
    std::printf("[%s] criterion %d: %s (%.2fs%s)\n", ok ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.seconds, inTime ? "" : ", over time limit");
  }
  if (!out.empty()) writeTextFile(out / "acceptance.json", dumpJson(acceptanceReport(results)));
  return all ? kOk : kAssertion;
}

int emitFixtures(const fs::path& out) {
  const auto instances = generateRelationshipInstances();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    char name[40];
    std::snprintf(name, sizeof name, "instance-%02zu.json", i + 1);
    writeTextFile(out / "relationship" / name, dumpJson(instances[i]));
  }
  std::printf("wrote %zu relationship instances under %s\n", instances.size(),
              (out / "relationship").string().c_str());
  return kOk;
}

bool seedRequested(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--seed") == 0 || std::strncmp(argv[i], "--seed=", 7) == 0) return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  if (seedRequested(argc, argv)) {
    std::fprintf(stderr, "error: --seed is reserved; every computation is deterministic\n");
    return kConfig;
  }

  CLI::App app{"Finite-scale pressure estimators for nonautonomous dynamical systems"};
  app.require_subcommand(1);

  std::string configPath;
  auto* run = app.add_subcommand("run", "Run the tasks of a config file");
  run->add_option("config", configPath, "JSON or INI config")->required();

  std::string compareConfig;
  auto* compare = app.add_subcommand("oracle-compare", "Compare greedy covers with the exact oracle");
  compare->add_option("config", compareConfig, "JSON or INI config")->required();

  std::string systemArg;
  auto* desc = app.add_subcommand("describe", "Print a summary of a system");
  desc->add_option("system", systemArg, "family name, JSON descriptor or config file")->required();

  std::string fixtureDir = NDSP_FIXTURE_DIR;
  std::string verifyOut;
  std::vector<int> only;
  auto* ver = app.add_subcommand("verify", "Run the acceptance suite");
  ver->add_option("--fixtures", fixtureDir, "fixture directory");
  ver->add_option("--out", verifyOut, "write acceptance.json here");
  ver->add_option("--only", only, "criterion ids")->check(CLI::Range(1, 11));

  std::string emitDir = "tests/fixtures";
  auto* emit = app.add_subcommand("emit-fixtures", "Regenerate the relationship instances");
  emit->add_option("--out", emitDir, "fixture directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return runConfigFile(configPath, false);
    if (*compare) return runConfigFile(compareConfig, true);
    if (*desc) return describe(systemArg);
    if (*ver) return verify(fixtureDir, verifyOut, only);
    if (*emit) return emitFixtures(emitDir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "oracle capacity exceeded: %s\n", e.what());
    return kCapacity;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kAssertion;
  }
  return kOk;
}
