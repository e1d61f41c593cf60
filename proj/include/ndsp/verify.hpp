#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ndsp/report.hpp"

namespace ndsp {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  Json detail;
  double seconds = 0.0;  // wall time; never serialized
  double limitSeconds = 0.0;
};

struct VerifyOptions {
  std::filesystem::path fixtureDir;
  /// Criteria to run (1..11); empty runs all.
  std::vector<int> only;
};

/// Runs the acceptance criteria. Criterion 11 reruns 1..10 with 8 workers
/// and compares the serialized reports with the first pass at 1 worker.
std::vector<CriterionResult> runAcceptance(const VerifyOptions& options);

/// {"criteria": [{id, title, pass, detail}], "pass": ...}; no timings.
Json acceptanceReport(const std::vector<CriterionResult>& results);

/// The committed relationship instances, generated from fixed seeds.
std::vector<Json> generateRelationshipInstances();
std::vector<Json> loadRelationshipInstances(const std::filesystem::path& fixtureDir);

}  // namespace ndsp
