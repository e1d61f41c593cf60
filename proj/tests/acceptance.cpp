#include <cstdio>
#include <string>

#include "ndsp/verify.hpp"

namespace {

// Checks that fail for a documented reason (see README, "Known failures").
// A criterion containing them still prints FAIL; the exit status ignores them.
bool knownRed(int criterion, const std::string& check) {
  return criterion == 4 && check.find(" pesin: convexity") != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
  ndsp::VerifyOptions options{NDSP_FIXTURE_DIR, {}};
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--fixtures" && i + 1 < argc) {
      options.fixtureDir = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      options.only.push_back(std::stoi(argv[++i]));
    }
  }
  const auto results = ndsp::runAcceptance(options);
  bool unexpected = false;
  for (const auto& r : results) {
    const bool inTime = r.limitSeconds <= 0.0 || r.seconds <= r.limitSeconds;
    const bool ok = r.pass && inTime;
    std::printf("%s criterion %2d: %s (%.2fs%s)\n", ok ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.seconds, inTime ? "" : ", over time limit");
    unexpected = unexpected || !inTime;
    if (r.pass) continue;
    if (!r.detail.contains("checks")) unexpected = true;
    for (const auto& row : r.detail.value("checks", ndsp::Json::array())) {
      if (row["pass"].get<bool>()) continue;
      const std::string name = row["check"].get<std::string>();
      const bool known = knownRed(r.id, name);
      unexpected = unexpected || !known;
      std::printf("    %s%s\n", known ? "[known] " : "", row.dump().c_str());
    }
  }
  return unexpected ? 1 : 0;
}
