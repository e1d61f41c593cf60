#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "ndsp/measure.hpp"
#include "ndsp/pressure.hpp"

namespace ndsp {

using Json = nlohmann::ordered_json;

/// %.17g; non-finite values become "inf", "-inf" or "nan".
std::string formatDouble(double v);

/// Stable serialization: insertion-ordered keys, floats via formatDouble,
/// non-finite floats written as strings.
std::string dumpJson(const Json& value, int indent = 2);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

/// Writes `content` to `path`, creating parent directories. Throws
/// std::runtime_error naming the path on failure.
void writeTextFile(const std::filesystem::path& path, const std::string& content);

Json toJson(const PointSet& set);
Json toJson(const CoverSum& sum);
Json toJson(const PressureEstimate& estimate);
Json toJson(const RelationshipReport& report);
Json toJson(const LocalPressureProfile& profile);
Json toJson(const SetIntegral& integral);
Json toJson(const MeasurePressureResult& result);
Json toJson(const DistributionReport& report);
Json toJson(const BillingsleyReport& report);
Json toJson(const VariationalReport& report);
Json toJson(const GenericBoundReport& report);
Json toJson(const UniformLimitReport& report);

/// kind,eps,N,raw,normalized
CsvTable scaleCsv(const PressureEstimate& estimate);
/// point,eps,n,value
CsvTable profileCsv(const LocalPressureProfile& profile);

}  // namespace ndsp
