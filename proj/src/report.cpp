#include "ndsp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ndsp {

std::string formatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dumpInto(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string closePad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        dumpInto(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += closePad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      out += "[";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? (indent > 0 ? ", " : ",") : ",";
        first = false;
        if (!flat) {
          out += nl;
          out += pad;
        }
        dumpInto(e, indent, depth + 1, out);
      }
      if (!flat) {
        out += nl;
        out += closePad;
      }
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? formatDouble(v) : "\"" + formatDouble(v) + "\"";
      return;
    }
    default:
      out += j.dump();
  }
}

Json number(double v) { return Json(v); }

Json pairJson(const std::optional<std::pair<double, double>>& p) {
  if (!p) return nullptr;
  return Json::array({p->first, p->second});
}

}  // namespace

std::string dumpJson(const Json& value, int indent) {
  std::string out;
  dumpInto(value, indent, 0, out);
  out += "\n";
  return out;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ",";
      out += cells[i];
    }
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void writeTextFile(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Json toJson(const PointSet& set) {
  Json arr = Json::array();
  for (Point x : set) arr.push_back(x);
  return arr;
}

Json toJson(const CoverSum& sum) {
  Json j;
  j["mode"] = toString(sum.mode);
  j["value"] = sum.value;
  j["logValue"] = sum.logValue;
  j["exact"] = sum.exact;
  Json w = Json::array();
  for (const auto& wi : sum.witnesses) {
    w.push_back(Json{{"center", wi.center}, {"n", wi.n}, {"logWeight", wi.logWeight},
                     {"piece", wi.piece}});
  }
  j["witnesses"] = std::move(w);
  return j;
}

Json toJson(const PressureEstimate& e) {
  Json j;
  j["kind"] = toString(e.kind);
  j["value"] = e.value;
  j["exact"] = e.exact;
  j["gapAllowance"] = e.gapAllowance;
  j["epsSchedule"] = e.epsSchedule;
  j["nSchedule"] = e.nSchedule;
  j["window"] = e.window ? Json::array({e.window->first, e.window->second}) : Json(nullptr);
  j["sBracket"] = pairJson(e.sBracket);
  j["perEps"] = e.perEps;
  Json rows = Json::array();
  for (const auto& r : e.perScaleTable) {
    rows.push_back(Json{{"eps", r.eps}, {"N", r.N}, {"raw", r.raw}, {"normalized", r.normalized},
                        {"exact", r.exact}});
  }
  j["perScaleTable"] = std::move(rows);
  j["algorithm"] = e.algorithm;
  return j;
}

Json toJson(const RelationshipReport& r) {
  Json j;
  j["pass"] = r.pass;
  Json values;
  values["classical"] = r.classical.value;
  values["classicalSpanning"] = r.classicalSpanning.value;
  values["pesin"] = r.pesin.value;
  values["packing"] = r.packing.value;
  values["capacityUpper"] = r.capacityUpper.value;
  values["capacityLower"] = r.capacityLower.value;
  j["values"] = std::move(values);
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back(Json{{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs},
                          {"tolerance", c.tolerance}, {"pass", c.pass}});
  }
  j["checks"] = std::move(checks);
  j["maxScaleGap"] = r.maxScaleGap;
  Json est;
  est["classical"] = toJson(r.classical);
  est["classicalSpanning"] = toJson(r.classicalSpanning);
  est["pesin"] = toJson(r.pesin);
  est["packing"] = toJson(r.packing);
  est["capacityUpper"] = toJson(r.capacityUpper);
  est["capacityLower"] = toJson(r.capacityLower);
  j["estimates"] = std::move(est);
  return j;
}

Json toJson(const LocalPressureProfile& p) {
  Json j;
  j["epsSchedule"] = p.epsSchedule;
  j["nSchedule"] = p.nSchedule;
  j["infiniteEntries"] = p.infiniteEntries;
  Json pts = Json::array();
  for (std::size_t i = 0; i < p.samplePoints.size(); ++i) {
    pts.push_back(Json{{"point", p.samplePoints[i]}, {"upper", number(p.upper[i])},
                       {"lower", number(p.lower[i])}});
  }
  j["points"] = std::move(pts);
  return j;
}

Json toJson(const SetIntegral& s) {
  return Json{{"value", s.value}, {"warnings", s.warnings}};
}

Json toJson(const MeasurePressureResult& r) {
  Json j;
  j["value"] = r.value;
  j["fullSupportValue"] = r.fullSupportValue;
  j["deltaSchedule"] = r.deltaSchedule;
  j["perDelta"] = r.perDelta;
  Json c = Json::array();
  for (const auto& m : r.candidates) {
    c.push_back(Json{{"delta", m.delta}, {"size", m.size}, {"mass", m.mass}, {"value", m.value},
                     {"fullSupport", m.fullSupport}});
  }
  j["candidates"] = std::move(c);
  return j;
}

Json toJson(const DistributionReport& r) {
  Json j;
  j["status"] = r.status;
  j["s"] = r.s;
  j["hypothesis1"] = r.hypothesis1;
  j["hypothesis2"] = r.hypothesis2;
  j["limitPositive"] = r.limitPositive;
  j["limsupTailStart"] = r.tailStart;
  if (r.witness) {
    j["witness"] = Json{{"center", r.witness->center}, {"n", r.witness->n},
                        {"eps", r.witness->eps}, {"mass", r.witness->mass},
                        {"bound", r.witness->bound}};
  } else {
    j["witness"] = nullptr;
  }
  j["pesin"] = r.pesin ? Json(*r.pesin) : Json(nullptr);
  j["tolerance"] = r.tolerance;
  j["conclusion"] = r.conclusion;
  return j;
}

Json toJson(const BillingsleyReport& r) {
  Json j;
  j["status"] = r.status;
  j["direction"] = r.direction == BillingsleyDirection::UpperLE ? "upperLE" : "lowerGE";
  j["s"] = r.s;
  j["hypothesis"] = r.hypothesis;
  j["massK"] = r.massK;
  j["witnesses"] = r.witnesses;
  j["packing"] = r.packing ? Json(*r.packing) : Json(nullptr);
  j["tolerance"] = r.tolerance;
  j["conclusion"] = r.conclusion;
  return j;
}

Json toJson(const VariationalReport& r) {
  Json j;
  j["pass"] = r.pass;
  j["packing"] = r.packing;
  j["precondition"] = r.precondition;
  j["supUpper"] = r.supUpper;
  j["argmaxUpper"] = r.entries.empty() ? "" : r.entries[r.argmaxUpper].name;
  j["supMeasurePacking"] = r.supMeasurePacking;
  j["argmaxMeasurePacking"] = r.entries.empty() ? "" : r.entries[r.argmaxMeasurePacking].name;
  j["gapUpper"] = r.gapUpper;
  j["gapMeasurePacking"] = r.gapMeasurePacking;
  j["tolerance"] = r.tolerance;
  Json e = Json::array();
  for (const auto& x : r.entries) {
    e.push_back(Json{{"measure", x.name}, {"upperOverSet", number(x.upperOverSet)},
                     {"measurePacking", x.measurePacking}});
  }
  j["family"] = std::move(e);
  return j;
}

Json toJson(const GenericBoundReport& r) {
  Json j;
  j["status"] = r.status;
  j["genericSize"] = r.genericSize;
  j["left"] = r.left;
  j["right"] = number(r.right);
  j["rightPerN"] = r.rightPerN;
  j["tolerance"] = r.tolerance;
  return j;
}

Json toJson(const UniformLimitReport& r) {
  Json j;
  j["pass"] = r.pass;
  j["tail"] = r.tail;
  j["tailDistances"] = r.tailDistances;
  j["sequenceDefect"] = r.sequenceDefect;
  j["limitDefect"] = r.limitDefect;
  j["bound"] = r.bound;
  return j;
}

CsvTable scaleCsv(const PressureEstimate& e) {
  CsvTable t;
  t.header = {"kind", "eps", "N", "raw", "normalized"};
  for (const auto& r : e.perScaleTable) {
    t.add({toString(e.kind), formatDouble(r.eps), std::to_string(r.N), formatDouble(r.raw),
           formatDouble(r.normalized)});
  }
  return t;
}

CsvTable profileCsv(const LocalPressureProfile& p) {
  CsvTable t;
  t.header = {"point", "eps", "n", "value"};
  for (std::size_t i = 0; i < p.samplePoints.size(); ++i) {
    for (std::size_t e = 0; e < p.epsSchedule.size(); ++e) {
      for (std::size_t k = 0; k < p.nSchedule.size(); ++k) {
        t.add({std::to_string(p.samplePoints[i]), formatDouble(p.epsSchedule[e]),
               std::to_string(p.nSchedule[k]), formatDouble(p.value(i, e, k))});
      }
    }
  }
  return t;
}

}  // namespace ndsp
