#include "ndsp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ndsp/error.hpp"

namespace ndsp {

using nlohmann::json;

const std::vector<std::string> kTaskTypes = {
    "pressure",    "relationship", "local",        "measure-pressure",
    "distribution", "billingsley", "variational",  "generic",
    "nonwandering", "uniform-limit", "oracle-compare"};

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string stripComment(const std::string& line) {
  bool inString = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) inString = !inString;
    if (!inString && (c == '#' || c == ';')) return line.substr(0, i);
  }
  return line;
}

json* descend(json& root, const std::string& dotted, int lineNo) {
  json* node = &root;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    part = trim(part);
    if (part.empty()) throw ConfigError("line " + std::to_string(lineNo), "empty table name");
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    if (next.is_array()) {
      if (next.empty() || !next.back().is_object()) {
        throw ConfigError("line " + std::to_string(lineNo), "'" + part + "' is not a table");
      }
      node = &next.back();
    } else if (next.is_object()) {
      node = &next;
    } else {
      throw ConfigError("line " + std::to_string(lineNo), "'" + part + "' is not a table");
    }
  }
  return node;
}

template <class T>
T readAs(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field, "has the wrong type");
  }
}

std::vector<double> readDoubles(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "must be a list of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(field, "must be a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::size_t> readSizes(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "must be a list of positive integers");
  std::vector<std::size_t> out;
  for (const auto& e : j) {
    if (!e.is_number_integer() || e.get<long long>() < 1) {
      throw ConfigError(field, "must be a list of positive integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

std::size_t readSize(const json& j, const std::string& field, std::size_t minimum = 1) {
  if (!j.is_number_integer() || j.get<long long>() < static_cast<long long>(minimum)) {
    throw ConfigError(field, "must be an integer >= " + std::to_string(minimum));
  }
  return j.get<std::size_t>();
}

double readNumber(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "must be a number");
  return j.get<double>();
}

void checkAllowed(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return it.key() == a; })) {
      throw ConfigError(join(prefix, it.key()), "unknown key");
    }
  }
}

void checkHorizon(std::size_t n, const System& system, const std::string& field) {
  if (system.maxHorizon && n > *system.maxHorizon) {
    throw ConfigError(field, "n = " + std::to_string(n) + " exceeds the system horizon " +
                                 std::to_string(*system.maxHorizon));
  }
}

void checkAscending(const std::vector<std::size_t>& ns, const std::string& field) {
  if (ns.empty()) throw ConfigError(field, "must be nonempty");
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw ConfigError(field, "must be strictly ascending");
  }
}

Schedules parseSchedules(const json& j, const System& system) {
  const std::string prefix = "schedules";
  Schedules s;
  const std::size_t cap = system.maxHorizon.value_or(64);
  for (std::size_t n = 1; n <= std::min<std::size_t>(8, cap); ++n) s.n.push_back(n);
  s.Nmax = std::min<std::size_t>(12, cap);
  s.N = std::min<std::size_t>(4, s.Nmax);
  if (j.is_null()) return s;
  if (!j.is_object()) throw ConfigError(prefix, "must be a table");
  checkAllowed(j, {"epsSchedule", "nSchedule", "deltaSchedule", "N", "Nmax", "parts", "tol",
                   "chainTol"},
               prefix);
  if (j.contains("epsSchedule")) {
    const std::string f = join(prefix, "epsSchedule");
    s.eps = readDoubles(j["epsSchedule"], f);
    if (s.eps.empty()) throw ConfigError(f, "must be nonempty");
    for (std::size_t i = 0; i < s.eps.size(); ++i) {
      if (!(s.eps[i] > 0.0)) throw ConfigError(f, "entries must be positive");
      if (i > 0 && !(s.eps[i] < s.eps[i - 1])) throw ConfigError(f, "must be strictly descending");
    }
  }
  if (j.contains("nSchedule")) {
    const std::string f = join(prefix, "nSchedule");
    s.n = readSizes(j["nSchedule"], f);
    checkAscending(s.n, f);
  }
  checkHorizon(s.n.back(), system, join(prefix, "nSchedule"));
  if (j.contains("deltaSchedule")) {
    const std::string f = join(prefix, "deltaSchedule");
    s.delta = readDoubles(j["deltaSchedule"], f);
    if (s.delta.empty()) throw ConfigError(f, "must be nonempty");
    for (std::size_t i = 0; i < s.delta.size(); ++i) {
      if (!(s.delta[i] >= 0.0 && s.delta[i] < 1.0)) throw ConfigError(f, "entries must lie in [0, 1)");
      if (i > 0 && s.delta[i] > s.delta[i - 1]) throw ConfigError(f, "must be descending");
    }
  }
  if (j.contains("N")) s.N = readSize(j["N"], join(prefix, "N"));
  if (j.contains("Nmax")) s.Nmax = readSize(j["Nmax"], join(prefix, "Nmax"));
  if (s.N > s.Nmax) throw ConfigError(join(prefix, "N"), "must not exceed Nmax");
  checkHorizon(s.Nmax, system, join(prefix, "Nmax"));
  if (j.contains("parts")) s.parts = readSize(j["parts"], join(prefix, "parts"));
  if (j.contains("tol")) {
    s.tol = readNumber(j["tol"], join(prefix, "tol"));
    if (!(s.tol > 0.0)) throw ConfigError(join(prefix, "tol"), "must be positive");
  }
  if (j.contains("chainTol")) {
    s.chainTol = readNumber(j["chainTol"], join(prefix, "chainTol"));
    if (!(s.chainTol >= 0.0)) throw ConfigError(join(prefix, "chainTol"), "must be nonnegative");
  }
  return s;
}

std::size_t paramSize(const json& params, const char* key, std::size_t fallback,
                      const std::string& field) {
  return params.contains(key) ? readSize(params[key], join(field, key)) : fallback;
}

}  // namespace

json parseIniConfig(const std::string& text) {
  json root = json::object();
  json* table = &root;
  std::stringstream in(text);
  std::string raw;
  int lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    const std::string line = trim(stripComment(raw));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineNo);
    if (line.rfind("[[", 0) == 0) {
      if (line.size() < 4 || line.substr(line.size() - 2) != "]]") {
        throw ConfigError(where, "malformed array-table header");
      }
      const std::string name = trim(line.substr(2, line.size() - 4));
      const auto dot = name.rfind('.');
      json* parent = dot == std::string::npos ? &root : descend(root, name.substr(0, dot), lineNo);
      const std::string leaf = dot == std::string::npos ? name : trim(name.substr(dot + 1));
      json& arr = (*parent)[leaf];
      if (arr.is_null()) arr = json::array();
      if (!arr.is_array()) throw ConfigError(where, "'" + leaf + "' is not an array");
      arr.push_back(json::object());
      table = &arr.back();
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "malformed table header");
      table = descend(root, line.substr(1, line.size() - 2), lineNo);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where, "empty key");
    json parsed = json::parse(value, nullptr, false);
    (*table)[key] = parsed.is_discarded() ? json(value) : parsed;
  }
  return root;
}

json readConfigDocument(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string ext = path.extension().string();
  if (ext == ".ini" || ext == ".cfg" || ext == ".conf") return parseIniConfig(buf.str());
  json doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config", "'" + path.string() + "' is not valid JSON");
  return doc;
}

PointSet parseSubset(const json& entry, const System& system, const std::string& field) {
  const MetricSpace& space = system.metric();
  if (entry.is_null() || (entry.is_string() && entry.get<std::string>() == "all")) {
    return PointSet::all(space);
  }
  if (entry.is_array()) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < entry.size(); ++i) {
      const std::string f = field + "[" + std::to_string(i) + "]";
      if (!entry[i].is_number_integer() || entry[i].get<long long>() < 0 ||
          entry[i].get<unsigned long long>() >= space.size()) {
        throw ConfigError(f, "is not a valid point index");
      }
      pts.push_back(entry[i].get<Point>());
    }
    if (pts.empty()) throw ConfigError(field, "must select at least one point");
    return PointSet(space, std::move(pts));
  }
  if (entry.is_object() && entry.contains("prefix")) {
    checkAllowed(entry, {"prefix"}, field);
    if (system.family != "cyclic-shift") {
      throw ConfigError(join(field, "prefix"), "prefix selectors need a cyclic-shift system");
    }
    const auto& pre = entry["prefix"];
    if (!pre.is_array()) throw ConfigError(join(field, "prefix"), "must be a list of symbols");
    std::vector<std::size_t> symbols;
    for (const auto& s : pre) {
      if (!s.is_number_integer() || s.get<long long>() < 0 ||
          s.get<std::size_t>() >= system.alphabet) {
        throw ConfigError(join(field, "prefix"), "symbols must lie in the alphabet");
      }
      symbols.push_back(s.get<std::size_t>());
    }
    if (symbols.size() > system.wordLength) {
      throw ConfigError(join(field, "prefix"), "is longer than the word length");
    }
    return shiftCylinder(system, symbols);
  }
  throw ConfigError(field, "must be \"all\", a list of indices, or {\"prefix\": [...]}");
}

DiscreteMeasure parseMeasure(const json& entry, const System& system, const std::string& field) {
  const std::size_t P = system.metric().size();
  if (entry.is_string() && entry.get<std::string>() == "uniform") {
    return DiscreteMeasure::uniform(P);
  }
  if (!entry.is_object() || !entry.contains("type") || !entry["type"].is_string()) {
    throw ConfigError(field, "measure needs a \"type\"");
  }
  const std::string type = entry["type"].get<std::string>();
  try {
    if (type == "uniform") {
      checkAllowed(entry, {"type", "subset"}, field);
      if (entry.contains("subset")) {
        return DiscreteMeasure::uniformOn(parseSubset(entry["subset"], system, join(field, "subset")));
      }
      return DiscreteMeasure::uniform(P);
    }
    if (type == "dirac") {
      checkAllowed(entry, {"type", "point"}, field);
      if (!entry.contains("point")) throw ConfigError(join(field, "point"), "is required");
      const std::size_t x = readSize(entry["point"], join(field, "point"), 0);
      if (x >= P) throw ConfigError(join(field, "point"), "is not a valid point index");
      return DiscreteMeasure::dirac(P, static_cast<Point>(x));
    }
    if (type == "bernoulli") {
      checkAllowed(entry, {"type", "p"}, field);
      if (system.family != "cyclic-shift" || system.alphabet != 2) {
        throw ConfigError(join(field, "type"), "bernoulli measures need a binary cyclic shift");
      }
      const double p = entry.contains("p") ? readNumber(entry["p"], join(field, "p")) : 0.5;
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(join(field, "p"), "must lie in [0, 1]");
      return DiscreteMeasure::bernoulli(system, p);
    }
    if (type == "weights") {
      checkAllowed(entry, {"type", "weights"}, field);
      if (!entry.contains("weights")) throw ConfigError(join(field, "weights"), "is required");
      auto w = readDoubles(entry["weights"], join(field, "weights"));
      if (w.size() != P) {
        throw ConfigError(join(field, "weights"), "needs one weight per point (" + std::to_string(P) + ")");
      }
      return DiscreteMeasure(std::move(w), "weights");
    }
    if (type == "conditioned") {
      checkAllowed(entry, {"type", "base", "subset"}, field);
      if (!entry.contains("base")) throw ConfigError(join(field, "base"), "is required");
      const DiscreteMeasure base = parseMeasure(entry["base"], system, join(field, "base"));
      return DiscreteMeasure::conditioned(
          base, parseSubset(entry.value("subset", json("all")), system, join(field, "subset")));
    }
    if (type == "empirical") {
      checkAllowed(entry, {"type", "point", "n"}, field);
      const std::size_t x = readSize(entry.value("point", json(0)), join(field, "point"), 0);
      if (x >= P) throw ConfigError(join(field, "point"), "is not a valid point index");
      const std::size_t n = readSize(entry.value("n", json(1)), join(field, "n"));
      return empiricalMeasure(system.metric(), system.maps, static_cast<Point>(x), n);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(join(field, "type"), "unknown measure type '" + type + "'");
}

RunConfig parseRunConfig(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config", "top level must be a table");
  checkAllowed(doc, {"version", "system", "subsetK", "potential", "schedules", "measure", "oracle",
                     "tasks", "output"},
               "");
  if (!doc.contains("version")) throw ConfigError("version", "is required");
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kConfigVersion) {
    throw ConfigError("version", "unsupported config version (expected " +
                                     std::to_string(kConfigVersion) + ")");
  }
  if (!doc.contains("system")) throw ConfigError("system", "is required");
  RunConfig cfg;
  cfg.document = doc;
  try {
    cfg.system = std::make_shared<const System>(builtinSystem(doc["system"], "system"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("system", e.what());
  }
  const System& sys = *cfg.system;
  cfg.K = parseSubset(doc.value("subsetK", json("all")), sys, "subsetK");
  cfg.potential = doc.contains("potential") ? parsePotential(doc["potential"], sys, "potential")
                                            : sys.potential;
  cfg.schedules = parseSchedules(doc.value("schedules", json()), sys);
  if (doc.contains("measure")) {
    parseMeasure(doc["measure"], sys, "measure");
    cfg.measure = doc["measure"];
  }
  if (doc.contains("oracle")) {
    const auto& o = doc["oracle"];
    if (!o.is_object()) throw ConfigError("oracle", "must be a table");
    checkAllowed(o, {"maxPoints", "maxCandidates", "maxSubsets"}, "oracle");
    if (o.contains("maxPoints")) cfg.budget.maxPoints = readSize(o["maxPoints"], "oracle.maxPoints");
    if (o.contains("maxCandidates")) {
      cfg.budget.maxCandidates = readSize(o["maxCandidates"], "oracle.maxCandidates");
    }
    if (o.contains("maxSubsets")) {
      cfg.budget.maxSubsets = readSize(o["maxSubsets"], "oracle.maxSubsets");
    }
  }
  if (!doc.contains("tasks") || !doc["tasks"].is_array() || doc["tasks"].empty()) {
    throw ConfigError("tasks", "nothing to do: the task list is empty");
  }
  for (std::size_t i = 0; i < doc["tasks"].size(); ++i) {
    const std::string field = "tasks[" + std::to_string(i) + "]";
    const json& t = doc["tasks"][i];
    TaskSpec spec;
    spec.field = field;
    if (t.is_string()) {
      spec.type = t.get<std::string>();
      spec.params = json::object();
    } else if (t.is_object() && t.contains("type") && t["type"].is_string()) {
      spec.type = t["type"].get<std::string>();
      spec.params = t;
      spec.params.erase("type");
    } else {
      throw ConfigError(field, "task must be a name or a table with \"type\"");
    }
    if (std::find(kTaskTypes.begin(), kTaskTypes.end(), spec.type) == kTaskTypes.end()) {
      throw ConfigError(join(field, "type"), "unknown task '" + spec.type + "'");
    }
    cfg.tasks.push_back(std::move(spec));
  }
  if (doc.contains("output")) {
    const auto& o = doc["output"];
    if (!o.is_object()) throw ConfigError("output", "must be a table");
    checkAllowed(o, {"directory", "formats"}, "output");
    if (o.contains("directory")) {
      cfg.output.directory = readAs<std::string>(o["directory"], "output.directory");
    }
    if (o.contains("formats")) {
      const auto formats = readAs<std::vector<std::string>>(o["formats"], "output.formats");
      cfg.output.json = cfg.output.csv = false;
      for (const auto& f : formats) {
        if (f == "json") cfg.output.json = true;
        else if (f == "csv") cfg.output.csv = true;
        else throw ConfigError("output.formats", "unknown format '" + f + "'");
      }
    }
  }
  // Horizon checks for task-level schedules.
  for (const auto& t : cfg.tasks) {
    for (const char* key : {"nSchedule", "profileNs"}) {
      if (t.params.contains(key)) {
        const auto ns = readSizes(t.params[key], join(t.field, key));
        checkAscending(ns, join(t.field, key));
        checkHorizon(ns.back(), sys, join(t.field, key));
      }
    }
    for (const char* key : {"nMax", "Nmax", "N"}) {
      if (t.params.contains(key)) {
        checkHorizon(readSize(t.params[key], join(t.field, key)), sys, join(t.field, key));
      }
    }
  }
  return cfg;
}

RunConfig loadRunConfig(const std::filesystem::path& path) {
  return parseRunConfig(readConfigDocument(path));
}

std::size_t requiredHorizon(const RunConfig& config) {
  const Schedules& s = config.schedules;
  std::size_t h = std::max(s.n.back(), s.Nmax);
  for (const auto& t : config.tasks) {
    for (const char* key : {"nSchedule", "profileNs"}) {
      if (t.params.contains(key)) h = std::max(h, readSizes(t.params[key], join(t.field, key)).back());
    }
    h = std::max(h, paramSize(t.params, "nMax", 1, t.field));
    h = std::max(h, paramSize(t.params, "Nmax", 1, t.field));
  }
  return h;
}

}  // namespace ndsp
