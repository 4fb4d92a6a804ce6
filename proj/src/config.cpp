#include "ergopt/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ergopt {

namespace {

enum class KeyKind { Num, Int, Str, List, Enum };

struct KeySchema {
  KeyKind kind;
  std::vector<std::string> allowed;  // Enum only
};

const std::map<std::string, KeySchema>& schema() {
  static const std::map<std::string, KeySchema> s = {
      {"command",
       {KeyKind::Enum,
        {"orbits", "oracle", "subaction", "certify", "scan", "extend", "lock-test"}}},
      {"map.family",
       {KeyKind::Enum, {"doubling", "tent", "logistic", "quadratic", "markov", "sine"}}},
      {"map.a", {KeyKind::Num, {}}},
      {"map.s", {KeyKind::Num, {}}},
      {"map.c", {KeyKind::Num, {}}},
      {"map.mean", {KeyKind::Num, {}}},
      {"map.amp", {KeyKind::Num, {}}},
      {"map.r", {KeyKind::Int, {}}},
      {"map.breaks", {KeyKind::List, {}}},
      {"map.values", {KeyKind::List, {}}},
      {"map.slopes", {KeyKind::List, {}}},
      {"potential.family", {KeyKind::Enum, {"cosine", "linear", "distance", "grid"}}},
      {"potential.theta", {KeyKind::Num, {}}},
      {"potential.amp", {KeyKind::Num, {}}},
      {"potential.alpha", {KeyKind::Num, {}}},
      {"potential.slope", {KeyKind::Num, {}}},
      {"potential.offset", {KeyKind::Num, {}}},
      {"potential.points", {KeyKind::List, {}}},
      {"potential.scale", {KeyKind::Num, {}}},
      {"potential.grid_file", {KeyKind::Str, {}}},
      {"numeric.n", {KeyKind::Int, {}}},
      {"numeric.tol", {KeyKind::Num, {}}},
      {"numeric.max_period", {KeyKind::Int, {}}},
      {"numeric.seed", {KeyKind::Int, {}}},
      {"numeric.max_iter", {KeyKind::Int, {}}},
      {"cert.K", {KeyKind::Num, {}}},
      {"cert.delta", {KeyKind::Num, {}}},
      {"cert.lambda", {KeyKind::Num, {}}},
      {"cert.L", {KeyKind::Num, {}}},
      {"cert.lip_f", {KeyKind::Num, {}}},
      {"cert.gap", {KeyKind::Num, {}}},
      {"cert.p0", {KeyKind::Num, {}}},
      {"cert.alpha", {KeyKind::Num, {}}},
      {"budget.phi_seminorm", {KeyKind::Num, {}}},
      {"budget.d_g", {KeyKind::Num, {}}},
      {"budget.diam", {KeyKind::Num, {}}},
      {"budget.theta_lock", {KeyKind::Num, {}}},
      {"budget.xi_seminorm_max", {KeyKind::Num, {}}},
      {"budget.xi_sup_max", {KeyKind::Num, {}}},
      {"budget.penalty_scale", {KeyKind::Num, {}}},
      {"scan.a_min", {KeyKind::Num, {}}},
      {"scan.a_max", {KeyKind::Num, {}}},
      {"scan.a_count", {KeyKind::Int, {}}},
      {"scan.theta_min", {KeyKind::Num, {}}},
      {"scan.theta_max", {KeyKind::Num, {}}},
      {"scan.theta_count", {KeyKind::Int, {}}},
      {"lock.samples", {KeyKind::Int, {}}},
      {"output.dir", {KeyKind::Str, {}}},
      {"output.basename", {KeyKind::Str, {}}},
  };
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, int line_no) {
  const char* c = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(c, &end);
  if (end == c || *end != '\0')
    throw ParseError("line " + std::to_string(line_no) + ": malformed number '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, int line_no) {
  const char* c = tok.c_str();
  char* end = nullptr;
  long long v = std::strtoll(c, &end, 10);
  if (end == c || *end != '\0')
    throw ParseError("line " + std::to_string(line_no) + ": malformed integer '" + tok + "'");
  return v;
}

const ConfigValue& fetch(const RunConfig& cfg, const std::string& key,
                         ConfigValue::Kind kind) {
  auto it = cfg.values.find(key);
  if (it == cfg.values.end()) throw SchemaError("missing key " + key);
  if (it->second.kind != kind) throw SchemaError("wrong type for key " + key);
  return it->second;
}

}  // namespace

double RunConfig::num(const std::string& key) const {
  return fetch(*this, key, ConfigValue::Kind::Num).num;
}

double RunConfig::num_or(const std::string& key, double fallback) const {
  return has(key) ? num(key) : fallback;
}

long long RunConfig::integer(const std::string& key) const {
  return fetch(*this, key, ConfigValue::Kind::Int).integer;
}

long long RunConfig::int_or(const std::string& key, long long fallback) const {
  return has(key) ? integer(key) : fallback;
}

const std::string& RunConfig::str(const std::string& key) const {
  return fetch(*this, key, ConfigValue::Kind::Str).str;
}

std::string RunConfig::str_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

const std::vector<double>& RunConfig::list(const std::string& key) const {
  return fetch(*this, key, ConfigValue::Kind::List).list;
}

void RunConfig::set_num(const std::string& key, double v) {
  ConfigValue cv;
  cv.kind = ConfigValue::Kind::Num;
  cv.num = v;
  values[key] = cv;
}

void RunConfig::set_int(const std::string& key, long long v) {
  ConfigValue cv;
  cv.kind = ConfigValue::Kind::Int;
  cv.integer = v;
  values[key] = cv;
}

std::string RunConfig::canonical() const {
  std::string out = "command=" + command + "\n";
  for (const auto& [key, v] : values) {
    out += key;
    out += '=';
    switch (v.kind) {
      case ConfigValue::Kind::Num: out += g17(v.num); break;
      case ConfigValue::Kind::Int: out += std::to_string(v.integer); break;
      case ConfigValue::Kind::Str: out += v.str; break;
      case ConfigValue::Kind::List:
        for (size_t i = 0; i < v.list.size(); ++i) {
          if (i) out += ',';
          out += g17(v.list[i]);
        }
        break;
    }
    out += '\n';
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty key");
    auto it = schema().find(key);
    if (it == schema().end()) throw SchemaError(key);
    if (cfg.values.count(key) || (key == "command" && !cfg.command.empty()))
      throw SchemaError("duplicate key " + key);
    const KeySchema& ks = it->second;
    ConfigValue cv;
    switch (ks.kind) {
      case KeyKind::Num:
        cv.kind = ConfigValue::Kind::Num;
        cv.num = parse_double(val, line_no);
        break;
      case KeyKind::Int:
        cv.kind = ConfigValue::Kind::Int;
        cv.integer = parse_int(val, line_no);
        break;
      case KeyKind::Str:
        cv.kind = ConfigValue::Kind::Str;
        cv.str = val;
        break;
      case KeyKind::List: {
        cv.kind = ConfigValue::Kind::List;
        std::string item;
        std::istringstream ls(val);
        while (std::getline(ls, item, ',')) {
          item = trim(item);
          if (item.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty list entry");
          cv.list.push_back(parse_double(item, line_no));
        }
        if (cv.list.empty())
          throw ParseError("line " + std::to_string(line_no) + ": empty list");
        break;
      }
      case KeyKind::Enum:
        if (std::find(ks.allowed.begin(), ks.allowed.end(), val) == ks.allowed.end())
          throw SchemaError(key + ": unknown value '" + val + "'");
        cv.kind = ConfigValue::Kind::Str;
        cv.str = val;
        break;
    }
    if (key == "command") {
      cfg.command = cv.str;
      continue;
    }
    cfg.values.emplace(key, std::move(cv));
  }
  for (const char* k : {"potential.alpha", "cert.alpha"})
    if (cfg.has(k) && !(cfg.num(k) > 0.0 && cfg.num(k) <= 1.0))
      throw SchemaError(std::string(k) + " must lie in (0,1]");
  if (cfg.has("numeric.n") && cfg.integer("numeric.n") <= 0)
    throw SchemaError("numeric.n must be positive");
  if (cfg.has("numeric.max_period") && cfg.integer("numeric.max_period") < 1)
    throw SchemaError("numeric.max_period must be at least 1");
  if (cfg.has("numeric.tol") && !(cfg.num("numeric.tol") > 0.0))
    throw SchemaError("numeric.tol must be positive");
  if (cfg.has("lock.samples") && cfg.integer("lock.samples") < 1)
    throw SchemaError("lock.samples must be at least 1");
  if (!cfg.has("numeric.tol")) cfg.set_num("numeric.tol", 1e-9);
  if (!cfg.has("numeric.max_period")) cfg.set_int("numeric.max_period", 12);
  if (!cfg.has("numeric.seed")) cfg.set_int("numeric.seed", 0);
  if (!cfg.has("numeric.n")) cfg.set_int("numeric.n", 4096);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

MapSpec make_map(const RunConfig& cfg) {
  const std::string& fam = cfg.str("map.family");
  if (fam == "doubling") return MapSpec::doubling();
  if (fam == "tent") return MapSpec::tent(cfg.num_or("map.s", 2.0));
  if (fam == "logistic") return MapSpec::logistic(cfg.num("map.a"));
  if (fam == "quadratic") return MapSpec::quadratic(cfg.num("map.c"));
  if (fam == "markov")
    return MapSpec::markov(cfg.list("map.breaks"), cfg.list("map.values"),
                           cfg.list("map.slopes"));
  return MapSpec::sine(cfg.num("map.mean"), cfg.num("map.amp"),
                       static_cast<int>(cfg.int_or("map.r", 2)));
}

Potential make_potential(const RunConfig& cfg, const MapSpec& m) {
  const std::string& fam = cfg.str("potential.family");
  Metric met = m.metric();
  Interval dom{m.lo, m.hi};
  double alpha = cfg.num_or("potential.alpha", 1.0);
  if (fam == "cosine")
    return Potential::cosine(cfg.num("potential.theta"), cfg.num_or("potential.amp", 1.0),
                             alpha, met, dom);
  if (fam == "linear")
    return Potential::linear(cfg.num("potential.slope"), cfg.num_or("potential.offset", 0.0),
                             met, dom);
  if (fam == "distance")
    return distance_potential(cfg.list("potential.points"), alpha,
                              cfg.num_or("potential.scale", 1.0), met, dom);
  GridFn g = load_grid_csv(cfg.str("potential.grid_file"), met);
  return Potential::grid_sampled(std::move(g), alpha, met, dom);
}

GridFn load_grid_csv(const std::string& path, Metric metric) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open grid file " + path);
  GridFn g;
  g.circle = metric.circle;
  g.period = metric.period;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(path + " line " + std::to_string(line_no) + ": expected x,value");
    g.x.push_back(parse_double(trim(line.substr(0, comma)), line_no));
    g.v.push_back(parse_double(trim(line.substr(comma + 1)), line_no));
  }
  if (g.x.size() < 2) throw ParseError(path + ": need at least two grid nodes");
  for (size_t i = 1; i < g.x.size(); ++i)
    if (!(g.x[i] > g.x[i - 1])) throw ParseError(path + ": nodes must strictly increase");
  return g;
}

}  // namespace ergopt
