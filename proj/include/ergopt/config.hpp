#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ergopt/common.hpp"
#include "ergopt/dynamics.hpp"
#include "ergopt/potentials.hpp"

namespace ergopt {

struct ConfigValue {
  enum class Kind { Num, Int, Str, List };
  Kind kind = Kind::Num;
  double num = 0.0;
  long long integer = 0;
  std::string str;
  std::vector<double> list;
};

// Parsed key=value document with a strict typed schema. Values are stored in
// canonical form, so hashes agree for equivalent spellings ("1.0" vs "1.00").
struct RunConfig {
  std::string command;
  std::map<std::string, ConfigValue> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  double num(const std::string& key) const;
  double num_or(const std::string& key, double fallback) const;
  long long integer(const std::string& key) const;
  long long int_or(const std::string& key, long long fallback) const;
  const std::string& str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  const std::vector<double>& list(const std::string& key) const;

  void set_num(const std::string& key, double v);
  void set_int(const std::string& key, long long v);

  std::string canonical() const;
  std::uint64_t config_hash() const { return fnv1a(canonical()); }
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

MapSpec make_map(const RunConfig& cfg);
Potential make_potential(const RunConfig& cfg, const MapSpec& m);
GridFn load_grid_csv(const std::string& path, Metric metric);

}  // namespace ergopt
