#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "d2dtdd/scenario.hpp"

namespace d2dtdd {

class ScenarioParseError : public std::runtime_error {
 public:
  explicit ScenarioParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key, const std::string& context) {
  if (!obj.is_object() || !obj.contains(key))
    throw ScenarioParseError("scenario parse error: " + context + ": missing field '" + key + "'");
  return obj.at(key);
}

inline double require_number(const nlohmann::json& obj, const char* key, const std::string& context) {
  const nlohmann::json& v = require_field(obj, key, context);
  if (!v.is_number())
    throw ScenarioParseError("scenario parse error: " + context + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline Vec2 require_vec2(const nlohmann::json& obj, const char* key, const std::string& context) {
  const nlohmann::json& v = require_field(obj, key, context);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ScenarioParseError("scenario parse error: " + context + ": field '" + key + "' must be [x, y]");
  return Vec2{v[0].get<double>(), v[1].get<double>()};
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const CellScenario& s) {
  nlohmann::json j;
  j["params"] = {
      {"bandwidth_W", s.params.bandwidth_w},
      {"noise_density", s.params.noise_density_dbm},
      {"pathloss_exponent", s.params.pathloss_exponent},
      {"ref_gain_G0", s.params.ref_gain},
      {"p_max_bs", s.params.p_max_bs_w},
      {"p_max_ue", s.params.p_max_ue_w},
      {"frame_T", s.params.frame_t_s},
      {"cell_radius", s.params.cell_radius_m},
      {"carrier", s.params.carrier},
  };
  j["bs"] = {s.bs.x, s.bs.y};
  nlohmann::json pairs = nlohmann::json::array();
  for (const UserPair& p : s.pairs) {
    pairs.push_back({{"id", p.id}, {"tx", {p.tx.x, p.tx.y}}, {"rx", {p.rx.x, p.rx.y}}, {"b", p.demand}});
  }
  j["pairs"] = std::move(pairs);
  j["seed"] = s.seed;
  return j;
}

inline CellScenario scenario_from_json(const nlohmann::json& j) {
  CellScenario s;
  const nlohmann::json& params = detail::require_field(j, "params", "document");
  s.params.bandwidth_w = detail::require_number(params, "bandwidth_W", "params");
  s.params.noise_density_dbm = detail::require_number(params, "noise_density", "params");
  s.params.pathloss_exponent = detail::require_number(params, "pathloss_exponent", "params");
  s.params.ref_gain = detail::require_number(params, "ref_gain_G0", "params");
  s.params.p_max_bs_w = detail::require_number(params, "p_max_bs", "params");
  s.params.p_max_ue_w = detail::require_number(params, "p_max_ue", "params");
  s.params.frame_t_s = detail::require_number(params, "frame_T", "params");
  s.params.cell_radius_m = detail::require_number(params, "cell_radius", "params");
  if (params.contains("carrier")) s.params.carrier = params.at("carrier").get<std::string>();

  s.bs = detail::require_vec2(j, "bs", "document");

  const nlohmann::json& pairs = detail::require_field(j, "pairs", "document");
  if (!pairs.is_array()) throw ScenarioParseError("scenario parse error: 'pairs' must be an array");
  int idx = 0;
  for (const nlohmann::json& pj : pairs) {
    const std::string ctx = "pairs[" + std::to_string(idx) + "]";
    UserPair p;
    p.id = static_cast<int>(detail::require_number(pj, "id", ctx));
    p.tx = detail::require_vec2(pj, "tx", ctx);
    p.rx = detail::require_vec2(pj, "rx", ctx);
    p.demand = detail::require_number(pj, "b", ctx);
    s.pairs.push_back(p);
    ++idx;
  }
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();

  validate_scenario(s);
  return s;
}

inline void save_scenario(const CellScenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << scenario_to_json(s).dump(2) << '\n';
}

inline CellScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioParseError(std::string("scenario parse error in '") + path + "': " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace d2dtdd
