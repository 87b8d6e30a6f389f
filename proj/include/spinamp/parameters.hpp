#pragma once

// Flat key=value view of a ModelSpec, shared by config parsing and the parameter echo
// written into every output file.

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spinamp/errors.hpp"
#include "spinamp/models.hpp"

namespace spinamp {

using ParameterList = std::vector<std::pair<std::string, std::string>>;

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text, const std::string& key) {
  text = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("'" + std::string(text) + "' is not a finite number for key " + key, key);
  }
  return v;
}

inline std::size_t parse_count(std::string_view text, const std::string& key) {
  text = trim(text);
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("'" + std::string(text) + "' is not a non-negative integer for key " + key, key);
  }
  return v;
}

inline std::vector<double> parse_list(std::string_view text, const std::string& key) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    out.push_back(parse_double(piece, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename Enum>
Enum parse_enum(std::string_view text, const std::string& key) {
  const auto v = enum_from_string<Enum>(trim(text));
  if (!v) throw ConfigError("unknown value '" + std::string(trim(text)) + "' for key " + key, key);
  return *v;
}

inline HubProfile parse_hub_profile(std::string_view text, const std::string& key) {
  text = trim(text);
  if (text == "uniform") return HubProfile::uniform();
  if (text == "inverse_cube") return HubProfile::inverse_cube();
  auto values = parse_list(text, key);
  if (values.empty()) throw ConfigError("empty profile for key " + key, key);
  return HubProfile::explicit_values(std::move(values));
}

inline std::string format_hub_profile(const HubProfile& p) {
  switch (p.kind) {
    case HubProfile::Kind::uniform:
      return "uniform";
    case HubProfile::Kind::inverse_cube:
      return "inverse_cube";
    case HubProfile::Kind::explicit_values:
      return format_list(p.values);
  }
  return "?";
}

/// Every model key, in echo order.
inline const std::vector<std::string>& model_keys() {
  static const std::vector<std::string> keys = {
      "geometry",    "interaction", "N",         "M",          "omega1",     "s_initial", "d1",
      "g1",          "t_max",       "n_time_points", "rf_convention", "m2_transverse_factor", "ring_form",
      "ring_layout", "hub_f",       "hub_g",     "ring_r",     "ring_q",     "ring_q_hub"};
  return keys;
}

inline bool is_model_key(std::string_view key) {
  for (const auto& k : model_keys()) {
    if (k == key) return true;
  }
  return key == "D1";
}

/// Sets one field from its textual value; throws ConfigError naming the key.
inline void apply_parameter(ModelSpec& spec, const std::string& key, std::string_view value) {
  if (key == "geometry") spec.geometry = parse_enum<Geometry>(value, key);
  else if (key == "interaction") spec.interaction = parse_enum<Interaction>(value, key);
  else if (key == "N") spec.n = parse_count(value, key);
  else if (key == "M") spec.m = parse_count(value, key);
  else if (key == "omega1") spec.omega1 = parse_double(value, key);
  else if (key == "s_initial") spec.s_initial = parse_enum<SpinState>(value, key);
  else if (key == "d1" || key == "D1") spec.d1 = parse_double(value, key);
  else if (key == "g1") spec.g1 = parse_double(value, key);
  else if (key == "t_max") {
    if (trim(value) == "auto") spec.t_max.reset();
    else spec.t_max = parse_double(value, key);
  } else if (key == "n_time_points") spec.n_time_points = parse_count(value, key);
  else if (key == "rf_convention") spec.rf_convention = parse_enum<RfConvention>(value, key);
  else if (key == "m2_transverse_factor") spec.m2_transverse_factor = parse_enum<M2TransverseFactor>(value, key);
  else if (key == "ring_form") spec.ring_form = parse_enum<RingEffectiveForm>(value, key);
  else if (key == "ring_layout") spec.ring_layout = parse_enum<RingLayout>(value, key);
  else if (key == "hub_f") spec.hub_f = parse_hub_profile(value, key);
  else if (key == "hub_g") spec.hub_g = parse_hub_profile(value, key);
  else if (key == "ring_r") spec.ring_r = parse_list(value, key);
  else if (key == "ring_q") spec.ring_q = parse_list(value, key);
  else if (key == "ring_q_hub") {
    if (trim(value) == "auto") spec.ring_q_hub.reset();
    else spec.ring_q_hub = parse_double(value, key);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'", key);
  }
}

/// Full parameter set with defaults resolved (t_max as a number, empty lists as "auto").
inline ParameterList parameter_echo(const ModelSpec& spec) {
  ParameterList out;
  out.emplace_back("geometry", to_string(spec.geometry));
  out.emplace_back("interaction", to_string(spec.interaction));
  out.emplace_back("N", std::to_string(spec.n));
  out.emplace_back("M", std::to_string(spec.m));
  out.emplace_back("omega1", format_double(spec.omega1));
  out.emplace_back("s_initial", to_string(spec.s_initial));
  out.emplace_back("d1", format_double(spec.d1));
  out.emplace_back("g1", format_double(spec.g1));
  out.emplace_back("t_max", format_double(spec.resolved_t_max()));
  out.emplace_back("n_time_points", std::to_string(spec.n_time_points));
  out.emplace_back("rf_convention", to_string(spec.rf_convention));
  out.emplace_back("m2_transverse_factor", to_string(spec.m2_transverse_factor));
  out.emplace_back("ring_form", to_string(spec.ring_form));
  out.emplace_back("ring_layout", to_string(spec.ring_layout));
  out.emplace_back("hub_f", format_hub_profile(spec.hub_f));
  out.emplace_back("hub_g", format_hub_profile(spec.hub_g));
  out.emplace_back("ring_r", spec.ring_r.empty() ? "auto" : format_list(spec.ring_r));
  out.emplace_back("ring_q", spec.ring_q.empty() ? "auto" : format_list(spec.ring_q));
  out.emplace_back("ring_q_hub", spec.ring_q_hub ? format_double(*spec.ring_q_hub) : "auto");
  return out;
}

/// Inverse of parameter_echo; "auto" entries restore the defaults.
inline ModelSpec spec_from_parameters(const ParameterList& params) {
  ModelSpec spec;
  for (const auto& [key, value] : params) {
    if ((key == "ring_r" || key == "ring_q") && trim(value) == "auto") {
      (key == "ring_r" ? spec.ring_r : spec.ring_q).clear();
      continue;
    }
    apply_parameter(spec, key, value);
  }
  return spec;
}

}  // namespace spinamp
