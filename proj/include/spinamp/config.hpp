#pragma once

// Run configuration: preset catalog, flat key=value files and command-line overrides.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spinamp/errors.hpp"
#include "spinamp/models.hpp"
#include "spinamp/parameters.hpp"

namespace spinamp {

enum class Artifact { traces_csv, summary_json, plots_svg };

inline std::string to_string(Artifact a) {
  switch (a) {
    case Artifact::traces_csv:
      return "traces_csv";
    case Artifact::summary_json:
      return "summary_json";
    case Artifact::plots_svg:
      return "plots_svg";
  }
  return "?";
}

using EmitSet = std::set<Artifact>;

inline EmitSet default_emit() { return {Artifact::traces_csv, Artifact::summary_json}; }

/// Comma list of artifact names; "" or "none" is the empty set, "all" every artifact.
inline EmitSet parse_emit(std::string_view text) {
  text = trim(text);
  if (text.empty() || text == "none") return {};
  if (text == "all") return {Artifact::traces_csv, Artifact::summary_json, Artifact::plots_svg};
  EmitSet out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    if (piece == "traces_csv") out.insert(Artifact::traces_csv);
    else if (piece == "summary_json") out.insert(Artifact::summary_json);
    else if (piece == "plots_svg") out.insert(Artifact::plots_svg);
    else throw ConfigError("unknown artifact '" + std::string(piece) + "' for key emit", "emit");
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string format_emit(const EmitSet& emit) {
  if (emit.empty()) return "none";
  std::string out;
  for (auto a : emit) {
    if (!out.empty()) out += ',';
    out += to_string(a);
  }
  return out;
}

// --- presets ----------------------------------------------------------------

struct Preset {
  std::string name;
  Geometry geometry;
  Interaction interaction;
  /// Neighbor range as a function of N.
  std::function<std::size_t(std::size_t)> range;
  std::string description;
};

/// Default neighbor range when none is given: all pairs of the chain / ring.
inline std::size_t default_range(Geometry g, std::size_t n) {
  switch (g) {
    case Geometry::chain_1d:
      return n > 1 ? n - 1 : 1;
    case Geometry::hub_2d:
      return n > 2 ? n - 2 : 1;
    case Geometry::ring_3d:
      return n > 2 ? (n - 1) / 2 : 1;
  }
  return 1;
}

inline const std::vector<Preset>& preset_catalog() {
  using G = Geometry;
  using I = Interaction;
  auto all = [](G g) { return [g](std::size_t n) { return default_range(g, n); }; };
  auto fixed = [](std::size_t m) { return [m](std::size_t) { return m; }; };
  static const std::vector<Preset> catalog = {
      {"1d-full", G::chain_1d, I::full_dipolar, all(G::chain_1d), "linear chain, full secular dipolar, all pairs"},
      {"1d-zz", G::chain_1d, I::zz_weak, all(G::chain_1d), "linear chain, ZZ couplings only, all pairs"},
      {"1d-eff-m1", G::chain_1d, I::effective, fixed(1), "linear chain, nearest-neighbor effective Hamiltonian"},
      {"1d-eff-m2", G::chain_1d, I::effective, fixed(2), "linear chain, next-nearest effective Hamiltonian"},
      {"2d-full", G::hub_2d, I::full_dipolar, all(G::hub_2d), "chain plus hub spin, full secular dipolar"},
      {"2d-zz", G::hub_2d, I::zz_weak, all(G::hub_2d), "chain plus hub spin, ZZ couplings only"},
      {"2d-eff", G::hub_2d, I::effective, fixed(1), "chain plus hub spin, effective Hamiltonian"},
      {"3d-full", G::ring_3d, I::full_dipolar, all(G::ring_3d), "ring plus hub spin, full secular dipolar"},
      {"3d-zz", G::ring_3d, I::zz_weak, all(G::ring_3d), "ring plus hub spin, ZZ couplings only"},
      {"3d-eff", G::ring_3d, I::effective, fixed(1), "ring plus hub spin, effective Hamiltonian"},
  };
  return catalog;
}

inline const Preset& find_preset(std::string_view name) {
  for (const auto& p : preset_catalog()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : preset_catalog()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")", "preset");
}

// --- run configuration ------------------------------------------------------

struct SweepAxis {
  std::string parameter;
  std::vector<double> values;
};

struct RunConfig {
  ModelSpec model;
  std::optional<std::string> preset;
  std::filesystem::path output_dir = "out";
  EmitSet emit = default_emit();
  std::optional<SweepAxis> sweep;
};

/// Ordered key=value entries from files and overrides; later entries win.
class ConfigBuilder {
 public:
  /// Reads `key = value` lines; '#' starts a comment.
  void add_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value", std::string(body));
      }
      add(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
    }
  }

  /// One "key=value" override.
  void add_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("override '" + std::string(assignment) + "' is not key=value", std::string(assignment));
    }
    add(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
  }

  void add(std::string key, std::string value) {
    if (key.empty()) throw ConfigError("empty configuration key", key);
    if (!is_model_key(key) && key != "preset" && key != "output_dir" && key != "emit" &&
        key != "sweep_param" && key != "sweep_values") {
      throw ConfigError("unknown configuration key '" + key + "'", key);
    }
    entries_.emplace_back(std::move(key), std::move(value));
  }

  const ParameterList& entries() const noexcept { return entries_; }

  /// Resolves preset first, then every model key in order; M defaults to the preset's
  /// range rule evaluated at the final N.
  RunConfig build() const {
    RunConfig cfg;
    std::optional<std::string> m_text;
    std::optional<std::string> sweep_param;
    std::optional<std::string> sweep_values;
    for (const auto& [k, v] : entries_) {
      if (k == "preset") cfg.preset = v;
    }
    const Preset* preset = cfg.preset ? &find_preset(*cfg.preset) : nullptr;
    if (preset) {
      cfg.model.geometry = preset->geometry;
      cfg.model.interaction = preset->interaction;
    }
    for (const auto& [k, v] : entries_) {
      if (k == "preset") continue;
      if (k == "output_dir") cfg.output_dir = v;
      else if (k == "emit") cfg.emit = parse_emit(v);
      else if (k == "sweep_param") sweep_param = v;
      else if (k == "sweep_values") sweep_values = v;
      else if (k == "M") m_text = v;
      else apply_parameter(cfg.model, k, v);
    }
    if (m_text) apply_parameter(cfg.model, "M", *m_text);
    else cfg.model.m = preset ? preset->range(cfg.model.n) : default_range(cfg.model.geometry, cfg.model.n);

    if (sweep_param || sweep_values) {
      if (!sweep_param) throw ConfigError("sweep_values given without sweep_param", "sweep_param");
      if (!sweep_values) throw ConfigError("sweep_param given without sweep_values", "sweep_values");
      cfg.sweep = SweepAxis{*sweep_param, parse_list(*sweep_values, "sweep_values")};
      validate_sweep(*cfg.sweep);
    }
    cfg.model.validate();
    return cfg;
  }

  static void validate_sweep(const SweepAxis& axis) {
    if (!is_model_key(axis.parameter)) {
      throw ConfigError("sweep parameter '" + axis.parameter + "' is not a model key", "sweep_param");
    }
    if (axis.values.empty()) throw ConfigError("sweep needs at least one value", "sweep_values");
    for (double v : axis.values) {
      if (!std::isfinite(v)) throw ConfigError("sweep values must be finite", "sweep_values");
    }
  }

 private:
  ParameterList entries_;
};

/// Spec for a preset at the default parameters.
inline ModelSpec preset_spec(std::string_view name) {
  ConfigBuilder b;
  b.add("preset", std::string(name));
  return b.build().model;
}

}  // namespace spinamp
