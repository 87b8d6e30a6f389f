#pragma once

// Figures of merit from a pair of polarization traces: amplification alpha,
// exposure T, contrast C and both effectiveness ratios.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinamp/dynamics.hpp"
#include "spinamp/errors.hpp"
#include "spinamp/models.hpp"
#include "spinamp/parameters.hpp"

namespace spinamp {

/// max |Delta P| below this marks a run as flat.
inline constexpr double kFlatThreshold = 1e-6;
/// Largest contrast the normalization allows in principle.
inline constexpr double kMaxContrast = 2.0;

struct Amplification {
  double alpha = 0.0;
  /// Grid time of the extremum, in units of 1/omega1.
  double exposure_t = 0.0;
  /// Three-point parabolic estimate of the same extremum.
  double exposure_t_refined = 0.0;
  std::size_t index = 0;
  double max_abs_delta_p = 0.0;
  bool degenerate = false;
};

/// Vertex abscissa of the parabola through (i-1, i, i+1); falls back to x[i] at the edges.
inline double parabolic_peak(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  if (i == 0 || i + 1 >= y.size()) return x[i];
  const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom == 0.0) return x[i];
  const double shift = 0.5 * (y0 - y2) / denom;  // in grid steps, within [-1/2, 1/2] at a true peak
  const double h = shift >= 0.0 ? x[i + 1] - x[i] : x[i] - x[i - 1];
  return x[i] + shift * h;
}

inline Amplification amplification(const PolarizationTrace& trace_down) {
  if (trace_down.size() == 0) throw ArgumentError("empty trace");
  Amplification out;
  std::vector<double> mag(trace_down.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(trace_down.delta_p[i]);
  // std::max_element returns the first of equal maxima: ties go to the earliest time.
  out.index = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
  out.max_abs_delta_p = mag[out.index];
  out.alpha = 0.5 * out.max_abs_delta_p;
  out.exposure_t = trace_down.times_omega1[out.index];
  out.exposure_t_refined = parabolic_peak(trace_down.times_omega1, mag, out.index);
  out.degenerate = out.max_abs_delta_p < kFlatThreshold;
  return out;
}

struct Contrast {
  double contrast = 0.0;
  /// Normalizer: total Z of all N+1 spins at t = 0 in the S-down run.
  double mz0 = 0.0;
  double mz0_up = 0.0;
  double time_omega1 = 0.0;
  std::size_t index = 0;
  bool degenerate = false;
};

/// C = max_t |dM_down(t) - dM_up(t)| / |M_down(0)|, with dM the change of the all-spin
/// total Z since t = 0, maximized jointly on the shared grid.
inline Contrast contrast(const PolarizationTrace& trace_down, const PolarizationTrace& trace_up) {
  if (trace_down.times != trace_up.times) throw ArgumentError("contrast needs traces on the same time grid");
  if (trace_down.per_spin.rows() != trace_up.per_spin.rows()) {
    throw ArgumentError("contrast needs traces of the same model size");
  }
  if (trace_down.size() == 0) throw ArgumentError("empty trace");
  Contrast out;
  out.mz0 = trace_down.total_z.front();
  out.mz0_up = trace_up.total_z.front();
  if (std::abs(out.mz0) < 1e-9) throw NumericalError("initial magnetization is zero; contrast is undefined");
  double best = -1.0;
  for (std::size_t i = 0; i < trace_down.size(); ++i) {
    const double d = std::abs((trace_down.total_z[i] - out.mz0) - (trace_up.total_z[i] - out.mz0_up));
    if (d > best) {
      best = d;
      out.index = i;
    }
  }
  out.contrast = best / std::abs(out.mz0);
  out.time_omega1 = trace_down.times_omega1[out.index];
  out.degenerate = best < kFlatThreshold;
  return out;
}

struct Effectiveness {
  double eta_text = 0.0;
  double eta_table = 0.0;
};

/// eta_text = C/T, eta_table = alpha/T.  A flat run (alpha = C = 0 at T = 0) gives zeros.
inline Effectiveness effectiveness(double alpha, double contrast_value, double exposure_t) {
  if (exposure_t > 0.0) return {contrast_value / exposure_t, alpha / exposure_t};
  if (alpha == 0.0 && contrast_value == 0.0) return {};
  throw ArgumentError("exposure time must be positive, got " + format_double(exposure_t));
}

struct MetricsSummary {
  double alpha = 0.0;
  double exposure_t = 0.0;
  double exposure_t_refined = 0.0;
  double eta_text = 0.0;
  double eta_table = 0.0;
  double contrast = 0.0;
  double contrast_time = 0.0;
  double mz0 = 0.0;
  double mz0_up = 0.0;
  /// Largest polarization change of any spin in the S-up run.
  double up_run_max_change = 0.0;
  bool degenerate = false;
  std::vector<std::string> warnings;

  std::optional<double> t_c;
  ParameterList parameters;
  std::vector<std::string> assumptions;
  std::vector<std::string> conventions;

  bool operator==(const MetricsSummary&) const = default;
};

inline std::vector<std::string> metric_conventions() {
  return {
      "alpha = max_t |Delta P(t)| / 2, Delta P over I spins only, from the S-down run",
      "T = omega1 * (grid time of the alpha extremum), earliest time on ties",
      "C = max_t |dM_down(t) - dM_up(t)| / |M_down(0)|, M over all N+1 spins, dM = M(t) - M(0)",
      "eta_table = alpha / T, eta_text = C / T",
  };
}

inline MetricsSummary summarize(const ModelSpec& spec, const PolarizationTrace& trace_down,
                                const PolarizationTrace& trace_up, std::optional<double> t_c = std::nullopt) {
  const auto amp = amplification(trace_down);
  const auto con = contrast(trace_down, trace_up);
  const auto eff = effectiveness(amp.alpha, con.contrast, amp.exposure_t);

  MetricsSummary s;
  s.alpha = amp.alpha;
  s.exposure_t = amp.exposure_t;
  s.exposure_t_refined = amp.exposure_t_refined;
  s.eta_text = eff.eta_text;
  s.eta_table = eff.eta_table;
  s.contrast = con.contrast;
  s.contrast_time = con.time_omega1;
  s.mz0 = con.mz0;
  s.mz0_up = con.mz0_up;
  s.up_run_max_change = trace_up.max_polarization_change();
  s.degenerate = amp.degenerate;
  s.t_c = t_c;

  if (amp.degenerate) s.warnings.push_back("degenerate run: max |Delta P| below 1e-6");
  if (con.contrast > kMaxContrast) {
    s.warnings.push_back("contrast " + format_double(con.contrast) + " exceeds the theoretical maximum 2");
  }
  if (!amp.degenerate && amp.exposure_t > 0.0 &&
      std::abs(amp.exposure_t_refined - amp.exposure_t) > 0.01 * amp.exposure_t) {
    s.warnings.push_back("parabolic refinement moves T by more than 1%; grid too coarse");
  }
  if (amp.index + 1 == trace_down.size() && !amp.degenerate) {
    s.warnings.push_back("extremum at the last grid point; t_max may be too short");
  }

  s.parameters = parameter_echo(spec);
  s.assumptions = model_assumptions(spec);
  s.conventions = metric_conventions();
  return s;
}

inline void to_json(nlohmann::json& j, const MetricsSummary& s) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [k, v] : s.parameters) params.push_back({k, v});
  j = nlohmann::json{{"alpha", s.alpha},
                     {"exposure_t", s.exposure_t},
                     {"exposure_t_refined", s.exposure_t_refined},
                     {"eta_text", s.eta_text},
                     {"eta_table", s.eta_table},
                     {"contrast", s.contrast},
                     {"contrast_time", s.contrast_time},
                     {"mz0", s.mz0},
                     {"mz0_up", s.mz0_up},
                     {"up_run_max_change", s.up_run_max_change},
                     {"degenerate", s.degenerate},
                     {"warnings", s.warnings},
                     {"t_c", s.t_c ? nlohmann::json(*s.t_c) : nlohmann::json(nullptr)},
                     {"parameters", params},
                     {"assumptions", s.assumptions},
                     {"conventions", s.conventions}};
}

inline void from_json(const nlohmann::json& j, MetricsSummary& s) {
  j.at("alpha").get_to(s.alpha);
  j.at("exposure_t").get_to(s.exposure_t);
  j.at("exposure_t_refined").get_to(s.exposure_t_refined);
  j.at("eta_text").get_to(s.eta_text);
  j.at("eta_table").get_to(s.eta_table);
  j.at("contrast").get_to(s.contrast);
  j.at("contrast_time").get_to(s.contrast_time);
  j.at("mz0").get_to(s.mz0);
  j.at("mz0_up").get_to(s.mz0_up);
  j.at("up_run_max_change").get_to(s.up_run_max_change);
  j.at("degenerate").get_to(s.degenerate);
  j.at("warnings").get_to(s.warnings);
  if (j.at("t_c").is_null()) s.t_c.reset();
  else s.t_c = j.at("t_c").get<double>();
  s.parameters.clear();
  for (const auto& p : j.at("parameters")) s.parameters.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  j.at("assumptions").get_to(s.assumptions);
  j.at("conventions").get_to(s.conventions);
}

}  // namespace spinamp
