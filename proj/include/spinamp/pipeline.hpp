#pragma once

// Run orchestration: single runs (both S preparations), the six-row table, sweeps and the
// parameter-sensitivity grid, with artifact persistence.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinamp/averaging.hpp"
#include "spinamp/config.hpp"
#include "spinamp/dynamics.hpp"
#include "spinamp/io.hpp"
#include "spinamp/metrics.hpp"
#include "spinamp/models.hpp"

namespace spinamp {

/// Runs `fn(i)` for i in [0, count) on up to `workers` threads; results are stored by index.
/// The first exception (lowest index) is rethrown after all workers finish.
template <typename Result, typename Fn>
std::vector<Result> parallel_map(std::size_t count, std::size_t workers, Fn fn) {
  std::vector<std::optional<Result>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Result> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct RunResult {
  ModelSpec spec;
  PolarizationTrace trace_down;
  PolarizationTrace trace_up;
  MetricsSummary summary;
};

/// Common period of the model's ZZ spectrum, the averaging interval an effective form stands for.
inline std::optional<double> zz_period(const ModelSpec& spec, const CouplingGraph& graph) {
  const auto split = toggled_split(spec, graph);
  return common_period(split.h_zz.matrix().diagonal().real());
}

/// One Hamiltonian, evolved from both S preparations.
inline RunResult execute(const ModelSpec& spec) {
  spec.validate();
  const auto graph = graph_for(spec);
  const Evolver evolver(build_hamiltonian(spec, graph));
  const auto grid = spec.time_grid();
  const auto layout = spec.layout();
  RunResult r;
  r.spec = spec;
  r.trace_down = evolver.polarizations(initial_state(layout, SpinState::down), grid, spec.omega1);
  r.trace_up = evolver.polarizations(initial_state(layout, SpinState::up), grid, spec.omega1);
  for (const auto* tr : {&r.trace_down, &r.trace_up}) {
    const double worst = std::max({tr->max_purity_drift(), tr->max_energy_drift()});
    if (worst > kConservationTolerance) {
      throw NumericalError("purity or energy drifted by " + format_double(worst) + " during evolution");
    }
  }
  r.summary = summarize(spec, r.trace_down, r.trace_up, zz_period(spec, graph));
  return r;
}

inline ParameterList trace_header(const RunResult& r, SpinState state) {
  ParameterList header = r.summary.parameters;
  for (auto& [k, v] : header) {
    if (k == "s_initial") v = to_string(state);
  }
  header.emplace_back("t_c", r.summary.t_c ? format_double(*r.summary.t_c) : "none");
  for (const auto& a : r.summary.assumptions) header.emplace_back("assumption", a);
  return header;
}

inline nlohmann::json summary_document(const RunResult& r) {
  nlohmann::json j = r.summary;
  j["trace_diagnostics"] = {
      {"down", {{"max_trace_drift", r.trace_down.max_trace_drift()},
                {"max_purity_drift", r.trace_down.max_purity_drift()},
                {"max_energy_drift", r.trace_down.max_energy_drift()},
                {"max_total_z_drift", r.trace_down.max_total_z_drift()}}},
      {"up", {{"max_trace_drift", r.trace_up.max_trace_drift()},
              {"max_purity_drift", r.trace_up.max_purity_drift()},
              {"max_energy_drift", r.trace_up.max_energy_drift()},
              {"max_total_z_drift", r.trace_up.max_total_z_drift()}}}};
  return j;
}

inline std::string run_title(const ModelSpec& spec) {
  return to_string(spec.geometry) + ", " + to_string(spec.interaction) + ", N=" + std::to_string(spec.n) +
         ", M=" + std::to_string(spec.m);
}

/// Writes the requested artifacts into `dir`; nothing is created for an empty set.
inline std::vector<std::filesystem::path> write_run_artifacts(const RunResult& r, const std::filesystem::path& dir,
                                                              const EmitSet& emit) {
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& content) {
    atomic_write(dir / name, content);
    written.push_back(dir / name);
  };
  if (emit.count(Artifact::traces_csv)) {
    put("trace_down.csv", trace_csv(r.trace_down, trace_header(r, SpinState::down)));
    put("trace_up.csv", trace_csv(r.trace_up, trace_header(r, SpinState::up)));
  }
  if (emit.count(Artifact::summary_json)) put("summary.json", json_text(summary_document(r)));
  if (emit.count(Artifact::plots_svg)) {
    const auto title = run_title(r.spec);
    put("plot_down.svg", svg_trace_plot(r.trace_down, title + ", S down"));
    put("plot_up.svg", svg_trace_plot(r.trace_up, title + ", S up"));
    put("delta_p.svg", svg_delta_p_plot({{"S down", &r.trace_down}, {"S up", &r.trace_up}}, title));
  }
  return written;
}

// --- table ------------------------------------------------------------------

struct ReferenceRow {
  std::string label;
  std::string preset;
  double alpha;
  double exposure_t;
  double eta;
  double contrast;
};

/// Published six-row table (alpha, T, eta, C).
inline const std::array<ReferenceRow, 6>& reference_table() {
  static const std::array<ReferenceRow, 6> rows = {{
      {"1D full d-d", "1d-full", 1.85, 8.91, 0.21, 1.23},
      {"1D weak coupling", "1d-zz", 1.86, 3.38, 0.55, 1.24},
      {"2D full d-d", "2d-full", 2.69, 3.12, 0.86, 1.79},
      {"2D weak coupling", "2d-zz", 2.88, 3.15, 0.91, 1.92},
      {"3D full d-d", "3d-full", 0.89, 3.63, 0.24, 0.59},
      {"3D weak coupling", "3d-zz", 1.64, 3.77, 0.43, 1.09},
  }};
  return rows;
}

inline constexpr double kReproductionBand = 0.20;

inline double relative_deviation(double value, double reference) {
  return reference == 0.0 ? (value == 0.0 ? 0.0 : INFINITY) : (value - reference) / reference;
}

struct TableRow {
  ReferenceRow reference;
  MetricsSummary summary;
  PolarizationTrace trace_down;
  std::optional<MetricsSummary> baseline;

  double dev_alpha() const { return relative_deviation(summary.alpha, reference.alpha); }
  double dev_t() const { return relative_deviation(summary.exposure_t, reference.exposure_t); }
  double dev_c() const { return relative_deviation(summary.contrast, reference.contrast); }
  double dev_eta() const { return relative_deviation(summary.eta_table, reference.eta); }
  bool in_band() const {
    return std::abs(dev_alpha()) <= kReproductionBand && std::abs(dev_t()) <= kReproductionBand &&
           std::abs(dev_c()) <= kReproductionBand;
  }
};

struct Table {
  std::vector<TableRow> rows;
  /// Overrides applied on top of each preset.
  ParameterList overrides;
};

inline ModelSpec table_spec(const ReferenceRow& row, const ParameterList& overrides) {
  ConfigBuilder b;
  b.add("preset", row.preset);
  for (const auto& [k, v] : overrides) b.add(k, v);
  return b.build().model;
}

inline Table run_table(const ParameterList& overrides = {}, std::size_t workers = 1) {
  const auto& refs = reference_table();
  Table t;
  t.overrides = overrides;
  auto results = parallel_map<RunResult>(refs.size(), workers, [&](std::size_t i) {
    return execute(table_spec(refs[i], overrides));
  });
  for (std::size_t i = 0; i < refs.size(); ++i) {
    t.rows.push_back({refs[i], std::move(results[i].summary), std::move(results[i].trace_down), std::nullopt});
  }
  return t;
}

/// Attaches a previous table's summaries (matched by preset) for regression deviations.
inline void attach_baseline(Table& t, const nlohmann::json& previous) {
  for (auto& row : t.rows) {
    for (const auto& entry : previous.at("rows")) {
      if (entry.at("preset").get<std::string>() == row.reference.preset) {
        row.baseline = entry.at("summary").get<MetricsSummary>();
      }
    }
    if (!row.baseline) throw ConfigError("baseline has no row for preset " + row.reference.preset, "baseline");
  }
}

inline std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string percent(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%+.1f%%", 100.0 * v);
  return buf;
}

/// One line per (row, quantity) outside the band; used verbatim in reproduction notes.
inline std::vector<std::string> missed_cells(const Table& t) {
  std::vector<std::string> out;
  for (const auto& row : t.rows) {
    auto check = [&](const char* name, double value, double ref, double dev) {
      if (std::abs(dev) > kReproductionBand) {
        out.push_back("- " + row.reference.label + ": " + name + " " + fixed(value, 3) + " vs " + fixed(ref, 2) +
                      " (" + percent(dev) + ")");
      }
    };
    check("alpha", row.summary.alpha, row.reference.alpha, row.dev_alpha());
    check("T", row.summary.exposure_t, row.reference.exposure_t, row.dev_t());
    check("C", row.summary.contrast, row.reference.contrast, row.dev_c());
  }
  return out;
}

inline std::string table_csv(const Table& t) {
  std::string out;
  for (const auto& [k, v] : t.overrides) out += "# override " + k + " = " + v + "\n";
  out += "row,preset,alpha,T,eta_table,eta_text,C,ref_alpha,ref_T,ref_eta,ref_C,dev_alpha,dev_T,dev_eta,dev_C,in_band";
  const bool regression = !t.rows.empty() && t.rows.front().baseline.has_value();
  if (regression) out += ",reg_alpha,reg_T,reg_C";
  out += "\n";
  for (const auto& r : t.rows) {
    const auto& s = r.summary;
    out += r.reference.label + "," + r.reference.preset;
    for (double v : {s.alpha, s.exposure_t, s.eta_table, s.eta_text, s.contrast, r.reference.alpha,
                     r.reference.exposure_t, r.reference.eta, r.reference.contrast, r.dev_alpha(), r.dev_t(),
                     r.dev_eta(), r.dev_c()}) {
      out += "," + format_csv_number(v);
    }
    out += r.in_band() ? ",yes" : ",no";
    if (regression) {
      out += "," + format_csv_number(relative_deviation(s.alpha, r.baseline->alpha));
      out += "," + format_csv_number(relative_deviation(s.exposure_t, r.baseline->exposure_t));
      out += "," + format_csv_number(relative_deviation(s.contrast, r.baseline->contrast));
    }
    out += "\n";
  }
  return out;
}

inline nlohmann::json table_json(const Table& t) {
  nlohmann::json j;
  nlohmann::json ov = nlohmann::json::array();
  for (const auto& [k, v] : t.overrides) ov.push_back({k, v});
  j["overrides"] = ov;
  j["band"] = kReproductionBand;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = {{"label", r.reference.label},
                          {"preset", r.reference.preset},
                          {"reference", {{"alpha", r.reference.alpha},
                                         {"T", r.reference.exposure_t},
                                         {"eta", r.reference.eta},
                                         {"C", r.reference.contrast}}},
                          {"deviation", {{"alpha", r.dev_alpha()},
                                         {"T", r.dev_t()},
                                         {"eta_table", r.dev_eta()},
                                         {"C", r.dev_c()}}},
                          {"in_band", r.in_band()},
                          {"summary", r.summary}};
    if (r.baseline) {
      row["regression"] = {{"alpha", relative_deviation(r.summary.alpha, r.baseline->alpha)},
                           {"T", relative_deviation(r.summary.exposure_t, r.baseline->exposure_t)},
                           {"C", relative_deviation(r.summary.contrast, r.baseline->contrast)}};
    }
    rows.push_back(std::move(row));
  }
  return j;
}

inline std::string table_markdown(const Table& t) {
  std::string out = "| row | alpha | T | eta (alpha/T) | eta (C/T) | C | ref alpha | ref T | ref eta | ref C | in band |\n";
  out += "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : t.rows) {
    const auto& s = r.summary;
    out += "| " + r.reference.label + " | " + fixed(s.alpha, 3) + " | " + fixed(s.exposure_t, 2) + " | " +
           fixed(s.eta_table, 3) + " | " + fixed(s.eta_text, 3) + " | " + fixed(s.contrast, 3) + " | " +
           fixed(r.reference.alpha, 2) + " | " + fixed(r.reference.exposure_t, 2) + " | " + fixed(r.reference.eta, 2) +
           " | " + fixed(r.reference.contrast, 2) + " | " + (r.in_band() ? "yes" : "no") + " |\n";
  }
  const auto missed = missed_cells(t);
  out += "\nCells outside the +/-20% band: " + std::to_string(missed.size()) + "\n\n";
  for (const auto& m : missed) out += m + "\n";
  return out;
}

inline void write_table(const Table& t, const std::filesystem::path& dir, bool with_plot = false) {
  atomic_write(dir / "table1.csv", table_csv(t));
  atomic_write(dir / "table1.json", json_text(table_json(t)));
  atomic_write(dir / "table1.md", table_markdown(t));
  if (with_plot) {
    std::vector<std::pair<std::string, const PolarizationTrace*>> runs;
    for (const auto& r : t.rows) runs.emplace_back(r.reference.label, &r.trace_down);
    atomic_write(dir / "table1_delta_p.svg", svg_delta_p_plot(runs, "Delta P, S-down runs"));
  }
}

// --- sensitivity ------------------------------------------------------------

struct SensitivityPoint {
  std::string preset;
  double omega1_scale;
  double g1_ratio;
  MetricsSummary summary;
};

inline const std::array<double, 3>& sensitivity_omega1_scales() {
  static const std::array<double, 3> v = {0.7, 1.0, 1.3};
  return v;
}
inline const std::array<double, 3>& sensitivity_g1_ratios() {
  static const std::array<double, 3> v = {0.5, 1.0, 2.0};
  return v;
}

/// omega1 at 70/100/130% of its base value times g1/d1 in {0.5, 1, 2}, for every table row.
inline std::vector<SensitivityPoint> run_sensitivity(const ParameterList& overrides = {}, std::size_t workers = 1) {
  struct Job {
    const ReferenceRow* row;
    double w_scale;
    double g_ratio;
  };
  std::vector<Job> jobs;
  for (const auto& row : reference_table()) {
    for (double w : sensitivity_omega1_scales()) {
      for (double g : sensitivity_g1_ratios()) jobs.push_back({&row, w, g});
    }
  }
  auto summaries = parallel_map<MetricsSummary>(jobs.size(), workers, [&](std::size_t i) {
    ModelSpec spec = table_spec(*jobs[i].row, overrides);
    spec.omega1 *= jobs[i].w_scale;
    spec.g1 = jobs[i].g_ratio * spec.d1;
    return execute(spec).summary;
  });
  std::vector<SensitivityPoint> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out.push_back({jobs[i].row->preset, jobs[i].w_scale, jobs[i].g_ratio, std::move(summaries[i])});
  }
  return out;
}

inline std::string sensitivity_csv(const std::vector<SensitivityPoint>& points) {
  std::string out = "preset,omega1_scale,g1_over_d1,omega1,alpha,T,C,eta_table,dev_alpha,dev_T,dev_C\n";
  for (const auto& p : points) {
    const ReferenceRow* ref = nullptr;
    for (const auto& r : reference_table()) {
      if (r.preset == p.preset) ref = &r;
    }
    double omega1 = 0.0;
    for (const auto& [k, v] : p.summary.parameters) {
      if (k == "omega1") omega1 = std::stod(v);
    }
    out += p.preset + "," + format_csv_number(p.omega1_scale) + "," + format_csv_number(p.g1_ratio) + "," +
           format_csv_number(omega1);
    for (double v : {p.summary.alpha, p.summary.exposure_t, p.summary.contrast, p.summary.eta_table,
                     relative_deviation(p.summary.alpha, ref->alpha), relative_deviation(p.summary.exposure_t, ref->exposure_t),
                     relative_deviation(p.summary.contrast, ref->contrast)}) {
      out += "," + format_csv_number(v);
    }
    out += "\n";
  }
  return out;
}

inline std::string sensitivity_markdown(const std::vector<SensitivityPoint>& points) {
  std::string out = "| preset | omega1 scale | g1/d1 | alpha | T | C |\n|---|---|---|---|---|---|\n";
  for (const auto& p : points) {
    out += "| " + p.preset + " | " + fixed(p.omega1_scale, 1) + " | " + fixed(p.g1_ratio, 1) + " | " +
           fixed(p.summary.alpha, 3) + " | " + fixed(p.summary.exposure_t, 2) + " | " + fixed(p.summary.contrast, 3) +
           " |\n";
  }
  return out;
}

// --- sweep ------------------------------------------------------------------

struct SweepPoint {
  double value;
  RunResult result;
};

inline std::string sweep_label(const std::string& parameter, double value) {
  return parameter + "=" + format_double(value);
}

inline std::vector<SweepPoint> run_sweep(const ConfigBuilder& base, const SweepAxis& axis, std::size_t workers = 1) {
  ConfigBuilder::validate_sweep(axis);
  auto results = parallel_map<RunResult>(axis.values.size(), workers, [&](std::size_t i) {
    ConfigBuilder b = base;
    b.add(axis.parameter, axis.parameter == "N" || axis.parameter == "M" || axis.parameter == "n_time_points"
                              ? std::to_string(static_cast<long long>(std::llround(axis.values[i])))
                              : format_double(axis.values[i]));
    return execute(b.build().model);
  });
  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < results.size(); ++i) out.push_back({axis.values[i], std::move(results[i])});
  return out;
}

inline std::string sweep_csv(const std::string& parameter, const std::vector<SweepPoint>& points) {
  std::string out = parameter + ",alpha,T,C,eta_table,eta_text,degenerate\n";
  for (const auto& p : points) {
    const auto& s = p.result.summary;
    out += format_csv_number(p.value);
    for (double v : {s.alpha, s.exposure_t, s.contrast, s.eta_table, s.eta_text}) out += "," + format_csv_number(v);
    out += s.degenerate ? ",yes\n" : ",no\n";
  }
  return out;
}

}  // namespace spinamp
