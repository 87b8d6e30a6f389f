// Batch front end: run, table1, verify, sweep.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinamp/spinamp.hpp"

namespace {

namespace fs = std::filesystem;
using namespace spinamp;

enum ExitCode : int { ok = 0, verify_failed = 1, config_error = 2, numerical_error = 3, io_error = 4 };

struct CommonOptions {
  std::string preset;
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::size_t workers = 1;
  std::optional<std::string> emit;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_preset = true) {
  if (with_preset) cmd->add_option("--preset", o.preset, "model preset name");
  cmd->add_option("--config", o.config, "key = value configuration file");
  cmd->add_option("--set", o.overrides, "key=value override (repeatable, wins over the file)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "parallel runs")->check(CLI::PositiveNumber);
  cmd->add_option("--emit", o.emit, "artifacts: traces_csv,summary_json,plots_svg | all | none");
}

ConfigBuilder builder_from(const CommonOptions& o) {
  ConfigBuilder b;
  if (!o.config.empty()) b.add_file(o.config);
  if (!o.preset.empty()) b.add("preset", o.preset);
  for (const auto& s : o.overrides) b.add_override(s);
  if (o.emit) b.add("emit", *o.emit);
  if (!o.out.empty()) b.add("output_dir", o.out);
  return b;
}

/// Model-key overrides only, for commands that iterate over presets.
ParameterList model_overrides(const CommonOptions& o) {
  ConfigBuilder b;
  if (!o.config.empty()) b.add_file(o.config);
  for (const auto& s : o.overrides) b.add_override(s);
  ParameterList out;
  for (const auto& [k, v] : b.entries()) {
    if (k == "preset") throw ConfigError("table1 runs every preset; 'preset' cannot be set", "preset");
    if (is_model_key(k)) out.emplace_back(k, v);
  }
  return out;
}

void print_summary(const std::string& label, const MetricsSummary& s) {
  std::printf("%s: alpha %.4f  T %.3f  C %.4f  eta(alpha/T) %.4f  eta(C/T) %.4f\n", label.c_str(), s.alpha,
              s.exposure_t, s.contrast, s.eta_table, s.eta_text);
  for (const auto& w : s.warnings) std::fprintf(stderr, "warning: %s: %s\n", label.c_str(), w.c_str());
}

int cmd_run(const CommonOptions& o) {
  const auto b = builder_from(o);
  const auto cfg = b.build();
  if (cfg.sweep) throw ConfigError("sweep keys given; use the sweep subcommand", "sweep_param");
  const auto result = execute(cfg.model);
  const auto written = write_run_artifacts(result, cfg.output_dir, cfg.emit);
  print_summary(run_title(cfg.model), result.summary);
  for (const auto& p : written) std::printf("wrote %s\n", p.string().c_str());
  return ok;
}

int cmd_table1(const CommonOptions& o, const std::string& baseline, bool sensitivity) {
  const auto overrides = model_overrides(o);
  const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
  const EmitSet emit = o.emit ? parse_emit(*o.emit) : default_emit();
  auto table = run_table(overrides, o.workers);
  if (!baseline.empty()) attach_baseline(table, nlohmann::json::parse(read_file(baseline)));
  write_table(table, dir, emit.count(Artifact::plots_svg) > 0);
  for (const auto& row : table.rows) print_summary(row.reference.label, row.summary);
  const auto missed = missed_cells(table);
  std::printf("%zu cells outside the +/-20%% band\n", missed.size());
  if (sensitivity) {
    const auto points = run_sensitivity(overrides, o.workers);
    atomic_write(dir / "sensitivity.csv", sensitivity_csv(points));
    atomic_write(dir / "sensitivity.md", sensitivity_markdown(points));
    std::printf("wrote %s\n", (dir / "sensitivity.csv").string().c_str());
  }
  std::printf("wrote %s\n", (dir / "table1.csv").string().c_str());
  return ok;
}

int cmd_verify(const std::string& level, const std::string& out) {
  VerifyLevel lvl;
  if (level == "fast") lvl = VerifyLevel::fast;
  else if (level == "full") lvl = VerifyLevel::full;
  else throw ConfigError("verify level must be fast or full, got '" + level + "'", "level");
  const auto report = run_verification(lvl);
  std::fputs(report.to_text().c_str(), stdout);
  if (!out.empty()) atomic_write(fs::path(out) / "verify.json", json_text(report.to_json()));
  std::printf("%s\n", report.all_passed() ? "all checks passed" : "some checks FAILED");
  return report.all_passed() ? ok : verify_failed;
}

int cmd_sweep(const CommonOptions& o, const std::string& param, const std::string& values) {
  auto b = builder_from(o);
  auto cfg = b.build();
  SweepAxis axis;
  if (!param.empty() || !values.empty()) {
    if (param.empty()) throw ConfigError("--values given without --param", "sweep_param");
    if (values.empty()) throw ConfigError("--param given without --values", "sweep_values");
    axis = SweepAxis{param, parse_list(values, "sweep_values")};
  } else if (cfg.sweep) {
    axis = *cfg.sweep;
  } else {
    throw ConfigError("sweep needs --param and --values (or sweep_param / sweep_values)", "sweep_param");
  }
  const auto points = run_sweep(b, axis, o.workers);
  for (const auto& p : points) {
    const auto label = sweep_label(axis.parameter, p.value);
    if (!cfg.emit.empty()) write_run_artifacts(p.result, cfg.output_dir / label, cfg.emit);
    print_summary(label, p.result.summary);
  }
  atomic_write(cfg.output_dir / "sweep.csv", sweep_csv(axis.parameter, points));
  std::printf("wrote %s\n", (cfg.output_dir / "sweep.csv").string().c_str());
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization-amplification simulator for small dipolar spin clusters"};
  app.require_subcommand(1);

  CommonOptions run_opts, table_opts, sweep_opts;
  auto* run = app.add_subcommand("run", "simulate one model from both S preparations");
  add_common(run, run_opts);

  auto* table = app.add_subcommand("table1", "six default runs next to the published values");
  add_common(table, table_opts, false);
  std::string baseline;
  bool sensitivity = false;
  table->add_option("--baseline", baseline, "previous table1.json for regression deviations");
  table->add_flag("--sensitivity", sensitivity, "also run the omega1 x g1/d1 sensitivity grid");

  auto* verify = app.add_subcommand("verify", "invariant and oracle checks");
  std::string level = "fast";
  std::string verify_out;
  verify->add_option("--level,level", level, "fast | full");
  verify->add_option("--out", verify_out, "directory for verify.json");

  auto* sweep = app.add_subcommand("sweep", "one-parameter sweep");
  add_common(sweep, sweep_opts);
  std::string param, values;
  sweep->add_option("--param", param, "model key to vary");
  sweep->add_option("--values", values, "comma-separated values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*table) return cmd_table1(table_opts, baseline, sensitivity);
    if (*verify) return cmd_verify(level, verify_out);
    if (*sweep) return cmd_sweep(sweep_opts, param, values);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error%s: %s\n", e.key().empty() ? "" : (" [" + e.key() + "]").c_str(), e.what());
    return config_error;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return io_error;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return numerical_error;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return numerical_error;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "i/o error: malformed JSON: %s\n", e.what());
    return io_error;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return io_error;
  }
  return ok;
}
