// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <sys/wait.h>

#include "oracles.hpp"
#include "spinamp/spinamp.hpp"

using namespace spinamp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Outcome bound(double measured, double tolerance) {
  return {measured < tolerance, "measured " + sci(measured) + " < " + sci(tolerance)};
}

Outcome table_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  const auto table = run_table();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto missed = missed_cells(table);
  std::string detail = std::to_string(18 - missed.size()) + "/18 cells within 20%, six runs " + fixed(seconds, 1) + " s";
  if (seconds >= 60.0) return {false, detail + " (limit 60 s)"};
  if (missed.empty()) return {true, detail};

  // Out-of-band cells are acceptable only when each one is written up with the sensitivity study.
  const fs::path doc = fs::path(SPINAMP_SOURCE_DIR) / "docs" / "table1_reproduction.md";
  if (!fs::exists(doc)) return {false, detail + "; " + doc.string() + " missing"};
  const auto text = read_file(doc);
  std::size_t undocumented = 0;
  for (const auto& line : missed) {
    if (text.find(line) == std::string::npos) {
      ++undocumented;
      std::fprintf(stderr, "undocumented miss: %s\n", line.c_str());
    }
  }
  const bool has_sensitivity = text.find("g1/d1") != std::string::npos && text.find("omega1") != std::string::npos;
  detail += "; misses documented with sensitivity in docs/table1_reproduction.md";
  if (undocumented > 0) return {false, detail + " (" + std::to_string(undocumented) + " missing)"};
  if (!has_sensitivity) return {false, detail + " (no sensitivity section)"};
  return {true, detail};
}

Outcome table_consistency() {
  double worst_eta = 0.0, lo = 1.0, hi = 0.0;
  for (const auto& row : reference_table()) {
    const auto e = effectiveness(row.alpha, row.contrast, row.exposure_t);
    worst_eta = std::max(worst_eta, std::abs(e.eta_table - row.eta) / row.eta);
    lo = std::min(lo, row.contrast / row.alpha);
    hi = std::max(hi, row.contrast / row.alpha);
  }
  const bool ok = worst_eta < 0.03 && lo >= 0.65 && hi <= 0.68;
  return {ok, "worst |alpha/T - eta|/eta " + fixed(100 * worst_eta, 2) + "% < 3%, C/alpha in [" + fixed(lo) + ", " +
                  fixed(hi) + "] within [0.65, 0.68]"};
}

Outcome eigenstate_invariance() {
  double worst = 0.0;
  for (const char* name : {"1d-eff-m1", "1d-eff-m2", "2d-eff", "3d-eff"}) {
    worst = std::max(worst, up_run_max_change(preset_spec(name)));
  }
  return bound(worst, 1e-9);
}

Outcome conservation() {
  double z = 0.0, other = 0.0;
  for (const char* name : {"1d-full", "2d-full", "3d-full"}) {
    ModelSpec spec = preset_spec(name);
    spec.omega1 = 0.0;
    spec.t_max = 600.0;
    z = std::max(z, conservation_drifts(spec).total_z);
  }
  for (const auto& p : preset_catalog()) {
    const auto d = conservation_drifts(preset_spec(p.name));
    other = std::max({other, d.trace, d.purity, d.energy});
  }
  return {z < 1e-10 && other < 1e-10,
          "total Z drift " + sci(z) + ", trace/purity/energy drift " + sci(other) + " < 1.000e-10"};
}

Outcome rotation_identities() { return bound(rotation_identity_residual(100), 1e-12); }

Outcome average_hamiltonian_oracle() {
  const double projector = three_spin_projector_residual(1.0, 0.15);
  const std::size_t n = 5;
  const auto rep = effective_vs_average(chain_m1_spec(n));
  const double bulk = rep.max_residual_if([n](const TermComparison& t) { return bulk_transverse_term(t, n); });
  std::size_t edges = 0;
  for (const auto& t : rep.terms) {
    if (t.transverse && !bulk_transverse_term(t, n)) ++edges;
  }
  return {projector < 1e-8 && bulk < 1e-8, "3-spin projector " + sci(projector) + ", N=5 bulk " + sci(bulk) +
                                               " < 1.000e-08; " + std::to_string(edges) + " edge terms itemized"};
}

Outcome evolution_oracle() { return bound(evolution_oracle_residual(), 1e-4); }

Outcome cnot_oracle() {
  const SystemLayout layout(3);
  const auto truth = oracle::cascade_truth_table(4);
  std::size_t mismatches = cnot_mismatches();
  for (std::uint64_t b = 0; b < 16; ++b) {
    if (basis_of(layout, cnot_chain(bits_of(layout, b))) != truth[b]) ++mismatches;
  }
  const bool flips = cnot_chain({1, 0, 0, 0}) == BitPattern{1, 1, 1, 1} && cnot_chain({0, 0, 0, 0}) == BitPattern{0, 0, 0, 0};
  return {mismatches == 0 && flips, std::to_string(mismatches) + " mismatches over 16 basis states"};
}

Outcome ring_overlap() { return bound(ring_overlap_deviation(preset_spec("3d-zz")), 1e-6); }

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return files;
}

Outcome determinism() {
  const fs::path base = fs::current_path() / "acceptance_determinism";
  fs::remove_all(base);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(SPINAMP_CLI) + " table1 --emit all --out " + (base / run).string() + " >/dev/null";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "table1 exited abnormally"};
  }
  const auto a = snapshot(base / "a");
  const auto b = snapshot(base / "b");
  if (a.empty()) return {false, "table1 wrote no files"};
  const bool same = a == b;
  return {same, std::to_string(a.size()) + " files " + (same ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"table reproduction", table_reproduction},
      {"table internal consistency", table_consistency},
      {"eigenstate invariance", eigenstate_invariance},
      {"conservation", conservation},
      {"rotation identities", rotation_identities},
      {"average Hamiltonian oracle", average_hamiltonian_oracle},
      {"evolution oracle", evolution_oracle},
      {"CNOT oracle", cnot_oracle},
      {"ring trace overlap", ring_overlap},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("%s criterion %zu (%s): %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
