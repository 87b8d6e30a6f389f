#pragma once

// Zeroth-order average Hamiltonian of the RF term in the toggling frame of the
// diagonal ZZ couplings, and term-by-term comparison against closed forms.

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinamp/errors.hpp"
#include "spinamp/models.hpp"
#include "spinamp/spin_algebra.hpp"

namespace spinamp {

class AveragingJob {
 public:
  AveragingJob(SystemLayout layout, const HermitianOperator& h_zz, HermitianOperator v_rf, double t_c,
               std::size_t n_quad = 1024)
      : layout_(layout), v_rf_(std::move(v_rf)), t_c_(t_c), n_quad_(n_quad) {
    if (h_zz.dim() != layout.dimension() || v_rf_.dim() != layout.dimension()) {
      throw ArgumentError("averaging job: operator dimension does not match layout");
    }
    const Matrix& h = h_zz.matrix();
    Matrix off = h;
    off.diagonal().setZero();
    if (max_abs(off) > kHermitianTolerance) {
      throw ArgumentError("averaging job: h_zz must be diagonal in the computational basis");
    }
    if (!(t_c > 0.0) || !std::isfinite(t_c)) throw ArgumentError("averaging job: t_c must be > 0");
    if (n_quad < 2) throw ArgumentError("averaging job: n_quad must be >= 2");
    energies_ = h.diagonal().real();
  }

  const SystemLayout& layout() const noexcept { return layout_; }
  const RealVector& energies() const noexcept { return energies_; }
  const HermitianOperator& v_rf() const noexcept { return v_rf_; }
  double t_c() const noexcept { return t_c_; }
  std::size_t n_quad() const noexcept { return n_quad_; }

  AveragingJob with_interval(double t_c) const {
    AveragingJob copy = *this;
    if (!(t_c > 0.0)) throw ArgumentError("averaging job: t_c must be > 0");
    copy.t_c_ = t_c;
    return copy;
  }

 private:
  SystemLayout layout_;
  RealVector energies_;
  HermitianOperator v_rf_;
  double t_c_;
  std::size_t n_quad_;
};

namespace detail {

/// Writes U(t) v U^+(t) into `out` for diagonal h_zz with energies E: v_ab exp(-i t (E_a - E_b)).
inline void toggled_into(Matrix& out, const AveragingJob& job, double t) {
  const auto& e = job.energies();
  const auto dim = e.size();
  Vector phase(dim);
  for (Eigen::Index a = 0; a < dim; ++a) phase(a) = std::exp(Complex{0.0, -e(a) * t});
  out = phase.asDiagonal() * job.v_rf().matrix() * phase.conjugate().asDiagonal();
}

}  // namespace detail

/// U(t) v_rf U^+(t) with U(t) = exp(-i t h_zz).
inline HermitianOperator toggled_operator(const AveragingJob& job, double t) {
  if (!std::isfinite(t)) throw ArgumentError("toggled_operator: non-finite time");
  Matrix out;
  detail::toggled_into(out, job, t);
  return HermitianOperator::symmetrized(out);
}

/// Composite trapezoid estimate of (1/t_c) int_0^t_c H~(t) dt with `intervals` panels.
inline Matrix trapezoid_average(const AveragingJob& job, std::size_t intervals) {
  const double h = job.t_c() / static_cast<double>(intervals);
  Matrix sum = Matrix::Zero(job.v_rf().matrix().rows(), job.v_rf().matrix().cols());
  Matrix sample;
  for (std::size_t j = 0; j <= intervals; ++j) {
    detail::toggled_into(sample, job, h * static_cast<double>(j));
    const double w = (j == 0 || j == intervals) ? 0.5 : 1.0;
    sum += w * sample;
  }
  return sum / static_cast<double>(intervals);
}

struct AverageResult {
  HermitianOperator average;
  std::size_t n_quad_used = 0;
  /// max |A(2n) - A(n)| at the accepted resolution.
  double doubling_change = 0.0;
};

/// Average Hamiltonian with a doubling convergence check: accepts once doubling the
/// panel count changes no entry by more than `tol`.
inline AverageResult average_hamiltonian_checked(const AveragingJob& job, double tol = 1e-10,
                                                 std::size_t max_quad = std::size_t{1} << 16) {
  std::size_t n = job.n_quad();
  Matrix current = trapezoid_average(job, n);
  double change = 0.0;
  while (true) {
    const std::size_t doubled = 2 * n;
    Matrix refined = trapezoid_average(job, doubled);
    change = max_abs(refined - current);
    if (change <= tol) {
      return AverageResult{HermitianOperator::symmetrized(refined), doubled, change};
    }
    if (doubled >= max_quad) {
      std::ostringstream msg;
      msg << "average Hamiltonian did not converge: t_c = " << job.t_c() << ", n_quad " << n << " -> "
          << doubled << " changed entries by " << change << " (tol " << tol << ")";
      throw ConvergenceError(msg.str());
    }
    n = doubled;
    current = std::move(refined);
  }
}

inline HermitianOperator average_hamiltonian(const AveragingJob& job) {
  return average_hamiltonian_checked(job).average;
}

/// Smallest common period of all toggling-frame phases exp(-i t (E_a - E_b)), if the
/// spectrum of h_zz lies on a lattice of spacing min_gap / k for some k <= max_divisor.
inline std::optional<double> common_period(const RealVector& energies, std::size_t max_divisor = 4096,
                                           double tol = 1e-9) {
  if (energies.size() == 0) return std::nullopt;
  const double e0 = energies.minCoeff();
  double gap = 0.0;
  for (Eigen::Index a = 0; a < energies.size(); ++a) {
    const double d = energies(a) - e0;
    if (d > tol && (gap == 0.0 || d < gap)) gap = d;
  }
  if (gap == 0.0) return std::nullopt;  // flat spectrum: every interval is a period
  for (std::size_t k = 1; k <= max_divisor; ++k) {
    const double omega0 = gap / static_cast<double>(k);
    bool ok = true;
    for (Eigen::Index a = 0; a < energies.size() && ok; ++a) {
      const double ratio = (energies(a) - e0) / omega0;
      ok = std::abs(ratio - std::round(ratio)) < tol * std::max(1.0, std::abs(ratio));
    }
    if (ok) return 2.0 * std::numbers::pi / omega0;
  }
  return std::nullopt;
}

/// Diagonal ZZ part and transverse RF part of a model (averaging inputs).
struct ToggledSplit {
  HermitianOperator h_zz;
  HermitianOperator v_rf;
};

inline ToggledSplit toggled_split(const ModelSpec& spec, const CouplingGraph& graph) {
  const SystemLayout layout = spec.layout();
  Matrix zz = zero_matrix(layout);
  detail::add_graph_couplings(zz, layout, graph, CouplingForm::zz);
  Matrix rf = zero_matrix(layout);
  detail::add_rf(rf, layout, spec.rf_coefficient());
  return {HermitianOperator(std::move(zz)), HermitianOperator(std::move(rf))};
}

/// Job for a model with t_c set to the common period of its ZZ spectrum (2 pi / d1 when
/// none exists; pair with average_with_growing_interval in that case).
inline AveragingJob averaging_job_for(const ModelSpec& spec, std::size_t n_quad = 1024) {
  const auto graph = graph_for(spec);
  auto split = toggled_split(spec, graph);
  const SystemLayout layout = spec.layout();
  const RealVector e = split.h_zz.matrix().diagonal().real();
  const double base = 2.0 * std::numbers::pi / std::max(spec.d1, 1e-12);
  const double t_c = common_period(e).value_or(base);
  return AveragingJob(layout, split.h_zz, split.v_rf, t_c, n_quad);
}

/// Average over growing intervals until the result stabilizes; used when no common
/// period exists.
inline AverageResult average_with_growing_interval(const AveragingJob& job, double tol = 1e-8,
                                                   std::size_t max_doublings = 12) {
  if (common_period(job.energies())) return average_hamiltonian_checked(job);
  AveragingJob current = job;
  auto previous = average_hamiltonian_checked(current, tol, std::size_t{1} << 20);
  for (std::size_t i = 0; i < max_doublings; ++i) {
    current = current.with_interval(2.0 * current.t_c());
    auto next = average_hamiltonian_checked(current, tol, std::size_t{1} << 20);
    if (max_abs(next.average.matrix() - previous.average.matrix()) <= tol) return next;
    previous = std::move(next);
  }
  throw ConvergenceError("average Hamiltonian did not stabilize while growing t_c up to " +
                         std::to_string(current.t_c()));
}

// --- comparison -------------------------------------------------------------

struct TermComparison {
  std::string label;
  bool transverse = false;
  /// 'i','x','y','z' per slot, S first.
  std::vector<char> axes;
  Complex analytic;
  Complex numeric;
  double residual() const { return std::abs(analytic - numeric); }

  /// Slots carrying an x or y factor.
  std::vector<std::size_t> transverse_slots() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < axes.size(); ++s) {
      if (axes[s] == 'x' || axes[s] == 'y') out.push_back(s);
    }
    return out;
  }
};

struct DiscrepancyReport {
  double max_abs_difference = 0.0;
  double frobenius_distance = 0.0;
  /// Same measures restricted to terms containing an x or y factor.
  double transverse_max_abs = 0.0;
  double transverse_frobenius = 0.0;
  /// Largest coefficient residual among z-only terms.
  double z_sector_max_residual = 0.0;
  std::vector<TermComparison> terms;

  double max_residual_if(const std::function<bool(const TermComparison&)>& pred) const {
    double worst = 0.0;
    for (const auto& t : terms) {
      if (pred(t)) worst = std::max(worst, t.residual());
    }
    return worst;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["max_abs_difference"] = max_abs_difference;
    j["frobenius_distance"] = frobenius_distance;
    j["transverse_max_abs"] = transverse_max_abs;
    j["transverse_frobenius"] = transverse_frobenius;
    j["z_sector_max_residual"] = z_sector_max_residual;
    auto& arr = j["terms"] = nlohmann::json::array();
    for (const auto& t : terms) {
      arr.push_back({{"term", t.label},
                     {"sector", t.transverse ? "transverse" : "z"},
                     {"analytic", t.analytic.real()},
                     {"numeric", t.numeric.real()},
                     {"analytic_imag", t.analytic.imag()},
                     {"numeric_imag", t.numeric.imag()},
                     {"residual", t.residual()}});
    }
    return j;
  }

  /// Plain-text table, one line per term with a nonzero coefficient on either side.
  std::string to_text() const {
    std::ostringstream os;
    os.precision(6);
    os << "max|diff| " << max_abs_difference << "  frobenius " << frobenius_distance
       << "  transverse max|diff| " << transverse_max_abs << "  z-sector max residual "
       << z_sector_max_residual << "\n";
    for (const auto& t : terms) {
      os << "  " << (t.transverse ? "[xy] " : "[z]  ") << t.label << "  analytic " << t.analytic.real()
         << "  numeric " << t.numeric.real() << "  residual " << t.residual() << "\n";
    }
    return os.str();
  }
};

inline DiscrepancyReport compare_effective(const SystemLayout& layout, const HermitianOperator& analytic,
                                           const HermitianOperator& numeric, double threshold = 1e-12) {
  if (analytic.dim() != numeric.dim() || analytic.dim() != layout.dimension()) {
    throw ArgumentError("compare_effective: dimension mismatch");
  }
  DiscrepancyReport report;
  const Matrix diff = analytic.matrix() - numeric.matrix();
  report.max_abs_difference = max_abs(diff);
  report.frobenius_distance = diff.norm();

  const auto a_terms = expand_in_spin_products(layout, analytic.matrix(), threshold);
  const auto n_terms = expand_in_spin_products(layout, numeric.matrix(), threshold);
  std::map<std::string, TermComparison> merged;
  auto entry = [&merged](const OperatorTerm& term) -> TermComparison& {
    auto [it, inserted] = merged.try_emplace(term.label());
    if (inserted) {
      it->second.label = it->first;
      it->second.transverse = term.transverse();
      it->second.axes = term.axes;
    }
    return it->second;
  };
  for (const auto& t : a_terms) entry(t).analytic = t.coefficient;
  for (const auto& t : n_terms) entry(t).numeric = t.coefficient;

  Matrix transverse_diff = zero_matrix(layout);
  for (const auto& t : a_terms) {
    if (t.transverse()) add_spin_product(transverse_diff, layout, t.coefficient, t.factors());
  }
  for (const auto& t : n_terms) {
    if (t.transverse()) add_spin_product(transverse_diff, layout, -t.coefficient, t.factors());
  }
  report.transverse_max_abs = max_abs(transverse_diff);
  report.transverse_frobenius = transverse_diff.norm();
  for (auto& [label, m] : merged) {
    if (!m.transverse) report.z_sector_max_residual = std::max(report.z_sector_max_residual, m.residual());
    report.terms.push_back(std::move(m));
  }
  return report;
}

}  // namespace spinamp
