#pragma once

// Coupling graphs and model Hamiltonians for the chain (1D), hub (2D) and
// ring (3D) clusters: rotating-frame full-dipolar and weak-coupling forms,
// plus the closed-form effective Hamiltonians of the nearest-neighbor analysis.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinamp/errors.hpp"
#include "spinamp/spin_algebra.hpp"

namespace spinamp {

enum class Geometry { chain_1d, hub_2d, ring_3d };
enum class Interaction { full_dipolar, zz_weak, effective };
enum class SpinState { up, down };

/// Prefactor of the transverse RF term: `half` is (omega1/2)(S^x + sum I^x),
/// `nutation` is omega1 (S^x + sum I^x).
enum class RfConvention { half, nutation };

/// Two transverse terms of the M = 2 chain effective Hamiltonian are printed
/// with a bare 1/4 where every sibling carries omega1/4.
enum class M2TransverseFactor { bare, omega1 };

/// Ring effective Hamiltonian: `neighbor_projector` uses
/// I_m^x prod_q (1 - 4 I_{m-q}^z I_{m+q}^z); `literal` uses the Hermitian part of
/// I_m^x prod_q (1 - I_m^z I_{m+q}^z) as printed.
enum class RingEffectiveForm { neighbor_projector, literal };

/// 3D cluster: N-1 ring sites plus hub spin N, or all N spins on the ring.
enum class RingLayout { ring_plus_hub, ring_only };

// --- enum <-> text ----------------------------------------------------------

inline std::string to_string(Geometry g) {
  switch (g) {
    case Geometry::chain_1d: return "chain_1d";
    case Geometry::hub_2d: return "hub_2d";
    case Geometry::ring_3d: return "ring_3d";
  }
  return "?";
}
inline std::string to_string(Interaction i) {
  switch (i) {
    case Interaction::full_dipolar: return "full_dipolar";
    case Interaction::zz_weak: return "zz_weak";
    case Interaction::effective: return "effective";
  }
  return "?";
}
inline std::string to_string(SpinState s) { return s == SpinState::up ? "up" : "down"; }
inline std::string to_string(RfConvention r) { return r == RfConvention::half ? "half" : "nutation"; }
inline std::string to_string(M2TransverseFactor f) {
  return f == M2TransverseFactor::bare ? "bare" : "omega1";
}
inline std::string to_string(RingEffectiveForm f) {
  return f == RingEffectiveForm::neighbor_projector ? "neighbor_projector" : "literal";
}
inline std::string to_string(RingLayout l) {
  return l == RingLayout::ring_plus_hub ? "ring_plus_hub" : "ring_only";
}

template <typename Enum>
std::optional<Enum> enum_from_string(std::string_view text);

template <>
inline std::optional<Geometry> enum_from_string<Geometry>(std::string_view t) {
  if (t == "chain_1d" || t == "1d") return Geometry::chain_1d;
  if (t == "hub_2d" || t == "2d") return Geometry::hub_2d;
  if (t == "ring_3d" || t == "3d") return Geometry::ring_3d;
  return std::nullopt;
}
template <>
inline std::optional<Interaction> enum_from_string<Interaction>(std::string_view t) {
  if (t == "full_dipolar" || t == "full") return Interaction::full_dipolar;
  if (t == "zz_weak" || t == "zz") return Interaction::zz_weak;
  if (t == "effective" || t == "eff") return Interaction::effective;
  return std::nullopt;
}
template <>
inline std::optional<SpinState> enum_from_string<SpinState>(std::string_view t) {
  if (t == "up") return SpinState::up;
  if (t == "down") return SpinState::down;
  return std::nullopt;
}
template <>
inline std::optional<RfConvention> enum_from_string<RfConvention>(std::string_view t) {
  if (t == "half") return RfConvention::half;
  if (t == "nutation") return RfConvention::nutation;
  return std::nullopt;
}
template <>
inline std::optional<M2TransverseFactor> enum_from_string<M2TransverseFactor>(std::string_view t) {
  if (t == "bare") return M2TransverseFactor::bare;
  if (t == "omega1") return M2TransverseFactor::omega1;
  return std::nullopt;
}
template <>
inline std::optional<RingEffectiveForm> enum_from_string<RingEffectiveForm>(std::string_view t) {
  if (t == "neighbor_projector") return RingEffectiveForm::neighbor_projector;
  if (t == "literal") return RingEffectiveForm::literal;
  return std::nullopt;
}
template <>
inline std::optional<RingLayout> enum_from_string<RingLayout>(std::string_view t) {
  if (t == "ring_plus_hub") return RingLayout::ring_plus_hub;
  if (t == "ring_only") return RingLayout::ring_only;
  return std::nullopt;
}

// --- coupling graph ---------------------------------------------------------

/// I-I couplings d (symmetric, zero diagonal) and S-I couplings g, both indexed
/// by I-spin number 1..N.  Hub couplings (f, R) live in the last column of d,
/// S-hub couplings (g_N, Q_N) in the last entry of g.
class CouplingGraph {
 public:
  explicit CouplingGraph(std::size_t n)
      : d_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
        g_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

  std::size_t n() const noexcept { return static_cast<std::size_t>(g_.size()); }

  double ii(std::size_t m, std::size_t n) const { return d_(index(m), index(n)); }
  double si(std::size_t m) const { return g_(index(m)); }

  void set_ii(std::size_t m, std::size_t n, double value) {
    if (m == n) throw ArgumentError("I-I coupling on the diagonal (m = n = " + std::to_string(m) + ")");
    d_(index(m), index(n)) = value;
    d_(index(n), index(m)) = value;
  }
  void set_si(std::size_t m, double value) { g_(index(m)) = value; }

  const Eigen::MatrixXd& ii_matrix() const noexcept { return d_; }
  const Eigen::VectorXd& si_vector() const noexcept { return g_; }

  /// Symmetric, zero diagonal, finite.
  void validate() const {
    if (!d_.allFinite() || !g_.allFinite()) throw ArgumentError("coupling graph has non-finite entries");
    if ((d_ - d_.transpose()).cwiseAbs().maxCoeff() != 0.0) throw ArgumentError("I-I couplings not symmetric");
    if (d_.diagonal().cwiseAbs().maxCoeff() != 0.0) throw ArgumentError("I-I couplings have nonzero diagonal");
  }

  /// Connectivity of the I-spin graph (S excluded).
  bool i_spins_connected() const {
    const auto n = this->n();
    if (n == 0) return true;
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const auto a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < n; ++b) {
        if (!seen[b] && d_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) != 0.0) {
          seen[b] = true;
          stack.push_back(b);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
  }

 private:
  Eigen::Index index(std::size_t k) const {
    if (k < 1 || k > n()) {
      throw IndexError("I-spin index " + std::to_string(k) + " outside 1.." + std::to_string(n()));
    }
    return static_cast<Eigen::Index>(k - 1);
  }

  Eigen::MatrixXd d_;
  Eigen::VectorXd g_;
};

/// Chain 1..N with d_mn = d1 / |m-n|^3 for |m-n| <= M and g_m = g1 / m^3 for m <= M.
inline CouplingGraph chain_couplings(std::size_t n, std::size_t m, double d1, double g1) {
  if (n < 2) throw ArgumentError("chain needs N >= 2, got " + std::to_string(n));
  if (m < 1 || m > n - 1) {
    throw ArgumentError("chain neighbor range M = " + std::to_string(m) + " outside 1.." + std::to_string(n - 1));
  }
  CouplingGraph graph(n);
  for (std::size_t a = 1; a <= n; ++a) {
    for (std::size_t b = a + 1; b <= n && b - a <= m; ++b) {
      const double sep = static_cast<double>(b - a);
      graph.set_ii(a, b, d1 / (sep * sep * sep));
    }
  }
  for (std::size_t k = 1; k <= std::min(m, n); ++k) {
    const double r = static_cast<double>(k);
    graph.set_si(k, g1 / (r * r * r));
  }
  return graph;
}

/// D1 * [sin(pi/N) / sin(pi q/N)]^3.
inline double ring_factor(std::size_t ring_size, std::size_t q, double d1) {
  const double pi = std::numbers::pi;
  const double n = static_cast<double>(ring_size);
  const double ratio = std::sin(pi / n) / std::sin(pi * static_cast<double>(q) / n);
  return d1 * ratio * ratio * ratio;
}

/// Ring of `ring_size` sites, neighbors up to separation M with indices wrapping.
inline CouplingGraph ring_couplings(std::size_t ring_size, std::size_t m, double d1) {
  if (ring_size < 3) throw ArgumentError("ring needs N >= 3, got " + std::to_string(ring_size));
  if (m < 1 || m > ring_size / 2) {
    throw ArgumentError("ring neighbor range M = " + std::to_string(m) + " outside 1.." +
                        std::to_string(ring_size / 2));
  }
  CouplingGraph graph(ring_size);
  for (std::size_t site = 1; site <= ring_size; ++site) {
    for (std::size_t q = 1; q <= m; ++q) {
      const std::size_t other = (site - 1 + q) % ring_size + 1;
      graph.set_ii(site, other, ring_factor(ring_size, q, d1));
    }
  }
  return graph;
}

/// Named hub profile or explicit values.
struct HubProfile {
  enum class Kind { uniform, inverse_cube, explicit_values };
  Kind kind = Kind::uniform;
  std::vector<double> values;

  static HubProfile uniform() { return {Kind::uniform, {}}; }
  static HubProfile inverse_cube() { return {Kind::inverse_cube, {}}; }
  static HubProfile explicit_values(std::vector<double> v) { return {Kind::explicit_values, std::move(v)}; }

  /// Values for indices 1..length with base strength `base`.  The inverse-cube
  /// preset gives base/m^3, with the hub entry (index `hub_index`, if any) at base.
  std::vector<double> resolve(std::size_t length, double base, std::size_t hub_index,
                              std::string_view what) const {
    std::vector<double> out(length);
    switch (kind) {
      case Kind::uniform:
        std::fill(out.begin(), out.end(), base);
        break;
      case Kind::inverse_cube:
        for (std::size_t k = 1; k <= length; ++k) {
          const double r = static_cast<double>(k);
          out[k - 1] = (k == hub_index) ? base : base / (r * r * r);
        }
        break;
      case Kind::explicit_values:
        if (values.size() != length) {
          throw ArgumentError(std::string(what) + " profile has " + std::to_string(values.size()) +
                              " entries, expected " + std::to_string(length));
        }
        out = values;
        break;
    }
    return out;
  }
};

/// Chain 1..N-1 (range M, d_q = d1/q^3), hub spin N coupled to chain spin m with
/// f_m, S coupled to I_m with g_m (g has N entries including g_N).
inline CouplingGraph hub_couplings(std::size_t n, std::size_t m, double d1, double g1,
                                   const HubProfile& f_profile, const HubProfile& g_profile) {
  if (n < 3) throw ArgumentError("hub cluster needs N >= 3, got " + std::to_string(n));
  if (m < 1 || m > n - 2) {
    throw ArgumentError("hub chain neighbor range M = " + std::to_string(m) + " outside 1.." +
                        std::to_string(n - 2));
  }
  const auto f = f_profile.resolve(n - 1, d1, 0, "hub f");
  const auto g = g_profile.resolve(n, g1, n, "hub g");
  CouplingGraph graph(n);
  for (std::size_t a = 1; a < n; ++a) {
    for (std::size_t b = a + 1; b < n && b - a <= m; ++b) {
      const double sep = static_cast<double>(b - a);
      graph.set_ii(a, b, d1 / (sep * sep * sep));
    }
    graph.set_ii(a, n, f[a - 1]);
  }
  for (std::size_t k = 1; k <= n; ++k) graph.set_si(k, g[k - 1]);
  return graph;
}

/// Ring of N-1 sites plus hub N (R_m to the hub, Q_m to S, Q_N S-hub), or ring of N.
inline CouplingGraph ring_hub_couplings(std::size_t n, std::size_t m, double d1, RingLayout layout,
                                        const std::vector<double>& r, const std::vector<double>& q,
                                        double q_hub) {
  const std::size_t ring_size = layout == RingLayout::ring_plus_hub ? n - 1 : n;
  if (layout == RingLayout::ring_plus_hub && n < 4) {
    throw ArgumentError("ring-plus-hub cluster needs N >= 4, got " + std::to_string(n));
  }
  const CouplingGraph ring = ring_couplings(ring_size, m, d1);
  if (q.size() != ring_size) {
    throw ArgumentError("ring Q profile has " + std::to_string(q.size()) + " entries, expected " +
                        std::to_string(ring_size));
  }
  CouplingGraph graph(n);
  for (std::size_t a = 1; a <= ring_size; ++a) {
    for (std::size_t b = a + 1; b <= ring_size; ++b) {
      if (ring.ii(a, b) != 0.0) graph.set_ii(a, b, ring.ii(a, b));
    }
    graph.set_si(a, q[a - 1]);
  }
  if (layout == RingLayout::ring_plus_hub) {
    if (r.size() != ring_size) {
      throw ArgumentError("ring R profile has " + std::to_string(r.size()) + " entries, expected " +
                          std::to_string(ring_size));
    }
    for (std::size_t a = 1; a <= ring_size; ++a) graph.set_ii(a, n, r[a - 1]);
    graph.set_si(n, q_hub);
  }
  return graph;
}

// --- model spec -------------------------------------------------------------

struct ModelSpec {
  Geometry geometry = Geometry::chain_1d;
  Interaction interaction = Interaction::full_dipolar;
  std::size_t n = 7;
  /// Neighbor range ("number of directed coupling spins").
  std::size_t m = 6;
  /// RF amplitude in units of the base coupling.
  double omega1 = 0.15;
  SpinState s_initial = SpinState::down;
  /// Base I-I coupling (d1 for chains, D1 for the ring).
  double d1 = 1.0;
  /// Base S-I coupling.
  double g1 = 1.0;
  /// End of the run grid in units of 1/d1; nullopt means 90/omega1.
  std::optional<double> t_max;
  std::size_t n_time_points = 600;

  RfConvention rf_convention = RfConvention::half;
  M2TransverseFactor m2_transverse_factor = M2TransverseFactor::omega1;
  RingEffectiveForm ring_form = RingEffectiveForm::neighbor_projector;
  RingLayout ring_layout = RingLayout::ring_plus_hub;

  // Hub (2D) profiles.
  HubProfile hub_f = HubProfile::uniform();
  HubProfile hub_g = HubProfile::inverse_cube();
  // Ring hub (3D) couplings; empty means D1 for every entry.
  std::vector<double> ring_r;
  std::vector<double> ring_q;
  std::optional<double> ring_q_hub;

  SystemLayout layout() const { return SystemLayout(n); }

  /// Coefficient multiplying (S^x + sum I^x).
  double rf_coefficient() const {
    return rf_convention == RfConvention::half ? 0.5 * omega1 : omega1;
  }

  std::size_t ring_size() const { return ring_layout == RingLayout::ring_plus_hub ? n - 1 : n; }

  double resolved_t_max() const {
    if (t_max) return *t_max;
    if (!(omega1 > 0.0)) {
      throw ConfigError("omega1 = 0 requires an explicit t_max", "t_max");
    }
    return 90.0 / omega1;
  }

  /// Uniform grid 0 .. t_max with n_time_points entries.
  std::vector<double> time_grid() const {
    const double tmax = resolved_t_max();
    std::vector<double> grid(n_time_points);
    for (std::size_t i = 0; i < n_time_points; ++i) {
      grid[i] = tmax * static_cast<double>(i) / static_cast<double>(n_time_points - 1);
    }
    return grid;
  }

  /// Throws ConfigError naming the offending key.
  void validate() const {
    if (n < 2) throw ConfigError("N must be >= 2, got " + std::to_string(n), "N");
    if (n + 1 > SystemLayout::kMaxSpins) {
      throw ConfigError("N = " + std::to_string(n) + " exceeds the dense ceiling", "N");
    }
    if (m < 1 || m > n - 1) {
      throw ConfigError("M = " + std::to_string(m) + " outside 1.." + std::to_string(n - 1), "M");
    }
    if (!(omega1 >= 0.0) || !std::isfinite(omega1)) throw ConfigError("omega1 must be finite and >= 0", "omega1");
    if (!std::isfinite(d1) || !std::isfinite(g1)) throw ConfigError("couplings must be finite", "d1");
    if (n_time_points < 2) throw ConfigError("n_time_points must be >= 2", "n_time_points");
    if (t_max && !(*t_max > 0.0 && std::isfinite(*t_max))) throw ConfigError("t_max must be > 0", "t_max");
    switch (geometry) {
      case Geometry::chain_1d:
        break;
      case Geometry::hub_2d:
        if (n < 3) throw ConfigError("hub_2d needs N >= 3", "N");
        if (m > n - 2) throw ConfigError("hub_2d chain range M must be <= N-2", "M");
        break;
      case Geometry::ring_3d:
        if (ring_layout == RingLayout::ring_plus_hub && n < 4) {
          throw ConfigError("ring_3d with a hub needs N >= 4", "N");
        }
        if (ring_size() < 3) throw ConfigError("ring_3d needs at least 3 ring sites", "N");
        if (m > ring_size() / 2) {
          throw ConfigError("ring_3d range M must be <= " + std::to_string(ring_size() / 2), "M");
        }
        break;
    }
    if (interaction == Interaction::effective) {
      const bool ok = (geometry == Geometry::chain_1d && m == 1 && n >= 3) ||
                      (geometry == Geometry::chain_1d && m == 2 && n >= 5) ||
                      (geometry == Geometry::hub_2d && m == 1) || geometry == Geometry::ring_3d;
      if (!ok) {
        throw ConfigError(
            "effective Hamiltonian not available for geometry=" + to_string(geometry) +
                " M=" + std::to_string(m) +
                "; supported: (chain_1d, M=1, N>=3), (chain_1d, M=2, N>=5), (hub_2d, M=1), "
                "(ring_3d, any M <= ring/2)",
            "interaction");
      }
    }
  }
};

/// Coupling graph implied by a spec.
inline CouplingGraph graph_for(const ModelSpec& spec) {
  spec.validate();
  switch (spec.geometry) {
    case Geometry::chain_1d:
      return chain_couplings(spec.n, spec.m, spec.d1, spec.g1);
    case Geometry::hub_2d:
      return hub_couplings(spec.n, spec.m, spec.d1, spec.g1, spec.hub_f, spec.hub_g);
    case Geometry::ring_3d: {
      const auto rs = spec.ring_size();
      const auto r = spec.ring_r.empty() ? std::vector<double>(rs, spec.d1) : spec.ring_r;
      const auto q = spec.ring_q.empty() ? std::vector<double>(rs, spec.d1) : spec.ring_q;
      return ring_hub_couplings(spec.n, spec.m, spec.d1, spec.ring_layout, r, q,
                                spec.ring_q_hub.value_or(spec.d1));
    }
  }
  throw ConfigError("unknown geometry", "geometry");
}

/// Human-readable list of the modeling assumptions behind a spec, echoed into outputs.
inline std::vector<std::string> model_assumptions(const ModelSpec& spec) {
  std::vector<std::string> out;
  out.push_back("Hartmann-Hahn matching: S and I RF amplitudes both equal omega1");
  out.push_back("RF term coefficient " + std::string(spec.rf_convention == RfConvention::half
                                                         ? "omega1/2 (rotating-frame form)"
                                                         : "omega1 (nutation-frequency form)"));
  out.push_back("couplings in units of d1; g1/d1 = " + std::to_string(spec.g1 / spec.d1));
  if (spec.geometry == Geometry::hub_2d) {
    out.push_back("hub f profile: " + std::string(spec.hub_f.kind == HubProfile::Kind::uniform ? "uniform d1"
                                                  : spec.hub_f.kind == HubProfile::Kind::inverse_cube
                                                      ? "d1/m^3"
                                                      : "explicit"));
    out.push_back("hub g profile: " + std::string(spec.hub_g.kind == HubProfile::Kind::uniform ? "uniform g1"
                                                  : spec.hub_g.kind == HubProfile::Kind::inverse_cube
                                                      ? "g1/m^3 with g_N = g1"
                                                      : "explicit"));
  }
  if (spec.geometry == Geometry::ring_3d) {
    out.push_back("ring layout: " + to_string(spec.ring_layout));
    out.push_back(std::string("ring hub couplings R, Q, Q_N: ") +
                  (spec.ring_r.empty() && spec.ring_q.empty() && !spec.ring_q_hub ? "all D1" : "explicit"));
  }
  if (spec.interaction == Interaction::effective) {
    if (spec.geometry == Geometry::chain_1d && spec.m == 1) {
      out.push_back("M=1 chain effective: bare g in the S^z term read as g1");
    }
    if (spec.geometry == Geometry::chain_1d && spec.m == 2) {
      out.push_back("M=2 chain effective: I_{N-1}^z coefficient -(d2/2) (stray t dropped)");
      out.push_back("M=2 chain effective: I_2^x and I_{N-1}^x prefactor " +
                    std::string(spec.m2_transverse_factor == M2TransverseFactor::omega1 ? "omega1/4" : "1/4"));
    }
    if (spec.geometry == Geometry::ring_3d) {
      out.push_back("ring effective form: " + to_string(spec.ring_form));
    }
  }
  return out;
}

// --- Hamiltonians -----------------------------------------------------------

namespace detail {

/// sum_{m<n} d_mn coupling(form) + sum_m g_m S^z I_m^z into `h`.
inline void add_graph_couplings(Matrix& h, const SystemLayout& layout, const CouplingGraph& graph,
                                CouplingForm form) {
  const auto n = graph.n();
  for (std::size_t a = 1; a <= n; ++a) {
    for (std::size_t b = a + 1; b <= n; ++b) {
      const double d = graph.ii(a, b);
      if (d != 0.0) add_two_spin_coupling(h, layout, a, b, form, d);
    }
    const double g = graph.si(a);
    if (g != 0.0) add_two_spin_coupling(h, layout, 0, a, CouplingForm::zz, g);
  }
}

inline void add_rf(Matrix& h, const SystemLayout& layout, double coeff) {
  if (coeff == 0.0) return;
  for (std::size_t s = 0; s < layout.total_spins(); ++s) {
    add_spin_product(h, layout, coeff, {SpinFactor{s, Axis::x}});
  }
}

/// M = 1 chain.  `w` is the omega1 of the (omega1/2)-convention formulas.
inline Matrix chain_effective_m1(const SystemLayout& layout, const CouplingGraph& graph, double w) {
  const std::size_t n = graph.n();
  const double d1 = graph.ii(1, 2);
  const double g1 = graph.si(1);
  Matrix h = zero_matrix(layout);
  const std::size_t S = 0;
  add_spin_product(h, layout, 0.5 * g1, {SpinFactor{S, Axis::z}});
  add_spin_product(h, layout, -0.5 * (d1 + g1), {SpinFactor{1, Axis::z}});
  add_spin_product(h, layout, 0.5 * d1, {SpinFactor{n, Axis::z}});
  add_modulated_term(h, layout, S, Axis::x, w / 8.0,
                     [](std::span<const double> z) { return 1.0 - 2.0 * z[1]; });
  add_modulated_term(h, layout, 1, Axis::x, w / 8.0, [](std::span<const double> z) {
    return (1.0 - 2.0 * z[2]) * (1.0 + 2.0 * z[0]);
  });
  add_modulated_term(h, layout, n, Axis::x, w / 8.0,
                     [n](std::span<const double> z) { return 1.0 - 2.0 * z[n - 1]; });
  for (std::size_t k = 2; k + 2 <= n; ++k) {
    add_modulated_term(h, layout, k, Axis::x, w / 4.0, [k](std::span<const double> z) {
      return 1.0 - 4.0 * z[k - 1] * z[k + 1];
    });
  }
  return h;
}

/// M = 2 chain.
inline Matrix chain_effective_m2(const SystemLayout& layout, const CouplingGraph& graph, double w,
                                 M2TransverseFactor factor) {
  const std::size_t n = graph.n();
  const double d1 = graph.ii(1, 2);
  const double d2 = graph.ii(1, 3);
  const double g1 = graph.si(1);
  const double g2 = graph.si(2);
  const double bare = factor == M2TransverseFactor::omega1 ? w / 4.0 : 0.25;
  const std::size_t S = 0;
  Matrix h = zero_matrix(layout);
  add_spin_product(h, layout, 0.5 * (g1 - g2), {SpinFactor{S, Axis::z}});
  add_spin_product(h, layout, 0.5 * (d2 - d1 - g1), {SpinFactor{1, Axis::z}});
  add_spin_product(h, layout, 0.5 * (d2 - g2), {SpinFactor{2, Axis::z}});
  add_spin_product(h, layout, -0.5 * d2, {SpinFactor{n - 1, Axis::z}});
  add_spin_product(h, layout, 0.5 * (d1 - d2), {SpinFactor{n, Axis::z}});

  add_modulated_term(h, layout, S, Axis::x, w / 8.0, [](std::span<const double> z) {
    return (1.0 - 4.0 * z[2] * z[1]) - 2.0 * (z[1] - z[2]);
  });
  add_modulated_term(h, layout, 1, Axis::x, w / 8.0, [](std::span<const double> z) {
    return ((1.0 - 4.0 * z[3] * z[2]) - 2.0 * (z[2] - z[3])) * (1.0 + 2.0 * z[0]);
  });
  add_modulated_term(h, layout, 2, Axis::x, bare, [](std::span<const double> z) {
    return (1.0 - 4.0 * z[3] * z[1]) * ((1.0 - 4.0 * z[4] * z[0]) + 2.0 * (z[4] - z[0]));
  });
  add_modulated_term(h, layout, n - 1, Axis::x, bare, [n](std::span<const double> z) {
    return (1.0 + 2.0 * z[n - 3]) * (1.0 - 4.0 * z[n - 2] * z[n]);
  });
  add_modulated_term(h, layout, n, Axis::x, w / 8.0, [n](std::span<const double> z) {
    return (1.0 - 4.0 * z[n - 2] * z[n - 1]) - 2.0 * (z[n - 1] - z[n - 2]);
  });
  for (std::size_t k = 3; k + 3 <= n; ++k) {
    add_modulated_term(h, layout, k, Axis::x, w / 4.0, [k](std::span<const double> z) {
      return (1.0 - 4.0 * z[k - 1] * z[k + 1]) * (1.0 - 4.0 * z[k - 2] * z[k + 2]);
    });
  }
  return h;
}

/// Hub, nearest neighbors.
inline Matrix hub_effective(const SystemLayout& layout, const CouplingGraph& graph, double w) {
  const std::size_t n = graph.n();
  Matrix h = zero_matrix(layout);
  for (std::size_t k = 1; k < n; ++k) {
    const double f = graph.ii(k, n);
    const double g = graph.si(k);
    add_spin_product(h, layout, 0.5 * (f - g), {SpinFactor{k, Axis::z}});
    add_modulated_term(h, layout, k, Axis::x, w / 4.0, [n](std::span<const double> z) {
      return (1.0 - 4.0 * z[n] * z[0]) - 2.0 * (z[n] - z[0]);
    });
  }
  return h;
}

/// Ring (with or without hub).
inline Matrix ring_effective(const SystemLayout& layout, const CouplingGraph& graph, double w,
                             std::size_t range, std::size_t ring_size, RingEffectiveForm form) {
  const std::size_t n = graph.n();
  const bool has_hub = ring_size < n;
  Matrix h = zero_matrix(layout);
  auto site = [ring_size](std::size_t m, long offset) {
    const long rs = static_cast<long>(ring_size);
    const long idx = ((static_cast<long>(m) - 1 + offset) % rs + rs) % rs;
    return static_cast<std::size_t>(idx + 1);
  };
  for (std::size_t m = 1; m <= ring_size; ++m) {
    if (form == RingEffectiveForm::neighbor_projector) {
      add_modulated_term(h, layout, m, Axis::x, w / 2.0, [&, m](std::span<const double> z) {
        double p = 1.0;
        for (std::size_t q = 1; q <= range; ++q) {
          p *= 1.0 - 4.0 * z[site(m, -static_cast<long>(q))] * z[site(m, static_cast<long>(q))];
        }
        return p;
      });
    } else {
      add_modulated_term(h, layout, m, Axis::x, w / 2.0, [&, m](std::span<const double> z) {
        double p = 1.0;
        for (std::size_t q = 1; q <= range; ++q) p *= 1.0 - z[m] * z[site(m, static_cast<long>(q))];
        return p;
      });
    }
  }
  if (form == RingEffectiveForm::literal) {
    // The printed ordering I^x f(I^z) is not Hermitian; keep its Hermitian part.
    h = 0.5 * (h + h.adjoint()).eval();
  }
  if (has_hub) {
    for (std::size_t m = 1; m <= ring_size; ++m) {
      const double r = graph.ii(m, n);
      if (r != 0.0) add_two_spin_coupling(h, layout, m, n, CouplingForm::zz, r);
    }
  }
  for (std::size_t m = 1; m <= n; ++m) {
    const double q = graph.si(m);
    if (q != 0.0) add_two_spin_coupling(h, layout, 0, m, CouplingForm::zz, q);
  }
  return h;
}

}  // namespace detail

/// Hamiltonian of `spec` on the 2^(N+1)-dimensional space.
inline HermitianOperator build_hamiltonian(const ModelSpec& spec, const CouplingGraph& graph) {
  spec.validate();
  graph.validate();
  if (graph.n() != spec.n) {
    throw ConfigError("coupling graph has N = " + std::to_string(graph.n()) + " but spec has N = " +
                          std::to_string(spec.n),
                      "N");
  }
  const SystemLayout layout = spec.layout();
  const double rf = spec.rf_coefficient();
  // The closed-form effective Hamiltonians are written for the (omega1/2) RF term.
  const double w = 2.0 * rf;
  Matrix h;
  switch (spec.interaction) {
    case Interaction::full_dipolar:
    case Interaction::zz_weak: {
      h = zero_matrix(layout);
      detail::add_rf(h, layout, rf);
      detail::add_graph_couplings(
          h, layout, graph,
          spec.interaction == Interaction::full_dipolar ? CouplingForm::full_secular : CouplingForm::zz);
      break;
    }
    case Interaction::effective:
      switch (spec.geometry) {
        case Geometry::chain_1d:
          h = spec.m == 1 ? detail::chain_effective_m1(layout, graph, w)
                          : detail::chain_effective_m2(layout, graph, w, spec.m2_transverse_factor);
          break;
        case Geometry::hub_2d:
          h = detail::hub_effective(layout, graph, w);
          break;
        case Geometry::ring_3d:
          h = detail::ring_effective(layout, graph, w, spec.m, spec.ring_size(), spec.ring_form);
          break;
      }
      break;
  }
  return HermitianOperator(std::move(h));
}

inline HermitianOperator build_hamiltonian(const ModelSpec& spec) {
  return build_hamiltonian(spec, graph_for(spec));
}

}  // namespace spinamp
