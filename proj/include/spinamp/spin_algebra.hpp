#pragma once

// Spin-1/2 operator algebra on the (N+1)-spin Hilbert space.
//
// Basis convention: computational basis states are indexed by N+1 bits, slot 0
// (the target spin S) is the most significant bit and slot k (spin I_k) the
// k-th bit below it.  Bit value 0 is "up" (aligned with the static field), so
// the all-up state is basis vector 0.  Operators carry angular-momentum
// normalization (Pauli / 2).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spinamp/errors.hpp"

namespace spinamp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;

enum class Axis { x, y, z };

inline char axis_name(Axis axis) {
  switch (axis) {
    case Axis::x: return 'x';
    case Axis::y: return 'y';
    case Axis::z: return 'z';
  }
  return '?';
}

/// Largest absolute entry.
inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

class SystemLayout {
 public:
  static constexpr std::size_t kMaxSpins = 13;

  explicit SystemLayout(std::size_t n_i_spins) : n_i_spins_(n_i_spins) {
    if (total_spins() > kMaxSpins) {
      throw ArgumentError("layout with " + std::to_string(total_spins()) +
                          " spins exceeds the dense ceiling of " + std::to_string(kMaxSpins));
    }
  }

  std::size_t n_i_spins() const noexcept { return n_i_spins_; }
  std::size_t total_spins() const noexcept { return n_i_spins_ + 1; }
  std::size_t dimension() const noexcept { return std::size_t{1} << total_spins(); }

  static constexpr std::size_t s_slot() noexcept { return 0; }

  /// Slot of I_k, k in 1..N.
  std::size_t i_slot(std::size_t k) const {
    if (k < 1 || k > n_i_spins_) {
      throw IndexError("I-spin index " + std::to_string(k) + " outside 1.." +
                       std::to_string(n_i_spins_));
    }
    return k;
  }

  void check_slot(std::size_t slot) const {
    if (slot >= total_spins()) {
      throw IndexError("slot " + std::to_string(slot) + " outside 0.." +
                       std::to_string(n_i_spins_));
    }
  }

  std::uint64_t mask(std::size_t slot) const {
    check_slot(slot);
    return std::uint64_t{1} << (total_spins() - 1 - slot);
  }

  /// Eigenvalue of the z operator of `slot` on basis state `basis`: +1/2 for up, -1/2 for down.
  double z_value(std::uint64_t basis, std::size_t slot) const {
    return (basis & mask(slot)) ? -0.5 : 0.5;
  }

  std::string slot_label(std::size_t slot) const {
    check_slot(slot);
    return slot == 0 ? std::string("S") : "I" + std::to_string(slot);
  }

  friend bool operator==(const SystemLayout&, const SystemLayout&) = default;

 private:
  std::size_t n_i_spins_;
};

/// Dense Hermitian matrix; Hermiticity is checked at construction.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(Matrix entries, double tolerance = kHermitianTolerance)
      : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
      throw ValidationError("operator matrix is not square");
    }
    const double skew = max_abs(entries_ - entries_.adjoint());
    if (!(skew < tolerance)) {
      throw ValidationError("operator is not Hermitian: max |A - A^+| = " + std::to_string(skew));
    }
  }

  /// Projects an arithmetic result onto its Hermitian part, (A + A^+)/2.  Inputs
  /// whose anti-Hermitian part exceeds `tolerance` are rejected.
  static HermitianOperator symmetrized(const Matrix& entries, double tolerance = 1e-9) {
    HermitianOperator out(Matrix(0, 0));
    if (entries.rows() != entries.cols()) {
      throw ValidationError("operator matrix is not square");
    }
    const double skew = max_abs(entries - entries.adjoint());
    if (!(skew < tolerance)) {
      throw ValidationError("arithmetic result is not Hermitian: max |A - A^+| = " +
                            std::to_string(skew));
    }
    out.entries_ = 0.5 * (entries + entries.adjoint());
    return out;
  }

  static HermitianOperator zero(std::size_t dim) {
    return HermitianOperator(Matrix::Zero(static_cast<Eigen::Index>(dim),
                                          static_cast<Eigen::Index>(dim)));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& matrix() const noexcept { return entries_; }

  HermitianOperator& operator+=(const HermitianOperator& other) {
    check_same_dim(other);
    entries_ += other.entries_;
    return *this;
  }
  HermitianOperator& operator-=(const HermitianOperator& other) {
    check_same_dim(other);
    entries_ -= other.entries_;
    return *this;
  }
  HermitianOperator& operator*=(double s) {
    entries_ *= s;
    return *this;
  }

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) {
    return a += b;
  }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) {
    return a -= b;
  }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }

 private:
  void check_same_dim(const HermitianOperator& other) const {
    if (other.dim() != dim()) {
      throw ArgumentError("operator dimension mismatch: " + std::to_string(dim()) + " vs " +
                          std::to_string(other.dim()));
    }
  }

  Matrix entries_;
};

class UnitaryOperator {
 public:
  explicit UnitaryOperator(Matrix entries, double tolerance = kUnitaryTolerance)
      : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
      throw ValidationError("unitary matrix is not square");
    }
    const Matrix defect =
        entries_.adjoint() * entries_ - Matrix::Identity(entries_.rows(), entries_.cols());
    const double err = max_abs(defect);
    if (!(err < tolerance)) {
      throw ValidationError("operator is not unitary: max |U^+U - 1| = " + std::to_string(err));
    }
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& matrix() const noexcept { return entries_; }

  friend UnitaryOperator operator*(const UnitaryOperator& a, const UnitaryOperator& b) {
    return UnitaryOperator(a.entries_ * b.entries_);
  }

 private:
  Matrix entries_;
};

/// One factor of a spin-operator product: the `axis` component of the spin in `slot`.
struct SpinFactor {
  std::size_t slot;
  Axis axis;
};

namespace detail {

inline void check_distinct_slots(const SystemLayout& layout, std::span<const SpinFactor> factors) {
  std::uint64_t seen = 0;
  for (const auto& f : factors) {
    const auto m = layout.mask(f.slot);
    if (seen & m) {
      throw ArgumentError("spin product repeats slot " + std::to_string(f.slot));
    }
    seen |= m;
  }
}

/// Column-wise action of a product of single-spin operators on distinct slots:
/// basis state |b> maps to amplitude * |b ^ flip_mask>.
struct ProductAction {
  std::uint64_t flip_mask = 0;

  Complex amplitude(const SystemLayout& layout, std::span<const SpinFactor> factors,
                    std::uint64_t basis) const {
    Complex amp{1.0, 0.0};
    for (const auto& f : factors) {
      const bool down = (basis & layout.mask(f.slot)) != 0;
      switch (f.axis) {
        case Axis::x: amp *= 0.5; break;
        // I^y |up> = (i/2)|down>, I^y |down> = (-i/2)|up>
        case Axis::y: amp *= down ? Complex{0.0, -0.5} : Complex{0.0, 0.5}; break;
        case Axis::z: amp *= down ? -0.5 : 0.5; break;
      }
    }
    return amp;
  }
};

inline ProductAction product_action(const SystemLayout& layout,
                                    std::span<const SpinFactor> factors) {
  ProductAction action;
  for (const auto& f : factors) {
    if (f.axis != Axis::z) action.flip_mask |= layout.mask(f.slot);
  }
  return action;
}

}  // namespace detail

/// Adds coeff * (product of factors) into `target`.  Slots must be distinct.
inline void add_spin_product(Matrix& target, const SystemLayout& layout, Complex coeff,
                             std::span<const SpinFactor> factors) {
  detail::check_distinct_slots(layout, factors);
  const auto action = detail::product_action(layout, factors);
  const auto dim = layout.dimension();
  for (std::uint64_t b = 0; b < dim; ++b) {
    const auto row = b ^ action.flip_mask;
    target(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(b)) +=
        coeff * action.amplitude(layout, factors, b);
  }
}

inline void add_spin_product(Matrix& target, const SystemLayout& layout, Complex coeff,
                             std::initializer_list<SpinFactor> factors) {
  add_spin_product(target, layout, coeff, std::span<const SpinFactor>(factors.begin(), factors.size()));
}

/// Function of the z eigenvalues of a basis state, z[slot] in {+1/2, -1/2}.
using ZFunction = std::function<double(std::span<const double> z)>;

/// Adds coeff * X * diag(f(z)) where X is the single-spin operator `axis` at `slot`
/// and f is evaluated on the *input* basis state.  When f does not depend on
/// `slot` the result is Hermitian; otherwise the caller must symmetrize.
inline void add_modulated_term(Matrix& target, const SystemLayout& layout, std::size_t slot,
                               Axis axis, double coeff, const ZFunction& f) {
  const SpinFactor factor{slot, axis};
  const std::span<const SpinFactor> factors(&factor, 1);
  const auto action = detail::product_action(layout, factors);
  const auto n = layout.total_spins();
  std::vector<double> z(n);
  for (std::uint64_t b = 0; b < layout.dimension(); ++b) {
    for (std::size_t s = 0; s < n; ++s) z[s] = layout.z_value(b, s);
    const double weight = f(z);
    if (weight == 0.0) continue;
    target(static_cast<Eigen::Index>(b ^ action.flip_mask), static_cast<Eigen::Index>(b)) +=
        coeff * weight * action.amplitude(layout, factors, b);
  }
}

/// Adds diag(f(z)) into `target`.
inline void add_diagonal(Matrix& target, const SystemLayout& layout, const ZFunction& f) {
  const auto n = layout.total_spins();
  std::vector<double> z(n);
  for (std::uint64_t b = 0; b < layout.dimension(); ++b) {
    for (std::size_t s = 0; s < n; ++s) z[s] = layout.z_value(b, s);
    target(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) += f(z);
  }
}

inline Matrix zero_matrix(const SystemLayout& layout) {
  const auto d = static_cast<Eigen::Index>(layout.dimension());
  return Matrix::Zero(d, d);
}

/// I_slot^axis (S^axis for slot 0) embedded in the full space.
inline HermitianOperator single_spin_operator(const SystemLayout& layout, std::size_t slot,
                                              Axis axis) {
  layout.check_slot(slot);
  Matrix m = zero_matrix(layout);
  add_spin_product(m, layout, 1.0, {SpinFactor{slot, axis}});
  return HermitianOperator(std::move(m));
}

enum class CouplingForm { zz, full_secular };

/// Adds strength * coupling(a, b) into `target`.
inline void add_two_spin_coupling(Matrix& target, const SystemLayout& layout, std::size_t a,
                                  std::size_t b, CouplingForm form, double strength) {
  layout.check_slot(a);
  layout.check_slot(b);
  if (a == b) throw ArgumentError("two-spin coupling needs distinct slots, got " + std::to_string(a));
  add_spin_product(target, layout, strength, {SpinFactor{a, Axis::z}, SpinFactor{b, Axis::z}});
  if (form == CouplingForm::full_secular) {
    add_spin_product(target, layout, -0.5 * strength, {SpinFactor{a, Axis::x}, SpinFactor{b, Axis::x}});
    add_spin_product(target, layout, -0.5 * strength, {SpinFactor{a, Axis::y}, SpinFactor{b, Axis::y}});
  }
}

/// strength * I_a^z I_b^z (zz) or strength * [I_a^z I_b^z - (I_a^x I_b^x + I_a^y I_b^y)/2].
inline HermitianOperator two_spin_coupling(const SystemLayout& layout, std::size_t slot_a,
                                           std::size_t slot_b, CouplingForm form, double strength) {
  Matrix m = zero_matrix(layout);
  add_two_spin_coupling(m, layout, slot_a, slot_b, form, strength);
  return HermitianOperator(std::move(m));
}

/// Sum of the z operators of all N+1 spins.
inline HermitianOperator total_z(const SystemLayout& layout) {
  Matrix m = zero_matrix(layout);
  add_diagonal(m, layout, [](std::span<const double> z) {
    double s = 0.0;
    for (double v : z) s += v;
    return s;
  });
  return HermitianOperator(std::move(m));
}

inline Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw ArgumentError("commutator: dimension mismatch");
  }
  return a * b - b * a;
}

inline Matrix commutator(const HermitianOperator& a, const HermitianOperator& b) {
  return commutator(a.matrix(), b.matrix());
}

/// H = V diag(values) V^+.
struct SpectralDecomposition {
  RealVector values;
  Matrix vectors;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(values.size()); }

  /// exp(-i H t).
  Matrix propagator(double t) const {
    Vector phases(values.size());
    for (Eigen::Index j = 0; j < values.size(); ++j) {
      phases(j) = std::exp(Complex{0.0, -values(j) * t});
    }
    return vectors * phases.asDiagonal() * vectors.adjoint();
  }
};

inline SpectralDecomposition diagonalize(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigendecomposition failed");
  }
  return SpectralDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

/// exp(-i H t) via eigendecomposition of H.
inline UnitaryOperator hermitian_exponential(const HermitianOperator& h, double t) {
  if (!std::isfinite(t)) throw ArgumentError("hermitian_exponential: non-finite time");
  return UnitaryOperator(diagonalize(h).propagator(t));
}

/// Validating overload for raw matrices.
inline UnitaryOperator hermitian_exponential(const Matrix& h, double t) {
  return hermitian_exponential(HermitianOperator(h), t);
}

// ---------------------------------------------------------------------------
// Expansion in the labeled basis of spin-operator products.

struct OperatorTerm {
  std::vector<char> axes;  // one of 'i','x','y','z' per slot
  /// Coefficient of the product of spin operators (each Pauli/2), identity slots omitted.
  Complex coefficient;

  std::vector<SpinFactor> factors() const {
    std::vector<SpinFactor> out;
    for (std::size_t s = 0; s < axes.size(); ++s) {
      if (axes[s] == 'x') out.push_back({s, Axis::x});
      if (axes[s] == 'y') out.push_back({s, Axis::y});
      if (axes[s] == 'z') out.push_back({s, Axis::z});
    }
    return out;
  }

  bool transverse() const {
    return std::any_of(axes.begin(), axes.end(), [](char c) { return c == 'x' || c == 'y'; });
  }

  /// e.g. "S^x I2^z"; "1" for the identity.
  std::string label() const {
    std::string out;
    for (std::size_t s = 0; s < axes.size(); ++s) {
      if (axes[s] == 'i') continue;
      if (!out.empty()) out += ' ';
      out += (s == 0 ? std::string("S") : "I" + std::to_string(s));
      out += '^';
      out += axes[s];
    }
    return out.empty() ? std::string("1") : out;
  }
};

/// Expands `a` as sum_c coefficient * prod(I^axis), dropping terms with |c| <= threshold.
/// Each coefficient is obtained from a trace over one permutation pattern, O(dim) per term.
inline std::vector<OperatorTerm> expand_in_spin_products(const SystemLayout& layout,
                                                         const Matrix& a, double threshold = 1e-13) {
  const auto n = layout.total_spins();
  const auto dim = layout.dimension();
  if (static_cast<std::size_t>(a.rows()) != dim || a.cols() != a.rows()) {
    throw ArgumentError("expand_in_spin_products: dimension mismatch");
  }
  if (n > 10) throw ArgumentError("expand_in_spin_products supports at most 10 spins");
  std::vector<OperatorTerm> out;
  std::size_t n_strings = std::size_t{1} << (2 * n);
  std::vector<SpinFactor> factors;
  std::vector<char> axes(n);
  for (std::size_t code = 0; code < n_strings; ++code) {
    factors.clear();
    for (std::size_t s = 0; s < n; ++s) {
      const auto digit = (code >> (2 * (n - 1 - s))) & 3u;
      static constexpr char kNames[] = {'i', 'x', 'y', 'z'};
      axes[s] = kNames[digit];
      if (digit == 1) factors.push_back({s, Axis::x});
      if (digit == 2) factors.push_back({s, Axis::y});
      if (digit == 3) factors.push_back({s, Axis::z});
    }
    // Q = prod(I^axis) maps |b ^ f> to amplitude * |b>, so Tr(Q A) = sum_b Q[b, b^f] A[b^f, b].
    const auto action = detail::product_action(layout, factors);
    Complex trace{0.0, 0.0};
    for (std::uint64_t b = 0; b < dim; ++b) {
      const auto col = b ^ action.flip_mask;
      const Complex p_elem = action.amplitude(layout, factors, col);
      trace += p_elem * a(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(b));
    }
    // Tr(Q Q) = dim / 4^k
    const double k = static_cast<double>(factors.size());
    const Complex coeff = trace * std::pow(4.0, k) / static_cast<double>(dim);
    if (std::abs(coeff) > threshold) out.push_back(OperatorTerm{axes, coeff});
  }
  return out;
}

}  // namespace spinamp
