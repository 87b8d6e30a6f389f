#pragma once

// Density-matrix preparation, exact evolution from one eigendecomposition, and
// the per-spin polarization traces P_k(t) = Tr(I_k^z rho(t)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spinamp/errors.hpp"
#include "spinamp/models.hpp"
#include "spinamp/spin_algebra.hpp"

namespace spinamp {

inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kConservationTolerance = 1e-10;

class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols()) throw ValidationError("density matrix is not square");
    const double skew = max_abs(rho_ - rho_.adjoint());
    if (!(skew < kHermitianTolerance)) {
      throw ValidationError("density matrix is not Hermitian: " + std::to_string(skew));
    }
    const double tr_err = std::abs(rho_.trace() - Complex{1.0, 0.0});
    if (!(tr_err < kTraceTolerance)) {
      throw ValidationError("density matrix trace differs from 1 by " + std::to_string(tr_err));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho_ + rho_.adjoint()));
    if (solver.eigenvalues().minCoeff() < -1e-10) {
      throw ValidationError("density matrix has a negative eigenvalue " +
                            std::to_string(solver.eigenvalues().minCoeff()));
    }
  }

  /// |psi><psi| for a normalized state.
  static DensityMatrix pure(const Vector& psi) {
    if (std::abs(psi.squaredNorm() - 1.0) > kTraceTolerance) {
      throw ValidationError("pure state is not normalized");
    }
    return DensityMatrix(psi * psi.adjoint());
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
  const Matrix& matrix() const noexcept { return rho_; }
  double purity() const { return (rho_ * rho_).trace().real(); }

  /// Weighted eigenvectors with weight above `cutoff`.
  std::vector<std::pair<double, Vector>> components(double cutoff = 1e-14) const {
    std::vector<std::pair<double, Vector>> out;
    // Computational-basis projectors are the common case; avoid the eigensolver for them.
    bool diagonal_rank1 = false;
    Eigen::Index hot = 0;
    {
      Matrix off = rho_;
      off.diagonal().setZero();
      if (max_abs(off) == 0.0) {
        rho_.diagonal().real().maxCoeff(&hot);
        diagonal_rank1 = std::abs(rho_(hot, hot) - Complex{1.0, 0.0}) < kTraceTolerance;
      }
    }
    if (diagonal_rank1) {
      Vector e = Vector::Zero(rho_.rows());
      e(hot) = 1.0;
      out.emplace_back(1.0, std::move(e));
      return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_);
    for (Eigen::Index j = 0; j < solver.eigenvalues().size(); ++j) {
      const double p = solver.eigenvalues()(j);
      if (p > cutoff) out.emplace_back(p, solver.eigenvectors().col(j));
    }
    return out;
  }

 private:
  Matrix rho_;
};

/// Basis index of "all I spins up, S in `s`".
inline std::uint64_t initial_basis_index(const SystemLayout& layout, SpinState s) {
  return s == SpinState::down ? layout.mask(SystemLayout::s_slot()) : 0;
}

/// Every I spin pure up, S pure up or down.
inline DensityMatrix initial_state(const SystemLayout& layout, SpinState s_initial) {
  Matrix rho = zero_matrix(layout);
  const auto idx = static_cast<Eigen::Index>(initial_basis_index(layout, s_initial));
  rho(idx, idx) = 1.0;
  return DensityMatrix(std::move(rho));
}

struct PolarizationTrace {
  /// Time in units of 1/d1, and the same axis multiplied by omega1.
  std::vector<double> times;
  std::vector<double> times_omega1;
  /// Row 0 is P_S, row k is P_k.
  Eigen::MatrixXd per_spin;
  /// P(t) = sum_k P_k(t) over I spins only.
  std::vector<double> total_i;
  /// P(t) - P(0).
  std::vector<double> delta_p;

  // Integrity diagnostics, one entry per grid point.
  std::vector<double> total_z;  // all N+1 spins
  std::vector<double> trace;
  std::vector<double> purity;
  std::vector<double> energy;

  std::size_t n_i_spins() const noexcept { return static_cast<std::size_t>(per_spin.rows()) - 1; }
  std::size_t size() const noexcept { return times.size(); }

  double polarization(std::size_t slot, std::size_t i) const {
    return per_spin(static_cast<Eigen::Index>(slot), static_cast<Eigen::Index>(i));
  }

  static double max_drift(const std::vector<double>& series) {
    double worst = 0.0;
    for (double v : series) worst = std::max(worst, std::abs(v - series.front()));
    return worst;
  }
  double max_trace_drift() const { return max_drift(trace); }
  double max_purity_drift() const { return max_drift(purity); }
  double max_energy_drift() const { return max_drift(energy); }
  double max_total_z_drift() const { return max_drift(total_z); }

  /// max over t, k of |P_k(t) - P_k(0)|, I spins and S.
  double max_polarization_change() const {
    double worst = 0.0;
    for (Eigen::Index s = 0; s < per_spin.rows(); ++s) {
      for (Eigen::Index i = 0; i < per_spin.cols(); ++i) {
        worst = std::max(worst, std::abs(per_spin(s, i) - per_spin(s, 0)));
      }
    }
    return worst;
  }
};

inline void check_time_grid(std::span<const double> grid) {
  if (grid.empty()) throw ArgumentError("time grid is empty");
  if (grid.front() != 0.0) throw ArgumentError("time grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ArgumentError("time grid must be strictly increasing");
  }
}

/// Exact propagation from a single eigendecomposition of H.
class Evolver {
 public:
  explicit Evolver(HermitianOperator h) : h_(std::move(h)), spectrum_(diagonalize(h_)) {}

  const HermitianOperator& hamiltonian() const noexcept { return h_; }
  const SpectralDecomposition& spectrum() const noexcept { return spectrum_; }

  /// rho(t) = U(t) rho0 U^+(t).
  Matrix state_at(const DensityMatrix& rho0, double t) const {
    check_dim(rho0);
    const Matrix u = spectrum_.propagator(t);
    return u * rho0.matrix() * u.adjoint();
  }

  PolarizationTrace polarizations(const DensityMatrix& rho0, std::span<const double> grid,
                                  double omega1) const {
    check_dim(rho0);
    check_time_grid(grid);
    const auto dim = static_cast<Eigen::Index>(h_.dim());
    const auto n_spins = static_cast<std::size_t>(std::llround(std::log2(static_cast<double>(dim))));
    const SystemLayout layout(n_spins - 1);
    const auto n_t = grid.size();

    // z eigenvalue table: zs(slot, b)
    Eigen::MatrixXd zs(static_cast<Eigen::Index>(n_spins), dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
      for (std::size_t s = 0; s < n_spins; ++s) {
        zs(static_cast<Eigen::Index>(s), b) = layout.z_value(static_cast<std::uint64_t>(b), s);
      }
    }

    const auto comps = rho0.components();
    std::vector<Vector> coeffs;
    coeffs.reserve(comps.size());
    for (const auto& [p, phi] : comps) coeffs.push_back(spectrum_.vectors.adjoint() * phi);

    PolarizationTrace out;
    out.times.assign(grid.begin(), grid.end());
    out.times_omega1.resize(n_t);
    out.per_spin.resize(static_cast<Eigen::Index>(n_spins), static_cast<Eigen::Index>(n_t));
    out.total_i.resize(n_t);
    out.delta_p.resize(n_t);
    out.total_z.resize(n_t);
    out.trace.resize(n_t);
    out.purity.resize(n_t);
    out.energy.resize(n_t);

    std::vector<Vector> psi(comps.size());
    Vector phased(dim);
    for (std::size_t i = 0; i < n_t; ++i) {
      const double t = grid[i];
      out.times_omega1[i] = t * omega1;
      Eigen::VectorXd populations = Eigen::VectorXd::Zero(dim);
      double energy = 0.0;
      for (std::size_t r = 0; r < comps.size(); ++r) {
        for (Eigen::Index j = 0; j < dim; ++j) {
          phased(j) = coeffs[r](j) * std::exp(Complex{0.0, -spectrum_.values(j) * t});
        }
        psi[r] = spectrum_.vectors * phased;
        populations += comps[r].first * psi[r].cwiseAbs2();
        energy += comps[r].first * psi[r].dot(h_.matrix() * psi[r]).real();
      }
      double purity = 0.0;
      for (std::size_t r = 0; r < comps.size(); ++r) {
        for (std::size_t q = 0; q < comps.size(); ++q) {
          purity += comps[r].first * comps[q].first * std::norm(psi[r].dot(psi[q]));
        }
      }
      const Eigen::VectorXd pol = zs * populations;
      out.per_spin.col(static_cast<Eigen::Index>(i)) = pol;
      out.total_z[i] = pol.sum();
      out.total_i[i] = pol.sum() - pol(0);
      out.trace[i] = populations.sum();
      out.purity[i] = purity;
      out.energy[i] = energy;
    }
    for (std::size_t i = 0; i < n_t; ++i) out.delta_p[i] = out.total_i[i] - out.total_i[0];

    const double trace_err = std::abs(out.trace.front() - 1.0) + out.max_trace_drift();
    if (trace_err > kConservationTolerance) {
      throw NumericalError("trace drifted by " + std::to_string(trace_err) + " during evolution");
    }
    if (out.per_spin.cwiseAbs().maxCoeff() > 0.5 + 1e-9) {
      throw NumericalError("polarization outside [-1/2, 1/2]");
    }
    return out;
  }

 private:
  void check_dim(const DensityMatrix& rho0) const {
    if (rho0.dim() != h_.dim()) {
      throw ArgumentError("density matrix dimension " + std::to_string(rho0.dim()) +
                          " does not match Hamiltonian dimension " + std::to_string(h_.dim()));
    }
  }

  HermitianOperator h_;
  SpectralDecomposition spectrum_;
};

inline PolarizationTrace evolve(const HermitianOperator& h, const DensityMatrix& rho0,
                                std::span<const double> grid, double omega1 = 0.0) {
  return Evolver(h).polarizations(rho0, grid, omega1);
}

// --- CNOT cascade -----------------------------------------------------------

/// One entry per slot (S first); 1 marks a spin in the triggering (down) state.
using BitPattern = std::vector<std::uint8_t>;

/// Flips `target` when `control` is 1.
inline void apply_cnot(BitPattern& bits, std::size_t control, std::size_t target) {
  if (control >= bits.size() || target >= bits.size()) throw IndexError("CNOT slot out of range");
  if (control == target) throw ArgumentError("CNOT control equals target");
  if (bits[control]) bits[target] ^= 1u;
}

/// The gate cascade with S as the first control: S -> I_1, I_1 -> I_2, ..., I_{N-1} -> I_N,
/// applied in that order, so one flip of S propagates through the register.
inline BitPattern cnot_chain(BitPattern bits) {
  for (std::size_t k = 1; k < bits.size(); ++k) apply_cnot(bits, k - 1, k);
  return bits;
}

inline BitPattern bits_of(const SystemLayout& layout, std::uint64_t basis) {
  BitPattern bits(layout.total_spins());
  for (std::size_t s = 0; s < bits.size(); ++s) bits[s] = (basis & layout.mask(s)) ? 1 : 0;
  return bits;
}

inline std::uint64_t basis_of(const SystemLayout& layout, const BitPattern& bits) {
  if (bits.size() != layout.total_spins()) throw ArgumentError("bit pattern length does not match layout");
  std::uint64_t basis = 0;
  for (std::size_t s = 0; s < bits.size(); ++s) {
    if (bits[s]) basis |= layout.mask(s);
  }
  return basis;
}

}  // namespace spinamp
