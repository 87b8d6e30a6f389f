#pragma once

// Reference implementations that share no code path with the library routines they check.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Spin-1/2 operator on `slot` of an `n_spins` register, slot 0 the leftmost Kronecker factor,
/// basis state 0 = up.
inline Matrix spin_op(std::size_t n_spins, std::size_t slot, char axis) {
  Matrix single(2, 2);
  switch (axis) {
    case 'x': single << 0, 0.5, 0.5, 0; break;
    case 'y': single << 0, Complex(0, -0.5), Complex(0, 0.5), 0; break;
    case 'z': single << 0.5, 0, 0, -0.5; break;
    default: single = Matrix::Identity(2, 2);
  }
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t s = 0; s < n_spins; ++s) {
    const Matrix f = (s == slot) ? single : Matrix::Identity(2, 2);
    Matrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * f;
    out = next;
  }
  return out;
}

/// exp(-i a dt) from its Taylor series (small dt * |a| assumed).
inline Matrix taylor_exp(const Matrix& a, double dt, int terms = 30) {
  Matrix result = Matrix::Identity(a.rows(), a.cols());
  Matrix term = result;
  for (int k = 1; k <= terms; ++k) {
    term = term * a * Complex(0, -dt / k);
    result += term;
  }
  return result;
}

/// First-order Lie-Trotter propagator over 2^log2_steps steps: diagonal part by exact phases,
/// off-diagonal part by Taylor series.
inline Matrix lie_trotter(const Matrix& h, double t, int log2_steps) {
  const double dt = t / static_cast<double>(1u << log2_steps);
  Matrix off = h;
  Matrix diag = Matrix::Zero(h.rows(), h.cols());
  for (Eigen::Index j = 0; j < h.rows(); ++j) {
    diag(j, j) = std::exp(Complex(0, -dt * h(j, j).real()));
    off(j, j) = 0;
  }
  Matrix u = diag * taylor_exp(off, dt);
  for (int k = 0; k < log2_steps; ++k) u = u * u;
  return u;
}

/// (1/t_c) integral of e^{-iHt} v e^{iHt} with H diagonal, composite Simpson on 2n intervals.
inline Matrix simpson_average(const Eigen::VectorXd& energies, const Matrix& v, double t_c, int n) {
  const int intervals = 2 * n;
  Matrix acc = Matrix::Zero(v.rows(), v.cols());
  for (int j = 0; j <= intervals; ++j) {
    const double t = t_c * j / intervals;
    const double w = (j == 0 || j == intervals) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    Matrix toggled = v;
    for (Eigen::Index a = 0; a < v.rows(); ++a)
      for (Eigen::Index b = 0; b < v.cols(); ++b) toggled(a, b) *= std::exp(Complex(0, -t * (energies(a) - energies(b))));
    acc += w * toggled;
  }
  return acc / (3.0 * intervals);
}

/// Permutation matrix of a CNOT gate with control firing on basis bit 1 (spin down).
inline Matrix cnot_gate(std::size_t n_spins, std::size_t control, std::size_t target) {
  const std::size_t dim = std::size_t{1} << n_spins;
  Matrix g = Matrix::Zero(dim, dim);
  for (std::size_t b = 0; b < dim; ++b) {
    const std::size_t cbit = std::size_t{1} << (n_spins - 1 - control);
    const std::size_t tbit = std::size_t{1} << (n_spins - 1 - target);
    const std::size_t out = (b & cbit) ? (b ^ tbit) : b;
    g(out, b) = 1.0;
  }
  return g;
}

/// Truth table of the cascade S->I1, I1->I2, ... by multiplying gate matrices in
/// application order.
inline std::vector<std::uint64_t> cascade_truth_table(std::size_t n_spins) {
  const std::size_t dim = std::size_t{1} << n_spins;
  Matrix u = Matrix::Identity(dim, dim);
  for (std::size_t k = 1; k < n_spins; ++k) u = cnot_gate(n_spins, k - 1, k) * u;
  std::vector<std::uint64_t> table(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    Eigen::Index row;
    u.col(b).cwiseAbs().maxCoeff(&row);
    table[b] = static_cast<std::uint64_t>(row);
  }
  return table;
}

}  // namespace oracle
