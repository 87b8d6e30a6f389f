#pragma once

// Second-order product-formula propagator, an integration route independent of the
// eigendecomposition used by Evolver: H = D + O with D the diagonal part, each step
// e^{-iD dt/2} e^{-iO dt} e^{-iD dt/2}, the off-diagonal exponential by Taylor series.

#include <cmath>
#include <cstddef>

#include "spinamp/errors.hpp"
#include "spinamp/spin_algebra.hpp"

namespace spinamp {

/// Taylor series of exp(-i a dt) truncated when the next term drops below 1e-18.
inline Matrix taylor_exponential(const Matrix& a, double dt) {
  const auto n = a.rows();
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k < 60; ++k) {
    term = (term * a) * Complex{0.0, -dt / k};
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) return result;
  }
  throw ConvergenceError("Taylor exponential did not converge; step too large");
}

/// U(t) from 2^log2_steps identical symmetric steps, composed by repeated squaring.
inline Matrix product_formula_propagator(const Matrix& h, double t, unsigned log2_steps = 14) {
  const auto n = h.rows();
  const double dt = t / std::ldexp(1.0, static_cast<int>(log2_steps));
  Matrix off = h;
  off.diagonal().setZero();
  Vector half_phase(n);
  for (Eigen::Index j = 0; j < n; ++j) half_phase(j) = std::exp(Complex{0.0, -0.5 * dt * h(j, j).real()});
  const Matrix step = half_phase.asDiagonal() * taylor_exponential(off, dt) * half_phase.asDiagonal();
  Matrix u = step;
  for (unsigned k = 0; k < log2_steps; ++k) u = u * u;
  return u;
}

}  // namespace spinamp
