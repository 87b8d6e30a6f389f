#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spinamp/product_formula.hpp"
#include "spinamp/spin_algebra.hpp"

using namespace spinamp;

namespace {

Matrix random_hermitian(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = Complex{g(rng), g(rng)};
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST(SystemLayout, DimensionAndSlots) {
  const SystemLayout layout(3);
  EXPECT_EQ(layout.total_spins(), 4u);
  EXPECT_EQ(layout.dimension(), 16u);
  EXPECT_EQ(SystemLayout::s_slot(), 0u);
  EXPECT_EQ(layout.i_slot(3), 3u);
  EXPECT_THROW(layout.i_slot(4), IndexError);
  EXPECT_THROW(single_spin_operator(layout, 4, Axis::z), IndexError);
}

TEST(SingleSpinOperator, OneSpinZIsUpFirst) {
  const SystemLayout layout(0);
  const auto z = single_spin_operator(layout, 0, Axis::z).matrix();
  ASSERT_EQ(z.rows(), 2);
  EXPECT_DOUBLE_EQ(z(0, 0).real(), 0.5);
  EXPECT_DOUBLE_EQ(z(1, 1).real(), -0.5);
  EXPECT_EQ(z(0, 1), Complex{});
}

TEST(SingleSpinOperator, TensorEmbeddingEigenvalue) {
  // |up up down>: slot 1 is up.
  const SystemLayout layout(2);
  const auto z1 = single_spin_operator(layout, 1, Axis::z).matrix();
  const std::uint64_t basis = 0b001;
  EXPECT_DOUBLE_EQ(z1(basis, basis).real(), 0.5);
  EXPECT_DOUBLE_EQ(layout.z_value(basis, 2), -0.5);
}

TEST(SingleSpinOperator, MatchesKroneckerOracle) {
  for (std::size_t n = 0; n <= 3; ++n) {
    const SystemLayout layout(n);
    for (std::size_t s = 0; s < layout.total_spins(); ++s) {
      for (auto [axis, c] : {std::pair{Axis::x, 'x'}, {Axis::y, 'y'}, {Axis::z, 'z'}}) {
        const Matrix ours = single_spin_operator(layout, s, axis).matrix();
        EXPECT_LT(max_abs(ours - oracle::spin_op(layout.total_spins(), s, c)), 1e-15);
      }
    }
  }
}

TEST(SingleSpinOperator, Su2AlgebraAndSquares) {
  for (std::size_t n = 0; n <= 4; ++n) {
    const SystemLayout layout(n);
    const Matrix id = Matrix::Identity(layout.dimension(), layout.dimension());
    for (std::size_t s = 0; s < layout.total_spins(); ++s) {
      const auto x = single_spin_operator(layout, s, Axis::x);
      const auto y = single_spin_operator(layout, s, Axis::y);
      const auto z = single_spin_operator(layout, s, Axis::z);
      EXPECT_LT(max_abs(commutator(x, y) - Complex{0, 1} * z.matrix()), 1e-15);
      for (const auto* op : {&x, &y, &z}) {
        EXPECT_LT(std::abs(op->matrix().trace()), 1e-15);
        EXPECT_LT(max_abs(op->matrix() * op->matrix() - 0.25 * id), 1e-15);
      }
    }
  }
}

TEST(SingleSpinOperator, SpectrumIsPlusMinusHalf) {
  const SystemLayout layout(3);
  for (auto axis : {Axis::x, Axis::y, Axis::z}) {
    const auto dec = diagonalize(single_spin_operator(layout, 2, axis));
    int plus = 0, minus = 0;
    for (Eigen::Index j = 0; j < dec.values.size(); ++j) {
      if (std::abs(dec.values(j) - 0.5) < 1e-12) ++plus;
      if (std::abs(dec.values(j) + 0.5) < 1e-12) ++minus;
    }
    EXPECT_EQ(plus, 8);
    EXPECT_EQ(minus, 8);
  }
}

TEST(SingleSpinOperator, DisjointSlotsCommute) {
  const SystemLayout layout(3);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      if (a == b) continue;
      for (auto pa : {Axis::x, Axis::y, Axis::z})
        for (auto pb : {Axis::x, Axis::y, Axis::z}) {
          EXPECT_EQ(max_abs(commutator(single_spin_operator(layout, a, pa), single_spin_operator(layout, b, pb))), 0.0);
        }
    }
}

TEST(TwoSpinCoupling, FullSecularPairMatrix) {
  // Frozen from the hand tensor computation on (uu, ud, du, dd).
  const SystemLayout layout(1);
  const Matrix h = two_spin_coupling(layout, 0, 1, CouplingForm::full_secular, 1.0).matrix();
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 0) = 0.25;
  expected(1, 1) = -0.25;
  expected(2, 2) = -0.25;
  expected(3, 3) = 0.25;
  expected(1, 2) = -0.25;
  expected(2, 1) = -0.25;
  EXPECT_LT(max_abs(h - expected), 1e-15);
}

TEST(TwoSpinCoupling, ZzIsDiagonalAndBothFormsConserveTotalZ) {
  const SystemLayout layout(3);
  const auto tz = total_z(layout);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) {
      const Matrix zz = two_spin_coupling(layout, a, b, CouplingForm::zz, 0.7).matrix();
      Matrix off = zz;
      off.diagonal().setZero();
      EXPECT_EQ(max_abs(off), 0.0);
      for (auto form : {CouplingForm::zz, CouplingForm::full_secular}) {
        EXPECT_LT(max_abs(commutator(two_spin_coupling(layout, a, b, form, 1.3), tz)), 1e-15);
      }
    }
  EXPECT_THROW(two_spin_coupling(layout, 2, 2, CouplingForm::zz, 1.0), ArgumentError);
}

TEST(TwoSpinCoupling, FullSecularChainCommutesWithTotalZ) {
  const SystemLayout layout(4);
  Matrix h = zero_matrix(layout);
  for (std::size_t a = 1; a <= 4; ++a)
    for (std::size_t b = a + 1; b <= 4; ++b) {
      const double r = static_cast<double>(b - a);
      add_two_spin_coupling(h, layout, a, b, CouplingForm::full_secular, 1.0 / (r * r * r));
    }
  EXPECT_LT(max_abs(commutator(h, total_z(layout).matrix())), 1e-14);
}

TEST(HermitianOperator, RejectsNonHermitian) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(HermitianOperator{m}, ValidationError);
  EXPECT_NO_THROW(HermitianOperator::symmetrized(m + 1e-10 * Matrix::Identity(2, 2) + m.adjoint()));
}

TEST(HermitianExponential, TrivialCases) {
  const SystemLayout layout(0);
  const auto z = single_spin_operator(layout, 0, Axis::z);
  EXPECT_LT(max_abs(hermitian_exponential(z, 0.0).matrix() - Matrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_abs(hermitian_exponential(z, 2 * std::numbers::pi).matrix() + Matrix::Identity(2, 2)), 1e-14);
}

TEST(HermitianExponential, GroupLawAndUnitarity) {
  const HermitianOperator h(random_hermitian(16, 3));
  const auto u1 = hermitian_exponential(h, 0.37).matrix();
  const auto u2 = hermitian_exponential(h, 1.21).matrix();
  const auto u12 = hermitian_exponential(h, 1.58).matrix();
  EXPECT_LT(max_abs(u1 * u2 - u12), 1e-10);
  EXPECT_LT(max_abs(u12.adjoint() * u12 - Matrix::Identity(16, 16)), 1e-10);
}

TEST(HermitianExponential, AgreesWithLieTrotterOracle) {
  // Scale so that the first-order splitting error t^2 ||[D,O]|| / 2^15 stays far below 1e-4.
  const Matrix a = random_hermitian(16, 11) * 0.25;
  const double t = 1.0;
  const Matrix exact = hermitian_exponential(HermitianOperator(a), t).matrix();
  EXPECT_LT(max_abs(exact - oracle::lie_trotter(a, t, 14)), 1e-4);
  EXPECT_LT(max_abs(exact - product_formula_propagator(a, t, 14)), 1e-6);
}

TEST(Commutator, Basics) {
  const SystemLayout layout(1);
  const auto x = single_spin_operator(layout, 1, Axis::x);
  EXPECT_EQ(max_abs(commutator(x, x)), 0.0);
  EXPECT_THROW(commutator(Matrix::Zero(2, 2), Matrix::Zero(4, 4)), ArgumentError);
}

TEST(SpinProducts, ExpansionRecoversCoefficients) {
  const SystemLayout layout(2);
  Matrix m = zero_matrix(layout);
  add_spin_product(m, layout, 0.3, {SpinFactor{1, Axis::x}, SpinFactor{0, Axis::z}});
  add_spin_product(m, layout, -1.25, {SpinFactor{2, Axis::y}});
  add_spin_product(m, layout, 0.5, {});
  const auto terms = expand_in_spin_products(layout, m);
  ASSERT_EQ(terms.size(), 3u);
  double found = 0.0;
  for (const auto& t : terms) {
    if (t.label() == "S^z I1^x") found += std::abs(t.coefficient - Complex{0.3});
    if (t.label() == "I2^y") found += std::abs(t.coefficient - Complex{-1.25});
    if (t.label() == "1") found += std::abs(t.coefficient - Complex{0.5});
  }
  EXPECT_LT(found, 1e-14);
}

TEST(SpinProducts, ModulatedTermMatchesProductExpansion) {
  // I1^x (1 - 4 I0^z I2^z) written both ways.
  const SystemLayout layout(2);
  Matrix a = zero_matrix(layout), b = zero_matrix(layout);
  add_modulated_term(a, layout, 1, Axis::x, 1.0, [](std::span<const double> z) { return 1.0 - 4.0 * z[0] * z[2]; });
  add_spin_product(b, layout, 1.0, {SpinFactor{1, Axis::x}});
  add_spin_product(b, layout, -4.0, {SpinFactor{1, Axis::x}, SpinFactor{0, Axis::z}, SpinFactor{2, Axis::z}});
  EXPECT_LT(max_abs(a - b), 1e-15);
}
