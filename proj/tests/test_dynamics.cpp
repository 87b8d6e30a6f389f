#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "spinamp/config.hpp"
#include "spinamp/dynamics.hpp"
#include "spinamp/verification.hpp"

using namespace spinamp;

TEST(DensityMatrix, Validation) {
  Matrix m = Matrix::Zero(2, 2);
  EXPECT_THROW(DensityMatrix{m}, ValidationError);  // trace 0
  m(0, 0) = 1.5;
  m(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix{m}, ValidationError);  // negative eigenvalue
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  m(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{m}, ValidationError);  // not Hermitian
  m(1, 0) = 0.1;
  EXPECT_NO_THROW(DensityMatrix{m});
}

TEST(InitialState, BasisIndexAndPolarizations) {
  const SystemLayout layout(3);
  const auto up = initial_state(layout, SpinState::up);
  const auto down = initial_state(layout, SpinState::down);
  EXPECT_EQ(up.matrix()(0, 0), Complex{1.0});
  EXPECT_EQ(initial_basis_index(layout, SpinState::down), 0b1000u);
  EXPECT_DOUBLE_EQ(down.purity(), 1.0);
  const std::vector<double> grid = {0.0};
  const auto tr = evolve(HermitianOperator::zero(16), down, grid);
  EXPECT_DOUBLE_EQ(tr.polarization(0, 0), -0.5);
  for (std::size_t k = 1; k <= 3; ++k) EXPECT_DOUBLE_EQ(tr.polarization(k, 0), 0.5);
  EXPECT_DOUBLE_EQ(tr.total_z[0], 1.0);
  EXPECT_DOUBLE_EQ(tr.total_i[0], 1.5);
}

TEST(Evolve, SingleSpinNutation) {
  // H = w I^x from up: P(t) = cos(w t) / 2.
  const SystemLayout layout(0);
  const double w = 0.7;
  const auto h = single_spin_operator(layout, 0, Axis::x) * w;
  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back(0.2 * i);
  const auto tr = evolve(h, initial_state(layout, SpinState::up), grid, 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(tr.polarization(0, i), 0.5 * std::cos(w * grid[i]), 1e-13);
}

TEST(Evolve, GridValidation) {
  const SystemLayout layout(1);
  const auto h = HermitianOperator::zero(4);
  const auto rho = initial_state(layout, SpinState::up);
  EXPECT_THROW(evolve(h, rho, std::vector<double>{}), ArgumentError);
  EXPECT_THROW(evolve(h, rho, std::vector<double>{0.1, 0.2}), ArgumentError);
  EXPECT_THROW(evolve(h, rho, std::vector<double>{0.0, 0.2, 0.2}), ArgumentError);
  EXPECT_THROW(evolve(HermitianOperator::zero(8), rho, std::vector<double>{0.0}), ArgumentError);
}

TEST(Evolve, NoDynamicsGivesFlatTrace) {
  const SystemLayout layout(2);
  const std::vector<double> grid = {0.0, 1.0, 2.0};
  const auto tr = evolve(HermitianOperator::zero(8), initial_state(layout, SpinState::down), grid);
  EXPECT_EQ(tr.max_polarization_change(), 0.0);
  for (double d : tr.delta_p) EXPECT_EQ(d, 0.0);
}

TEST(Evolve, ConservationForEveryPreset) {
  for (const auto& p : preset_catalog()) {
    const auto d = conservation_drifts(preset_spec(p.name));
    EXPECT_LT(d.trace, 1e-10) << p.name;
    EXPECT_LT(d.purity, 1e-10) << p.name;
    EXPECT_LT(d.energy, 1e-10) << p.name;
  }
}

TEST(Evolve, TotalZConservedWithoutRf) {
  for (const char* name : {"1d-full", "2d-full", "3d-full"}) {
    ModelSpec spec = preset_spec(name);
    spec.omega1 = 0.0;
    spec.t_max = 300.0;
    spec.n_time_points = 200;
    EXPECT_LT(conservation_drifts(spec).total_z, 1e-10) << name;
  }
}

TEST(Evolve, MixedStateMatchesDirectConjugation) {
  const SystemLayout layout(2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix h = zero_matrix(layout);
  for (std::size_t a = 0; a < 3; ++a) {
    add_spin_product(h, layout, u(rng), {SpinFactor{a, Axis::x}});
    for (std::size_t b = a + 1; b < 3; ++b) add_two_spin_coupling(h, layout, a, b, CouplingForm::full_secular, u(rng));
  }
  Matrix rho = Matrix::Zero(8, 8);
  rho(0, 0) = 0.6;
  rho(5, 5) = 0.3;
  rho(7, 7) = 0.1;
  const DensityMatrix rho0(rho);
  const Evolver ev{HermitianOperator(h)};
  const std::vector<double> grid = {0.0, 0.5, 3.0};
  const auto tr = ev.polarizations(rho0, grid, 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Matrix rt = ev.state_at(rho0, grid[i]);
    for (std::size_t s = 0; s < 3; ++s) {
      const double p = (single_spin_operator(layout, s, Axis::z).matrix() * rt).trace().real();
      EXPECT_NEAR(tr.polarization(s, i), p, 1e-13);
    }
    EXPECT_NEAR(tr.purity[i], 0.36 + 0.09 + 0.01, 1e-12);
  }
}

TEST(Evolve, AgreesWithProductFormulaOracles) {
  EXPECT_LT(evolution_oracle_residual(7, 2.0), 1e-4);

  // Independent first-order splitting on a random 4-spin model with a mixed initial state.
  const SystemLayout layout(3);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Matrix h = Matrix::Zero(16, 16);
  for (std::size_t a = 0; a < 4; ++a) {
    h += u(rng) * oracle::spin_op(4, a, 'x');
    for (std::size_t b = a + 1; b < 4; ++b) {
      const double d = u(rng);
      h += d * (oracle::spin_op(4, a, 'z') * oracle::spin_op(4, b, 'z') -
                0.5 * (oracle::spin_op(4, a, 'x') * oracle::spin_op(4, b, 'x') +
                       oracle::spin_op(4, a, 'y') * oracle::spin_op(4, b, 'y')));
    }
  }
  Matrix rho = Matrix::Zero(16, 16);
  rho(8, 8) = 0.75;
  rho(3, 3) = 0.25;
  const DensityMatrix rho0(rho);
  const double t = 1.0;
  const Matrix exact = Evolver(HermitianOperator(h)).state_at(rho0, t);
  const Matrix u_t = oracle::lie_trotter(h, t, 14);
  EXPECT_LT(max_abs(exact - u_t * rho * u_t.adjoint()), 1e-4);
}

TEST(Evolve, EffectiveUpRunsAreFrozen) {
  for (const char* name : {"1d-eff-m1", "1d-eff-m2", "2d-eff", "3d-eff"}) {
    EXPECT_LT(up_run_max_change(preset_spec(name)), 1e-9) << name;
  }
}

TEST(CnotCascade, MatchesGateProductTruthTable) {
  const SystemLayout layout(3);
  const auto table = oracle::cascade_truth_table(4);
  for (std::uint64_t b = 0; b < 16; ++b) {
    EXPECT_EQ(basis_of(layout, cnot_chain(bits_of(layout, b))), table[b]) << b;
  }
  EXPECT_EQ(cnot_mismatches(), 0u);
}

TEST(CnotCascade, TriggerFlipsWholeRegister) {
  EXPECT_EQ(cnot_chain({1, 0, 0, 0}), (BitPattern{1, 1, 1, 1}));
  EXPECT_EQ(cnot_chain({0, 0, 0, 0}), (BitPattern{0, 0, 0, 0}));
  BitPattern b = {1, 0, 1};
  EXPECT_THROW(apply_cnot(b, 1, 1), ArgumentError);
  EXPECT_THROW(apply_cnot(b, 0, 3), IndexError);
}

TEST(CnotCascade, IsABijection) {
  const SystemLayout layout(4);
  std::vector<bool> seen(layout.dimension(), false);
  for (std::uint64_t b = 0; b < layout.dimension(); ++b) {
    const auto out = basis_of(layout, cnot_chain(bits_of(layout, b)));
    EXPECT_FALSE(seen[out]);
    seen[out] = true;
  }
}

TEST(RingTraces, SixRingSpinsOverlapInZzRun) {
  EXPECT_LT(ring_overlap_deviation(preset_spec("3d-zz")), 1e-6);
}
