#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spinamp/config.hpp"
#include "spinamp/dynamics.hpp"
#include "spinamp/models.hpp"

using namespace spinamp;

namespace {

/// ||H v - (v^+ H v) v|| for the all-up state.
double all_up_eigen_residual(const HermitianOperator& h) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(h.dim()));
  v(0) = 1.0;
  const Vector hv = h.matrix() * v;
  return (hv - v.dot(hv) * v).norm();
}

}  // namespace

TEST(ChainCouplings, InverseCubeAndTruncation) {
  const auto g = chain_couplings(3, 2, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(g.ii(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(g.ii(1, 3), 0.125);
  EXPECT_DOUBLE_EQ(g.ii(2, 3), 1.0);
  EXPECT_DOUBLE_EQ(g.si(2), 0.125);
  EXPECT_DOUBLE_EQ(g.si(3), 0.0);
  const auto g1 = chain_couplings(3, 1, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(g1.ii(1, 3), 0.0);
  EXPECT_DOUBLE_EQ(g1.si(2), 0.0);
  EXPECT_THROW(chain_couplings(3, 3, 1.0, 1.0), ArgumentError);
}

TEST(RingCouplings, RingFactor) {
  EXPECT_DOUBLE_EQ(ring_factor(6, 1, 2.0), 2.0);
  EXPECT_NEAR(ring_factor(6, 3, 1.0), 0.125, 1e-15);
  EXPECT_NEAR(ring_factor(6, 2, 1.0), 0.19245008972987526, 1e-15);
  const auto g = ring_couplings(6, 3, 1.0);
  EXPECT_NEAR(g.ii(1, 4), 0.125, 1e-15);
  EXPECT_NEAR(g.ii(6, 2), 0.19245008972987526, 1e-15);  // wraps around
  EXPECT_DOUBLE_EQ(g.ii(6, 1), 1.0);
  EXPECT_THROW(ring_couplings(6, 4, 1.0), ArgumentError);
}

TEST(HubCouplings, ProfilesAndConnectivity) {
  const auto g = hub_couplings(7, 1, 1.0, 1.0, HubProfile::uniform(), HubProfile::inverse_cube());
  for (std::size_t m = 1; m < 7; ++m) EXPECT_DOUBLE_EQ(g.ii(m, 7), 1.0);
  EXPECT_DOUBLE_EQ(g.si(2), 0.125);
  EXPECT_DOUBLE_EQ(g.si(7), 1.0);
  EXPECT_TRUE(g.i_spins_connected());
  const std::vector<double> f = {1, 1.0 / 8, 1.0 / 27, 1.0 / 64, 1.0 / 125, 1.0 / 216};
  const auto ge = hub_couplings(7, 1, 1.0, 1.0, HubProfile::explicit_values(f), HubProfile::uniform());
  for (std::size_t m = 1; m < 7; ++m) EXPECT_DOUBLE_EQ(ge.ii(m, 7), f[m - 1]);
  EXPECT_THROW(hub_couplings(7, 1, 1.0, 1.0, HubProfile::explicit_values({1, 2}), HubProfile::uniform()), ArgumentError);
}

TEST(BuildHamiltonian, ChainFullDipolarTwoSpinsEntryByEntry) {
  ModelSpec spec;
  spec.geometry = Geometry::chain_1d;
  spec.interaction = Interaction::full_dipolar;
  spec.n = 2;
  spec.m = 1;
  spec.omega1 = 0.3;
  CouplingGraph graph(2);
  graph.set_ii(1, 2, 1.0);
  graph.set_si(1, 1.0);
  graph.set_si(2, 0.125);
  const Matrix h = build_hamiltonian(spec, graph).matrix();

  using oracle::spin_op;
  const Matrix expected =
      0.15 * (spin_op(3, 0, 'x') + spin_op(3, 1, 'x') + spin_op(3, 2, 'x')) +
      (spin_op(3, 1, 'z') * spin_op(3, 2, 'z') -
       0.5 * (spin_op(3, 1, 'x') * spin_op(3, 2, 'x') + spin_op(3, 1, 'y') * spin_op(3, 2, 'y'))) +
      spin_op(3, 0, 'z') * spin_op(3, 1, 'z') + 0.125 * spin_op(3, 0, 'z') * spin_op(3, 2, 'z');
  EXPECT_LT(max_abs(h - expected), 1e-15);
}

TEST(BuildHamiltonian, NutationConventionDoublesRf) {
  ModelSpec spec;
  spec.n = 3;
  spec.m = 2;
  spec.interaction = Interaction::zz_weak;
  const Matrix half = build_hamiltonian(spec).matrix();
  spec.rf_convention = RfConvention::nutation;
  const Matrix full = build_hamiltonian(spec).matrix();
  Matrix diff = full - half;
  EXPECT_LT(max_abs(diff.diagonal()), 1e-15);
  Matrix rf = zero_matrix(spec.layout());
  detail::add_rf(rf, spec.layout(), 0.5 * spec.omega1);
  EXPECT_LT(max_abs(diff - rf), 1e-15);
}

TEST(BuildHamiltonian, ZzWithoutRfIsDiagonal) {
  for (const char* name : {"1d-zz", "2d-zz", "3d-zz"}) {
    ModelSpec spec = preset_spec(name);
    spec.omega1 = 0.0;
    Matrix h = build_hamiltonian(spec).matrix();
    h.diagonal().setZero();
    EXPECT_EQ(max_abs(h), 0.0) << name;
  }
}

TEST(BuildHamiltonian, FullDipolarWithoutRfConservesTotalZ) {
  for (const char* name : {"1d-full", "2d-full", "3d-full"}) {
    ModelSpec spec = preset_spec(name);
    spec.omega1 = 0.0;
    const auto h = build_hamiltonian(spec);
    EXPECT_LT(max_abs(commutator(h, total_z(spec.layout()))), 1e-13) << name;
  }
}

TEST(BuildHamiltonian, EveryPresetIsHermitian) {
  for (const auto& p : preset_catalog()) {
    const auto h = build_hamiltonian(preset_spec(p.name));
    EXPECT_LT(max_abs(h.matrix() - h.matrix().adjoint()), 1e-12) << p.name;
  }
}

TEST(EffectiveHamiltonians, AllUpIsEigenstate) {
  for (const char* name : {"1d-eff-m1", "1d-eff-m2", "2d-eff", "3d-eff"}) {
    EXPECT_LT(all_up_eigen_residual(build_hamiltonian(preset_spec(name))), 1e-12) << name;
  }
  ModelSpec spec = preset_spec("1d-eff-m2");
  spec.m2_transverse_factor = M2TransverseFactor::bare;
  EXPECT_LT(all_up_eigen_residual(build_hamiltonian(spec)), 1e-12);
}

TEST(EffectiveHamiltonians, M2TransverseSwitchOnlyRescalesTwoTerms) {
  ModelSpec a = preset_spec("1d-eff-m2");
  ModelSpec b = a;
  b.m2_transverse_factor = M2TransverseFactor::bare;
  const Matrix diff = build_hamiltonian(b).matrix() - build_hamiltonian(a).matrix();
  EXPECT_GT(max_abs(diff), 0.1);
  // The difference lives on I_2^x and I_{N-1}^x only.
  const SystemLayout layout = a.layout();
  for (std::uint64_t row = 0; row < layout.dimension(); ++row)
    for (std::uint64_t col = 0; col < layout.dimension(); ++col) {
      if (std::abs(diff(row, col)) == 0.0) continue;
      const auto flip = row ^ col;
      EXPECT_TRUE(flip == layout.mask(2) || flip == layout.mask(a.n - 1));
    }
}

TEST(EffectiveHamiltonians, LiteralRingFormIsSymmetrized) {
  ModelSpec spec = preset_spec("3d-eff");
  spec.ring_form = RingEffectiveForm::literal;
  const auto h = build_hamiltonian(spec);
  EXPECT_LT(max_abs(h.matrix() - h.matrix().adjoint()), 1e-12);
}

TEST(ModelSpec, UnsupportedEffectiveCombinationsNameTheKey) {
  ModelSpec spec;
  spec.geometry = Geometry::chain_1d;
  spec.interaction = Interaction::effective;
  spec.m = 3;
  try {
    spec.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "interaction");
    EXPECT_NE(std::string(e.what()).find("supported"), std::string::npos);
  }
  spec.m = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(ModelSpec, CouplingRescalingLeavesTracesInvariant) {
  // Couplings and omega1 times lambda, time divided by lambda.
  ModelSpec a = preset_spec("2d-full");
  a.n = 4;
  a.m = 2;
  a.n_time_points = 50;
  ModelSpec b = a;
  const double lambda = 2.0;
  b.d1 *= lambda;
  b.g1 *= lambda;
  b.omega1 *= lambda;
  b.t_max = a.resolved_t_max() / lambda;
  const auto ta = evolve(build_hamiltonian(a), initial_state(a.layout(), SpinState::down), a.time_grid(), a.omega1);
  const auto tb = evolve(build_hamiltonian(b), initial_state(b.layout(), SpinState::down), b.time_grid(), b.omega1);
  EXPECT_LT((ta.per_spin - tb.per_spin).cwiseAbs().maxCoeff(), 1e-10);
  for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_NEAR(ta.times_omega1[i], tb.times_omega1[i], 1e-12);
}
