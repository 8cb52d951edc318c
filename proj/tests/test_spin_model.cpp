#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "nvdiss/spin_model.hpp"

using namespace nvdiss;

namespace {

SpinRegister default_register() { return {kReferenceFieldGauss, kGamma13C_kHzPerGauss, survey_spins()}; }

// exp(-i h t) through the eigenbasis
Matrix2c expm_oracle(const Matrix2c& h, double t_ns) {
  Eigen::SelfAdjointEigenSolver<Matrix2c> es(h);
  Matrix2c d = Matrix2c::Zero();
  for (int i = 0; i < 2; ++i) d(i, i) = std::exp(cplx(0, -es.eigenvalues()(i) * t_ns * 1e-6));
  return es.eigenvectors() * d * es.eigenvectors().adjoint();
}

double splitting_khz(const Matrix2c& h) {
  Eigen::SelfAdjointEigenSolver<Matrix2c> es(h);
  return (es.eigenvalues()(1) - es.eigenvalues()(0)) / (2 * kPi);
}

}  // namespace

TEST(SpinRegister, LarmorAndLayout) {
  const auto reg = default_register();
  EXPECT_NEAR(reg.larmor_khz(), 527.549, 1e-3);
  EXPECT_EQ(reg.num_qubits(), 5u);
  EXPECT_EQ(reg.dim(), 32u);
  EXPECT_EQ(reg.qubit_of("1"), 1u);
  EXPECT_EQ(reg.qubit_of("4"), 4u);
  EXPECT_THROW(reg.qubit_of("7"), std::invalid_argument);
  const auto sub = reg.subregister({"4", "2"});
  EXPECT_EQ(sub.qubit_of("4"), 1u);
  EXPECT_EQ(sub.qubit_of("2"), 2u);
  EXPECT_DOUBLE_EQ(sub.larmor_khz(), reg.larmor_khz());
}

TEST(Hamiltonian, MsZeroIsBareLarmor) {
  const auto reg = default_register();
  const auto h = effective_hamiltonian(0, reg.spin("2"), reg);
  EXPECT_NEAR(std::abs(h(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(splitting_khz(h), reg.larmor_khz(), 1e-9);
}

TEST(Hamiltonian, SplittingMatchesPrecessionFrequencies) {
  const auto reg = default_register();
  for (const auto& s : reg.spins()) {
    const auto f = precession_frequencies(s, reg);
    EXPECT_NEAR(splitting_khz(effective_hamiltonian(+1, s, reg)), f.f_plus_khz, 1e-9);
    EXPECT_NEAR(splitting_khz(effective_hamiltonian(-1, s, reg)), f.f_minus_khz, 1e-9);
  }
  EXPECT_THROW(effective_hamiltonian(2, reg.spins()[0], reg), std::invalid_argument);
}

TEST(Hamiltonian, HandComputedCase) {
  // B = 100 G, gamma = 1 kHz/G, A_zz = 30, A_zx = 40:
  // f+ = hypot(40, 130), f- = hypot(40, 70)
  const SpinRegister reg(100.0, 1.0, {{"a", {30.0, 40.0}}});
  const auto f = precession_frequencies(reg.spins()[0], reg);
  EXPECT_NEAR(f.f_plus_khz, std::sqrt(40.0 * 40 + 130.0 * 130), 1e-12);
  EXPECT_NEAR(f.f_minus_khz, std::sqrt(40.0 * 40 + 70.0 * 70), 1e-12);
  // no transverse coupling: plain shifted Larmor
  const SpinRegister reg0(100.0, 1.0, {{"b", {30.0, 0.0}}});
  EXPECT_NEAR(precession_frequencies(reg0.spins()[0], reg0).f_minus_khz, 70.0, 1e-12);
}

TEST(PrecessionFrequencies, OrderFollowsCouplingSign) {
  const auto reg = default_register();
  for (const auto& s : reg.spins()) {
    const auto f = precession_frequencies(s, reg);
    EXPECT_EQ(f.f_plus_khz > f.f_minus_khz, s.params.a_zz_khz > 0) << s.id;
  }
}

TEST(PrecessionFrequencies, GrowWithFieldAboveCoupling) {
  for (const auto& s : survey_spins()) {
    const double b_min = std::abs(s.params.a_zz_khz) / kGamma13C_kHzPerGauss + 1.0;
    double last = 0.0;
    for (double b = b_min; b < b_min + 2000; b += 100) {
      const SpinRegister reg(b, kGamma13C_kHzPerGauss, {s});
      const auto f = precession_frequencies(s, reg);
      EXPECT_GT(f.f_plus_khz + f.f_minus_khz, last);
      last = f.f_plus_khz + f.f_minus_khz;
    }
  }
}

TEST(Evolution, MatchesEigenbasisExponential) {
  const auto reg = default_register();
  for (const auto& s : reg.spins())
    for (int ms : {0, -1, 1})
      for (double t : {0.0, 13.0, 850.0, 4929.0}) {
        const auto h = effective_hamiltonian(ms, s, reg);
        const Matrix2c u = evolve_2x2(h, t);
        EXPECT_TRUE(is_unitary(u));
        EXPECT_LT(max_abs(ComplexMatrix(u - expm_oracle(h, t))), 1e-12);
      }
}

TEST(Evolution, LarmorOscillation) {
  const auto reg = default_register();
  const auto h = effective_hamiltonian(0, reg.spin("3"), reg);
  StateVector plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  for (double t = 0; t < 4000; t += 137) {
    const StateVector psi = evolve_2x2(h, t) * plus;
    const double x = (psi.adjoint() * pauli(Pauli::X) * psi)(0, 0).real();
    EXPECT_NEAR(x, std::cos(2 * kPi * reg.larmor_khz() * t * 1e-6), 1e-12);
  }
}

TEST(Evolution, ConditionalBlocksMatchBranches) {
  const auto reg = default_register().subregister({"1", "2"});
  for (double t : {100.0, 2500.0}) {
    const auto full = conditional_free_evolution(reg, t);
    EXPECT_TRUE(is_unitary(full));
    EXPECT_LT(max_abs(full - free_evolution_branches(reg, t).to_matrix()), 1e-12);
    // electron |1> block is the ms = -1 product
    const ComplexMatrix v1 = kron(evolve_2x2(effective_hamiltonian(-1, reg.spin("1"), reg), t),
                                  evolve_2x2(effective_hamiltonian(-1, reg.spin("2"), reg), t));
    EXPECT_LT(max_abs(full.bottomRightCorner(4, 4) - v1), 1e-12);
    EXPECT_LT(max_abs(full.topRightCorner(4, 4)), 1e-15);
  }
}

TEST(PiPulse, FlipsElectronOnly) {
  const auto reg = default_register().subregister({"2"});
  for (auto axis : {PulseAxis::X, PulseAxis::Y}) {
    const auto p = microwave_pi_pulse(reg, axis);
    EXPECT_TRUE(is_unitary(p));
    const StateVector out = p * basis_state(4, 1);  // |0>_e |1>_n
    EXPECT_NEAR(std::abs(out(3)), 1.0, 1e-15);
    EXPECT_LT(max_abs(p - pi_pulse_branches(reg, axis).to_matrix()), 1e-15);
    EXPECT_LT(max_abs(p * p - ComplexMatrix::Identity(4, 4)), 1e-15);
  }
}

TEST(BranchUnitary, ThenMatchesMatrixProduct) {
  const auto reg = default_register().subregister({"2", "4"});
  const auto a = free_evolution_branches(reg, 310.0);
  const auto b = pi_pulse_branches(reg, PulseAxis::Y);
  const auto c = free_evolution_branches(reg, 777.0);
  const auto abc = a.then(b).then(c);
  EXPECT_LT(max_abs(abc.to_matrix() - c.to_matrix() * b.to_matrix() * a.to_matrix()), 1e-12);
  EXPECT_LT(max_abs(BranchUnitary::identity(2).to_matrix() - ComplexMatrix::Identity(8, 8)), 1e-15);
}
