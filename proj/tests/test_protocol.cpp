#include <gtest/gtest.h>

#include <random>

#include "nvdiss/channels.hpp"
#include "nvdiss/protocol.hpp"

using namespace nvdiss;

TEST(Sequences, HeisenbergPictureOfElectronZ) {
  const auto ze = pauli_string({Pauli::Z, Pauli::I, Pauli::I});
  EXPECT_LT(max_abs(conjugate(circuit_unitary(sequence1_circuit(), 3), ze) - pauli_string({Pauli::I, Pauli::Z, Pauli::Z})),
            1e-12);
  EXPECT_LT(max_abs(conjugate(circuit_unitary(sequence2_circuit(), 3), ze) - pauli_string({Pauli::I, Pauli::X, Pauli::X})),
            1e-12);
}

TEST(Sequences, OnlyHadamardAndCnot) {
  for (const auto& c : {sequence1_circuit(), sequence2_circuit()}) {
    EXPECT_TRUE(c.is_unitary());
    for (const auto& op : c.ops) {
      EXPECT_TRUE(op.name == GateName::H || op.name == GateName::CNOT) << to_string(op.name);
      if (op.name == GateName::CNOT) EXPECT_EQ(op.targets[0], 0u);
    }
  }
}

TEST(OpticalPump, ResetsElectronKeepsNuclei) {
  std::mt19937_64 rng(4);
  const auto rho = random_density_matrix(8, rng);
  NoiseModel noise;
  const auto out = optical_pump(rho, noise);
  EXPECT_NEAR(expectation(out, pauli_string({Pauli::Z, Pauli::I, Pauli::I})), 1.0, 1e-12);
  EXPECT_LT(max_abs(partial_trace(out, {1, 2}, {2, 2, 2}).matrix() - partial_trace(rho, {1, 2}, {2, 2, 2}).matrix()),
            1e-12);
  noise.pump_fidelity = 0.9;
  EXPECT_NEAR(expectation(optical_pump(rho, noise), pauli_string({Pauli::Z, Pauli::I, Pauli::I})), 0.8, 1e-12);
  // product form: electron decoupled from nuclei
  const auto pumped = optical_pump(rho, noise);
  const auto red = partial_trace(pumped, {1, 2}, {2, 2, 2});
  EXPECT_LT(max_abs(pumped.matrix() - kron(partial_trace(pumped, {0}, {2, 2, 2}).matrix(), red.matrix())), 1e-12);
  noise.pump_fidelity = 1.5;
  EXPECT_THROW(optical_pump(rho, noise), std::invalid_argument);
}

TEST(Protocol, IdealRoundsReachGhz) {
  const auto trace = run_protocol(DensityMatrix::maximally_mixed(4), 4, NoiseModel::ideal());
  ASSERT_EQ(trace.rounds.size(), 4u);
  for (const auto& r : trace.rounds) {
    EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
    EXPECT_NEAR(r.corr.xx, 1.0, 1e-12);
    EXPECT_NEAR(r.corr.yy, -1.0, 1e-12);
    EXPECT_NEAR(r.corr.zz, 1.0, 1e-12);
  }
  EXPECT_THROW(run_protocol(DensityMatrix::maximally_mixed(4), 0, NoiseModel::ideal()), std::invalid_argument);
}

TEST(Protocol, ProductInputZeroOne) {
  const auto rho = DensityMatrix::pure(basis_state(4, 1));
  const auto trace = run_protocol(rho, 1, NoiseModel::ideal());
  EXPECT_NEAR(fidelity_with_pure(trace.rounds[0].rho_n, ghz2()), 1.0, 1e-12);
}

TEST(Protocol, GhzIsFixedPointFromRandomStates) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 100; ++k) {
    const auto rho = random_density_matrix(4, rng);
    const auto trace = run_protocol(rho, 1, NoiseModel::ideal());
    EXPECT_NEAR(trace.rounds[0].fidelity, 1.0, 1e-10);
  }
}

TEST(Protocol, ImperfectPumpGivesPSquared) {
  // XX and ZZ settle at 2p-1 and YY at -(2p-1)^2, so F = p^2
  for (double p : {0.99, 0.9, 0.75}) {
    NoiseModel noise;
    noise.pump_fidelity = p;
    const auto trace = run_protocol(DensityMatrix::maximally_mixed(4), 3, noise);
    for (const auto& r : trace.rounds) {
      EXPECT_NEAR(r.fidelity, p * p, 1e-10) << p;
      EXPECT_NEAR(r.corr.zz, 2 * p - 1, 1e-10);
    }
  }
}

TEST(Protocol, MatchesKrausChannelsWithIdealGates) {
  std::mt19937_64 rng(5);
  const auto ch = compose(build_Ez(), build_Ex());
  for (int k = 0; k < 10; ++k) {
    const auto rho_n = random_density_matrix(4, rng);
    const auto trace = run_protocol(rho_n, 1, NoiseModel::ideal());
    EXPECT_LT(max_abs(trace.rounds[0].rho_n.matrix() - apply_channel(ch, rho_n).matrix()), 1e-10);
  }
}

TEST(Correlations, GhzAndMixed) {
  const auto c = correlations(DensityMatrix::pure(ghz2()));
  EXPECT_NEAR(c.xx, 1.0, 1e-15);
  EXPECT_NEAR(c.yy, -1.0, 1e-15);
  EXPECT_NEAR(c.zz, 1.0, 1e-15);
  const auto m = correlations(DensityMatrix::maximally_mixed(4));
  EXPECT_NEAR(m.xx, 0.0, 1e-15);
}

TEST(Witness, HandValuesAndRange) {
  EXPECT_DOUBLE_EQ(witness_fidelity(1, -1, 1), 1.0);
  EXPECT_DOUBLE_EQ(witness_fidelity(0, 0, 0), 0.25);
  EXPECT_DOUBLE_EQ(witness_fidelity(-1, 1, -1), -0.5);  // not a state; the formula is linear
  EXPECT_THROW(witness_fidelity(1.1, 0, 0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(witness_fidelity_estimate({1.1, -1, 1}), 1.025);
}

TEST(GateSets, IdealNativesReproduceIdealGates) {
  const IdealGateSet ideal(3);
  for (int sign : {+1, -1}) {
    const auto native = ideal_native_gate_set(3, {1, 2}, sign);
    std::vector<GateOp> ops = {{GateName::H, {1}},    {GateName::H, {2}},  {GateName::S, {1}},
                               {GateName::Sdg, {2}},  {GateName::X, {1}},  {GateName::Rx, {2}, -kPi / 2},
                               {GateName::Rx, {1}, kPi / 2}, {GateName::CNOT, {0, 1}}, {GateName::CNOT, {0, 2}},
                               {GateName::H, {0}},    {GateName::Rz, {2}, 0.3}};
    for (const auto& op : ops) {
      EXPECT_NEAR(gate_fidelity(native.unitary(op), ideal.unitary(op)), 1.0, 1e-12) << to_string(op.name);
    }
    EXPECT_THROW(native.unitary({GateName::CNOT, {1, 2}}), std::invalid_argument);
    EXPECT_THROW(native.unitary({GateName::Rx, {1}, 0.3}), std::invalid_argument);
  }
}

TEST(GateSets, SpectatorLayoutRoundTrip) {
  // logical nuclei on physical qubits 3 and 1 of a four-qubit register
  const auto gates = ideal_native_gate_set(4, {3, 1});
  std::mt19937_64 rng(12);
  const auto rho_n = random_density_matrix(4, rng);
  const auto full = embed_nuclear_state(rho_n, gates);
  EXPECT_EQ(full.dim(), 16u);
  EXPECT_LT(max_abs(nuclear_state(full, gates).matrix() - rho_n.matrix()), 1e-12);
  const auto trace = run_protocol(rho_n, 2, NoiseModel::ideal(), gates);
  EXPECT_NEAR(trace.rounds.back().fidelity, 1.0, 1e-10);
}
