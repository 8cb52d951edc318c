#include <gtest/gtest.h>

#include <random>

#include "nvdiss/measurement.hpp"

using namespace nvdiss;

namespace {

DensityMatrix werner(double p) {
  return DensityMatrix(p * DensityMatrix::pure(ghz2()).matrix() + (1 - p) * ComplexMatrix::Identity(4, 4) / 4.0);
}

Eigen::MatrixXd flip_confusion(double eps) {
  Eigen::Matrix2d c;
  c << 1 - eps, eps, eps, 1 - eps;
  Eigen::MatrixXd out(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block(2 * i, 2 * j, 2, 2) = c(i, j) * c;
  return out;
}

double record(const std::vector<TomographyRecord>& rs, const std::string& label) {
  for (const auto& r : rs)
    if (basis_label(r.basis) == label) return r.expectation;
  ADD_FAILURE() << "no record " << label;
  return 0.0;
}

}  // namespace

TEST(Settings, FifteenInOrder) {
  const auto s = tomography_settings();
  ASSERT_EQ(s.size(), 15u);
  EXPECT_EQ(basis_label(s.front()), "IX");
  EXPECT_EQ(basis_label(s.back()), "ZZ");
  for (const auto& b : s) EXPECT_EQ(basis_label(basis_from_label(basis_label(b))), basis_label(b));
  EXPECT_THROW(basis_from_label("XYZ"), std::invalid_argument);
}

TEST(Mapping, ElectronZEqualsNuclearCorrelator) {
  const IdealGateSet gates(3);
  const NoiseModel noise;
  std::mt19937_64 rng(17);
  for (int k = 0; k < 5; ++k) {
    const auto rho_n = random_density_matrix(4, rng);
    const auto full = embed_nuclear_state(rho_n, gates);
    for (const auto& b : tomography_settings()) {
      const auto p = pauli_string({b[0], b[1]});
      EXPECT_NEAR(mapped_expectation(full, b, gates, noise), expectation(rho_n, p), 1e-12) << basis_label(b);
    }
  }
}

TEST(Mapping, GhzAndMixed) {
  const IdealGateSet gates(3);
  const auto ghz = embed_nuclear_state(DensityMatrix::pure(ghz2()), gates);
  EXPECT_NEAR(mapped_expectation(ghz, {Pauli::Z, Pauli::Z}, gates, {}), 1.0, 1e-12);
  EXPECT_NEAR(mapped_expectation(ghz, {Pauli::Y, Pauli::Y}, gates, {}), -1.0, 1e-12);
  const auto mixed = embed_nuclear_state(DensityMatrix::maximally_mixed(4), gates);
  for (const auto& b : tomography_settings()) EXPECT_NEAR(mapped_expectation(mixed, b, gates, {}), 0.0, 1e-12);
}

TEST(Readout, BinomialStatistics) {
  const auto m = ReadoutModel::symmetric(0.9, 2000);
  std::mt19937_64 rng(3);
  // P(read 0) = 0.7*0.9 + 0.3*0.1 = 0.66
  double sum = 0, sum2 = 0;
  const int trials = 4000;
  for (int i = 0; i < trials; ++i) {
    const double v = simulate_readout(0.7, m, rng).p0_raw;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / trials, var = sum2 / trials - mean * mean;
  EXPECT_NEAR(mean, 0.66, 4 * std::sqrt(0.66 * 0.34 / 2000 / trials));
  EXPECT_NEAR(var, 0.66 * 0.34 / 2000, 0.1 * 0.66 * 0.34 / 2000);
  EXPECT_EQ(simulate_readout(0.7, m, 42).counts0, simulate_readout(0.7, m, 42).counts0);
  EXPECT_THROW(simulate_readout(1.2, m, 1), std::invalid_argument);
}

TEST(Readout, RabiNormalizationInvertsContrast) {
  const auto m = ReadoutModel::symmetric(0.765);
  for (double e : {-1.0, -0.3, 0.0, 0.8, 1.0}) {
    const double p = 0.5 * (1 + e);
    const double raw = p * m.fidelity0 + (1 - p) * (1 - m.fidelity1);
    EXPECT_NEAR(rabi_normalize(raw, m), e, 1e-12);
  }
  EXPECT_NEAR(m.contrast_factor(), 1 / 0.53, 1e-12);
  ReadoutModel bad;
  bad.rabi_pmin = bad.rabi_pmax = 0.5;
  EXPECT_THROW(validate(bad), std::invalid_argument);
}

TEST(Readout, ErrorBarFormula) {
  EXPECT_NEAR(error_bar(0.5, 5000, 1.0), 2 * std::sqrt(0.25 / 5000), 1e-15);
  EXPECT_NEAR(error_bar(0.3, 100, 2.0), 4 * std::sqrt(0.21 / 100), 1e-15);
  EXPECT_EQ(error_bar(1.0, 10, 1.0), 0.0);
  EXPECT_THROW(error_bar(0.5, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(error_bar(0.5, 10, 0.0), std::invalid_argument);
}

TEST(Mle, ExactRecordsOfGhz) {
  const auto r = mle_reconstruct(exact_records(DensityMatrix::pure(ghz2())));
  EXPECT_TRUE(r.converged);
  EXPECT_LT(trace_distance(r.rho, DensityMatrix::pure(ghz2())), 1e-6);
}

TEST(Mle, ExactRecordsOfRandomStates) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 20; ++k) {
    const auto rho = random_density_matrix(4, rng);
    const auto r = mle_reconstruct(exact_records(rho));
    EXPECT_LT(trace_distance(r.rho, rho), 1e-6) << k;
  }
}

TEST(Mle, LinearInversionAgreesOnExactData) {
  std::mt19937_64 rng(2);
  const auto rho = random_density_matrix(4, rng);
  EXPECT_LT(max_abs(linear_inversion(exact_records(rho)) - rho.matrix()), 1e-12);
}

TEST(Mle, SampledTomographyIsPhysicalAndClose) {
  const IdealGateSet gates(3);
  const auto target = werner(0.8);
  const auto full = embed_nuclear_state(target, gates);
  ReadoutModel m;
  m.shots = 5000;
  const auto recs = simulate_tomography(full, gates, {}, m, 2024);
  const auto r = mle_reconstruct(recs);
  EXPECT_GE(r.rho.min_eigenvalue(), -1e-10);
  EXPECT_NEAR(r.rho.matrix().trace().real(), 1.0, 1e-10);
  EXPECT_LT(trace_distance(r.rho, target), 0.05);
}

TEST(Tomography, ParallelMatchesSerialAndSeeds) {
  const IdealGateSet gates(3);
  const auto full = embed_nuclear_state(werner(0.5), gates);
  const auto m = ReadoutModel::symmetric(0.9, 1000);
  const auto a = simulate_tomography(full, gates, {}, m, 7);
  const auto b = simulate_tomography_serial(full, gates, {}, m, 7);
  ASSERT_EQ(a.size(), 15u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].p0_raw, b[i].p0_raw);
    EXPECT_EQ(a[i].sigma, b[i].sigma);
  }
  const auto c = simulate_tomography(full, gates, {}, m, 8);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].p0_raw != c[i].p0_raw;
  EXPECT_TRUE(differs);
}

TEST(Seeds, DeriveSeedIsDeterministicAndSpread) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
  EXPECT_NE(derive_seed(0, 0, 0), derive_seed(1ULL << 32, 0, 0));
}

TEST(Calibration, IdentityConfusionChangesNothing) {
  std::mt19937_64 rng(6);
  const auto recs = exact_records(random_density_matrix(4, rng));
  const auto out = readout_calibrate(recs, Eigen::MatrixXd::Identity(4, 4));
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_NEAR(out[i].expectation, recs[i].expectation, 1e-14);
  const auto out2 = readout_calibrate(recs, Eigen::MatrixXd::Identity(2, 2));
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_NEAR(out2[i].expectation, recs[i].expectation, 1e-14);
}

TEST(Calibration, SymmetricFlipScalesByInverseContrast) {
  const double eps = 0.1;
  Eigen::Matrix2d c;
  c << 1 - eps, eps, eps, 1 - eps;
  std::mt19937_64 rng(7);
  auto recs = exact_records(random_density_matrix(4, rng));
  for (auto& r : recs) r.sigma = 0.01;
  const auto out = readout_calibrate(recs, c);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_NEAR(out[i].expectation, recs[i].expectation / (1 - 2 * eps), 1e-12);
    EXPECT_NEAR(out[i].sigma, 0.01 / (1 - 2 * eps), 1e-12);
  }
  Eigen::Matrix2d singular;
  singular << 0.5, 0.5, 0.5, 0.5;
  EXPECT_THROW(readout_calibrate(recs, singular), std::invalid_argument);
}

TEST(Calibration, ForwardThenInverseRecoversRecords) {
  std::mt19937_64 rng(8);
  const auto recs = exact_records(random_density_matrix(4, rng));
  const auto c = flip_confusion(0.07);
  const auto back = readout_calibrate(apply_confusion(recs, c), c);
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_NEAR(back[i].expectation, recs[i].expectation, 1e-12);
}

TEST(Calibration, RawToCalibratedFidelity) {
  // Werner state with F = (1 + 3p)/4 = 0.708 seen through a per-qubit flip of
  // 0.0762: two-body correlators shrink by (1 - 2 eps)^2 and raw F is ~0.579
  const auto truth = werner(0.6107);
  const auto c = flip_confusion(0.0762);
  const auto raw = apply_confusion(exact_records(truth), c);
  const double f_raw = witness_fidelity_estimate({record(raw, "XX"), record(raw, "YY"), record(raw, "ZZ")});
  EXPECT_NEAR(f_raw, 0.579, 0.002);
  const auto cal = readout_calibrate(raw, c);
  const auto rho = mle_reconstruct(cal).rho;
  EXPECT_NEAR(fidelity_with_pure(rho, ghz2()), 0.708, 0.03);
  const auto rep = fidelity_report(raw, mle_reconstruct(raw).rho);
  EXPECT_NEAR(rep.witness, f_raw, 1e-12);
}

TEST(ExperimentalState, FidelityAndValidity) {
  const auto rho = experimental_ghz_state();
  EXPECT_NEAR(fidelity_with_pure(rho, ghz2()), 0.579, 0.002);
  EXPECT_GE(rho.min_eigenvalue(), 0.0);
}

TEST(CosineFit, RecoversKnownCurve) {
  std::vector<double> t, y;
  const double w = 0.0066;
  for (int i = 0; i < 60; ++i) {
    t.push_back(25.0 * i);
    y.push_back(0.1 + 0.7 * std::cos(w * t.back() + 0.4));
  }
  const auto f = fit_cosine_fixed(t, y, w);
  EXPECT_NEAR(f.amplitude, 0.7, 1e-10);
  EXPECT_NEAR(f.phase, 0.4, 1e-10);
  EXPECT_NEAR(f.offset, 0.1, 1e-10);
}

TEST(PhaseScan, CompensationAndCrosstalk) {
  const SpinRegister reg = SpinRegister(kReferenceFieldGauss, kGamma13C_kHzPerGauss, survey_spins()).subregister({"1", "2", "4"});
  std::vector<double> t;
  for (int i = 0; i < 24; ++i) t.push_back(40.0 * i);
  const GateLibrary lib;
  for (bool spect : {false, true}) {
    const auto scan = simulate_tomography_phase_scan(reg, {"2", "4"}, lib, spect, t);
    ASSERT_EQ(scan.ideal.size(), 4u);
    EXPECT_LT(scan.max_offset_deg, 5.0);
    for (std::size_t b = 0; b < 4; ++b) {
      EXPECT_LE(scan.crosstalk[b].fit.amplitude, scan.ideal[b].fit.amplitude + 1e-9);
      if (!spect) EXPECT_EQ(scan.compensation_rad[b], 0.0);
    }
    // ideal GHZ: XX and YY swing with full amplitude
    EXPECT_NEAR(scan.ideal[0].fit.amplitude, 1.0, 1e-6);
  }
}
