#pragma once

// Tomography of the two nuclei through the electron: mapping circuits,
// single-shot readout statistics, Rabi normalization, MLE reconstruction,
// readout calibration and the phase scan of the tomography sequence.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nvdiss/circuit.hpp"
#include "nvdiss/protocol.hpp"
#include "nvdiss/qmath.hpp"

namespace nvdiss {

/// Per-shot readout: P(read 0 | |0>) = fidelity0, P(read 1 | |1>) = fidelity1.
struct ReadoutModel {
  double fidelity0 = 1.0;
  double fidelity1 = 1.0;
  double rabi_pmax = 1.0;
  double rabi_pmin = 0.0;
  int shots = 5000;

  /// Symmetric split of an average fidelity, Rabi extremes matched to it.
  static ReadoutModel symmetric(double avg_fidelity, int shots = 5000);
  double contrast_factor() const { return 1.0 / (rabi_pmax - rabi_pmin); }
};

void validate(const ReadoutModel& m);

using PauliPair = std::array<Pauli, 2>;

std::string basis_label(const PauliPair& b);
PauliPair basis_from_label(const std::string& s);

/// The 15 non-identity settings, ordered II-less lexicographically (IX, IY, ..., ZZ).
std::vector<PauliPair> tomography_settings();

struct TomographySetting {
  PauliPair basis;
  Circuit circuit;
};

/// H_e, electron-controlled P on each nucleus, H_e: <Z_e> afterwards equals
/// <P1 P2> of the nuclei when the electron starts in |0>.
Circuit mapping_circuit(const PauliPair& basis);
std::vector<TomographySetting> tomography_circuits();

struct ReadoutSample {
  double p0_raw = 0.0;
  int counts0 = 0;
};

ReadoutSample simulate_readout(double p_ideal, const ReadoutModel& model, std::mt19937_64& rng);
ReadoutSample simulate_readout(double p_ideal, const ReadoutModel& model, std::uint64_t seed);

double rabi_normalize(double p0_raw, const ReadoutModel& model);

/// sigma = 2 f sqrt(p0 (1 - p0) / N)
double error_bar(double p0, int shots, double f);

struct TomographyRecord {
  PauliPair basis;
  double p0_raw = 0.0;
  double expectation = 0.0;
  double sigma = 0.0;
};

/// Noiseless records: expectation = tr(rho P), sigma = 0.
std::vector<TomographyRecord> exact_records(const DensityMatrix& rho_n);

/// Sampled record of one setting. `full` is the physical-register state with
/// the electron as prepared for readout.
TomographyRecord measure_setting(const DensityMatrix& full, const PauliPair& basis, const GateSet& gates,
                                 const NoiseModel& noise, const ReadoutModel& model, std::uint64_t seed);
/// Exact mapped <Z_e> of one setting, no readout noise.
double mapped_expectation(const DensityMatrix& full, const PauliPair& basis, const GateSet& gates,
                          const NoiseModel& noise);

/// All 15 settings, seed stream per setting (parallel over settings).
std::vector<TomographyRecord> simulate_tomography(const DensityMatrix& full, const GateSet& gates,
                                                  const NoiseModel& noise, const ReadoutModel& model,
                                                  std::uint64_t seed);
std::vector<TomographyRecord> simulate_tomography_serial(const DensityMatrix& full, const GateSet& gates,
                                                         const NoiseModel& noise, const ReadoutModel& model,
                                                         std::uint64_t seed);

/// Seed for (master, stream, index) via std::seed_seq.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

struct MleOptions {
  int max_iterations = 10000;
  double gradient_tol = 1e-9;
  double sigma_floor = 1e-3;
};

struct MleResult {
  DensityMatrix rho;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // weighted mean squared misfit
  double gradient_norm = 0.0;
};

/// Weighted least squares (Gaussian likelihood) over density matrices,
/// weights 1/max(sigma, floor)^2. Accelerated projected gradient on the
/// unit-trace PSD set; converged when the projected gradient norm < tol.
MleResult mle_reconstruct(const std::vector<TomographyRecord>& records, const MleOptions& options = {});

/// Linear inversion rho = (I + sum_P e_P P) / 4, not necessarily positive.
ComplexMatrix linear_inversion(const std::vector<TomographyRecord>& records);

/// Confusion matrix C(i, j) = P(read i | true j); 2x2 acts on each
/// single-setting outcome, 4x4 on the joint outcomes of two-body settings.
std::vector<TomographyRecord> readout_calibrate(const std::vector<TomographyRecord>& records,
                                                const Eigen::MatrixXd& confusion);
/// Forward model of the same confusion, for synthetic data.
std::vector<TomographyRecord> apply_confusion(const std::vector<TomographyRecord>& records,
                                              const Eigen::MatrixXd& confusion);

/// Witness fidelity of records and its propagated error bar.
struct FidelityReport {
  double fidelity = 0.0;  // <GHZ| rho_mle |GHZ>
  double witness = 0.0;   // 1/2 - <W> from the raw XX, YY, ZZ records
  double sigma = 0.0;     // sigma of the witness estimate
};

/// The density matrix reconstructed from the experiment's tomography.
DensityMatrix experimental_ghz_state();

FidelityReport fidelity_report(const std::vector<TomographyRecord>& records, const DensityMatrix& rho_mle);

// ---------------------------------------------------------------------------
// phase scan

struct CosineFit {
  double amplitude = 0.0;  // >= 0
  double phase = 0.0;      // value = offset + amplitude cos(w t + phase)
  double offset = 0.0;
};

/// Linear least squares at a known angular frequency (rad/ns).
CosineFit fit_cosine_fixed(const std::vector<double>& t, const std::vector<double>& y, double omega);

struct PhaseScanCurve {
  PauliPair basis;
  std::vector<double> values;
  CosineFit fit;
};

struct PhaseScan {
  std::vector<double> t_ns;
  std::vector<PhaseScanCurve> ideal;        // ideal gates
  std::vector<PhaseScanCurve> crosstalk;    // given gate set, no compensation
  std::vector<PhaseScanCurve> compensated;  // with the virtual Rz on n1
  std::vector<double> compensation_rad;     // per basis, applied as Rz on n1 before mapping
  double max_offset_deg = 0.0;              // compensated vs ideal, over the four bases
};

/// GHZ on (n1, n2), electron |0>, free precession for each separation time,
/// then the XX, YY, XY, YX mapping circuits with compiled gates. The
/// compensation undoes the phase the spectators add relative to the same
/// gates on the register without them, so it is zero when `spectators` is
/// false.
PhaseScan simulate_tomography_phase_scan(const SpinRegister& reg, const std::vector<std::string>& logical_spins,
                                         const GateLibrary& library, bool spectators,
                                         const std::vector<double>& t_grid_ns);

}  // namespace nvdiss
