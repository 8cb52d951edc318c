#pragma once

// Nuclear Ramsey precession, adaptive frequency estimation, inversion of
// f_{+-} = sqrt(A_zx^2 + (A_zz +- f_L)^2) and nuclear polarization.

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nvdiss/circuit.hpp"
#include "nvdiss/protocol.hpp"
#include "nvdiss/spin_model.hpp"

namespace nvdiss {

/// Population of the nuclear +y state after free precession with the
/// electron in level `ms`. The nucleus starts in `rho_z` (polarized along +z
/// when ideal) and is rotated onto +y by Rx(-pi/2) before precessing.
std::vector<double> ramsey_signal(const NuclearSpin& spin, const SpinRegister& reg, int ms,
                                  const std::vector<double>& t_grid_ns, const DensityMatrix& rho_z);
/// Same, ideal polarization.
std::vector<double> ramsey_signal(const NuclearSpin& spin, const SpinRegister& reg, int ms,
                                  const std::vector<double>& t_grid_ns);

struct RamseyFit {
  double frequency_khz = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double fft_frequency_khz = 0.0;
  double bin_width_khz = 0.0;
  bool fit_ok = false;  // false: least squares failed, frequency is the FFT peak
};

/// Cosine least squares with the frequency started from the periodogram
/// peak. The grid must be uniform.
RamseyFit fit_ramsey(const std::vector<double>& t_ns, const std::vector<double>& y);

double visibility(double p_max, double p_min);
double polarization_fidelity(double v);

class HyperfineInversionError : public std::invalid_argument {
 public:
  HyperfineInversionError(const std::string& what, double residual)
      : std::invalid_argument(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A_zz = (f+^2 - f-^2) / (4 f_L), A_zx = sqrt(f+^2 - (A_zz + f_L)^2).
HyperfineParams hyperfine_from_frequencies(double f_plus_khz, double f_minus_khz, double larmor_khz);

/// (cos phi, sin phi) of the phase phi = 2 pi f t accumulated over t_ns.
using PhaseOracle = std::function<std::pair<double, double>(double t_ns)>;

PhaseOracle ideal_phase_oracle(double f_khz);
/// Rotation angle of the simulated nuclear precession under level `ms`.
PhaseOracle ramsey_phase_oracle(const NuclearSpin& spin, const SpinRegister& reg, int ms);

struct FrequencyEstimate {
  double center_khz = 0.0;
  double half_width_khz = 0.0;
  int iterations = 0;
  bool restart = false;                 // a measurement contradicted the current interval
  std::vector<double> half_widths_khz;  // after each iteration, starting with the initial one
};

/// Binary refinement: at evolution time 1/(4W) the phase relative to the
/// interval center lies within +-pi/2, and its sign picks the half holding f.
FrequencyEstimate adaptive_estimate(const PhaseOracle& oracle, double lo_khz, double hi_khz, int iterations);

/// Swap of a |0> electron and nucleus `nucleus` built from two CNOTs, then a
/// pump: [H_e, H_n, CNOT(e,n), H_e, H_n, CNOT(e,n), pump].
Circuit polarization_circuit(std::size_t nucleus = 1);

/// <Z_n> of logical nucleus 1 after polarization_circuit, starting from the
/// electron in |0> and every nucleus maximally mixed.
double polarize_and_measure(const GateSet& gates, const NoiseModel& noise, DensityMatrix* nucleus_out = nullptr);

struct SpinEstimateOptions {
  int iterations = 20;
  double init_half_width_khz = 50.0;
  double dt_ns = 50.0;
  int samples = 400;
};

struct SpinEstimate {
  std::string id;
  HyperfineParams estimate;
  double a_zz_uncertainty_khz = 0.0;
  double a_zx_uncertainty_khz = 0.0;
  FrequencyEstimate f_plus;
  FrequencyEstimate f_minus;
  RamseyFit larmor_fit;
  double a_zz_residual_khz = 0.0;  // estimate - register value
  double a_zx_residual_khz = 0.0;
};

SpinEstimate estimate_spin(const NuclearSpin& spin, const SpinRegister& reg, const SpinEstimateOptions& opt = {});
/// Independent spins in parallel.
std::vector<SpinEstimate> estimate_register(const SpinRegister& reg, const SpinEstimateOptions& opt = {});

}  // namespace nvdiss
