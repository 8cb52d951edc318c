#pragma once

// Electron + 13C register model.
//
// Units: hyperfine parameters and Larmor frequency are cyclic frequencies in
// kHz (the tabulated A/2pi values). Hamiltonians are returned in angular
// units of 2*pi*kHz, i.e. H = 2*pi*(f_z I_z + f_x I_x). Times are in ns.
//
// The electron is the qubit {|m_s=0>, |m_s=-1>} mapped to {|0>, |1>}.

#include <string>
#include <vector>

#include "nvdiss/qmath.hpp"

namespace nvdiss {

/// Gyromagnetic ratio of 13C, 10.7084 MHz/T (CODATA / NIST).
inline constexpr double kGamma13C_kHzPerGauss = 1.07084;

struct HyperfineParams {
  double a_zz_khz = 0.0;
  double a_zx_khz = 0.0;
};

struct NuclearSpin {
  std::string id;
  HyperfineParams params;
};

class SpinRegister {
 public:
  SpinRegister(double b_z_gauss, double gamma_khz_per_gauss, std::vector<NuclearSpin> spins);

  double b_z_gauss() const { return b_z_; }
  double gamma_khz_per_gauss() const { return gamma_; }
  double larmor_khz() const { return gamma_ * b_z_; }
  const std::vector<NuclearSpin>& spins() const { return spins_; }
  std::size_t num_nuclei() const { return spins_.size(); }
  std::size_t num_qubits() const { return spins_.size() + 1; }
  std::size_t dim() const { return std::size_t{1} << num_qubits(); }

  /// Qubit index of a nucleus (electron is qubit 0). Throws for unknown ids.
  std::size_t qubit_of(const std::string& id) const;
  const NuclearSpin& spin(const std::string& id) const;

  /// Same field and constants, restricted to the listed spins (in the given order).
  SpinRegister subregister(const std::vector<std::string>& ids) const;

 private:
  double b_z_;
  double gamma_;
  std::vector<NuclearSpin> spins_;
};

/// Surveyed hyperfine couplings of the four nearby 13C spins, ids "1".."4".
std::vector<NuclearSpin> survey_spins();
inline constexpr double kReferenceFieldGauss = 492.65;

/// Conditional nuclear Hamiltonian for electron level ms in {0, -1, +1}.
Matrix2c effective_hamiltonian(int ms, const NuclearSpin& spin, const SpinRegister& reg);

struct PrecessionFrequencies {
  double f_plus_khz;
  double f_minus_khz;
};

PrecessionFrequencies precession_frequencies(const NuclearSpin& spin, const SpinRegister& reg);

/// Unitary that is block diagonal in the electron basis with a product of
/// single-nucleus unitaries on each block, optionally preceded by an electron
/// flip:
///
///   U = sum_e phase[e] |pi(e)><e| (x)_j V_e^{(j)},   pi(e) = e xor flip.
///
/// Free evolution, electron pi pulses and any sequence of them stay in this
/// form.
struct BranchUnitary {
  bool flip = false;
  cplx phase[2] = {1.0, 1.0};
  std::vector<Matrix2c> v0;  // nuclear unitaries for electron input |0>
  std::vector<Matrix2c> v1;  // ... for electron input |1>

  static BranchUnitary identity(std::size_t n_nuclei);
  /// this followed by `next`
  BranchUnitary then(const BranchUnitary& next) const;
  const std::vector<Matrix2c>& branch(int e) const { return e == 0 ? v0 : v1; }
  ComplexMatrix to_matrix() const;
};

enum class PulseAxis { X, Y };

BranchUnitary free_evolution_branches(const SpinRegister& reg, double t_ns);
BranchUnitary pi_pulse_branches(const SpinRegister& reg, PulseAxis axis);

/// |0><0| (x) prod_j exp(-i H0 t) + |1><1| (x) prod_j exp(-i H-1 t).
ComplexMatrix conditional_free_evolution(const SpinRegister& reg, double t_ns);

/// Ideal instantaneous electron pi pulse about X (or Y), identity on nuclei.
ComplexMatrix microwave_pi_pulse(const SpinRegister& reg, PulseAxis axis = PulseAxis::X);

/// exp(-i H t) for a 2x2 Hamiltonian in units of 2*pi*kHz and t in ns.
Matrix2c evolve_2x2(const Matrix2c& h, double t_ns);

}  // namespace nvdiss
