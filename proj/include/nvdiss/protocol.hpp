#pragma once

// Sequences 1 and 2, optical pumping and the repeated dissipative protocol.
//
// Circuits are written on a logical register: qubit 0 = electron, 1 = n1,
// 2 = n2. A GateSet maps them onto a physical register, which may hold extra
// spectator nuclei, and supplies the unitary of each gate.

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nvdiss/circuit.hpp"
#include "nvdiss/pulse.hpp"
#include "nvdiss/spin_model.hpp"

namespace nvdiss {

enum class GateMode { Ideal, Compiled };

std::string to_string(GateMode m);
GateMode gate_mode_from_string(const std::string& s);

struct NoiseModel {
  double pump_fidelity = 1.0;
  GateMode gate_mode = GateMode::Ideal;
  bool spectators_enabled = false;

  static NoiseModel ideal() { return {}; }
  /// pump 0.99, compiled gates, spectators on
  static NoiseModel realistic() { return {0.99, GateMode::Compiled, true}; }
};

void validate(const NoiseModel& noise);

class GateSet {
 public:
  virtual ~GateSet() = default;

  /// Physical qubit count (electron + every simulated nucleus).
  virtual std::size_t num_qubits() const = 0;
  /// Physical qubit of logical qubit `q`.
  virtual std::size_t physical(std::size_t q) const = 0;
  virtual std::size_t num_logical() const = 0;
  /// Physical-register unitary of one logical gate.
  virtual ComplexMatrix unitary(const GateOp& op) const = 0;
};

/// Exact gates; the physical register is the logical one.
class IdealGateSet final : public GateSet {
 public:
  explicit IdealGateSet(std::size_t n_logical = 3) : n_(n_logical) {}
  std::size_t num_qubits() const override { return n_; }
  std::size_t physical(std::size_t q) const override;
  std::size_t num_logical() const override { return n_; }
  ComplexMatrix unitary(const GateOp& op) const override;

 private:
  std::size_t n_;
};

/// Full-register unitaries of the native nuclear gates of one logical nucleus.
struct NativeGates {
  ComplexMatrix cond;    // conditional +-pi/2 x rotation, sign below
  int cond_sign = +1;
  ComplexMatrix z_half;  // Rz(pi/2)
  ComplexMatrix x_half;  // unconditional Rx(pi/2)
};

/// Gates assembled from natives: H_n = z x z, S = z, S^dag = Rz(-pi) z,
/// X = x^2, Rx(-pi/2) = Rz(pi) x Rz(-pi), CNOT(e -> n) = G_s, virtual
/// Rz_e(-s pi/2), Rx_n(-s pi/2). Electron gates and Rz are exact
/// (microwave pulses and frame updates).
class NativeGateSet final : public GateSet {
 public:
  /// `logical_qubits[k]` is the physical qubit of logical nucleus k+1.
  NativeGateSet(std::size_t n_physical, std::vector<std::size_t> logical_qubits,
                std::vector<NativeGates> natives);

  std::size_t num_qubits() const override { return n_; }
  std::size_t physical(std::size_t q) const override;
  std::size_t num_logical() const override { return map_.size() + 1; }
  ComplexMatrix unitary(const GateOp& op) const override;

 private:
  ComplexMatrix frame(std::size_t q, double angle) const;
  ComplexMatrix negated_x_half(const NativeGates& g, std::size_t q) const;

  std::size_t n_;
  std::vector<std::size_t> map_;
  std::vector<NativeGates> natives_;
};

/// Natives from CPMG sequences with fitted frames, evaluated on `reg`.
/// Missing library entries are compiled with the default search.
NativeGateSet compiled_gate_set(const SpinRegister& reg, const std::vector<std::string>& logical_spins,
                                const GateLibrary& library);
/// Exact natives on the same layout; every composite is then exact up to phase.
NativeGateSet ideal_native_gate_set(std::size_t n_physical, const std::vector<std::size_t>& logical_qubits,
                                    int cond_sign = +1);

// ---------------------------------------------------------------------------

Circuit sequence2_circuit();
Circuit sequence1_circuit();

/// Electron (qubit 0) reset: (p|0><0| + (1-p)|1><1|) (x) Tr_e rho.
DensityMatrix optical_pump(const DensityMatrix& rho, const NoiseModel& noise);

/// Apply a circuit through a gate set on a physical-register state.
DensityMatrix run_circuit(const DensityMatrix& rho, const Circuit& c, const GateSet& gates,
                          const NoiseModel& noise);

/// Two-nucleus reduced state in logical order (n1, n2).
DensityMatrix nuclear_state(const DensityMatrix& rho, const GateSet& gates);

/// |0><0|_e (x) rho_n on (n1, n2), spectators maximally mixed.
DensityMatrix embed_nuclear_state(const DensityMatrix& rho_n, const GateSet& gates);

struct Correlations {
  double xx = 0.0;
  double yy = 0.0;
  double zz = 0.0;
};

Correlations correlations(const DensityMatrix& rho_n);

/// F = 1/2 - (1 - xx + yy - zz)/4; inputs must lie in [-1, 1].
double witness_fidelity(double xx, double yy, double zz);
double witness_fidelity(const Correlations& c);
/// Same formula without the range check, for noisy estimates.
double witness_fidelity_estimate(const Correlations& c);

struct ProtocolRound {
  int round = 0;
  Correlations corr;
  double fidelity = 0.0;  // <GHZ| rho_n |GHZ>
  DensityMatrix rho_n;
  DensityMatrix full;     // whole register after the final pump
};

struct ProtocolTrace {
  std::vector<ProtocolRound> rounds;
};

/// Each round: pump, sequence 1, pump, sequence 2, pump.
ProtocolTrace run_protocol(const DensityMatrix& rho0, int rounds, const NoiseModel& noise, const GateSet& gates);
/// Ideal gates on the bare three-qubit register.
ProtocolTrace run_protocol(const DensityMatrix& rho0, int rounds, const NoiseModel& noise);

}  // namespace nvdiss
