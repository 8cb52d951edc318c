#pragma once

// XY-8 CPMG sequences on the electron and the conditional nuclear gates they
// realize.
//
// A sequence with spacing tau and N pulses is
//
//   tau/2 - pi - tau - pi - ... - tau - pi - tau/2      (total time N*tau)
//
// with pulse phases following X Y X Y Y X Y X, truncated for N not divisible
// by 8. N = 0 is a plain free evolution of length tau.
//
// Compiled gates are the CPMG unitary followed by virtual Z rotations (phase
// bookkeeping of the electron and nuclear frames). The virtual rotations are
// exact; the frame angles are fitted per gate.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvdiss/spin_model.hpp"

namespace nvdiss {

std::vector<PulseAxis> xy8_pattern(int n_pulses);

struct CpmgGateSpec {
  double tau_ns = 0.0;
  int n_pulses = 0;
  std::vector<PulseAxis> phase_pattern() const { return xy8_pattern(n_pulses); }
};

void validate(const CpmgGateSpec& spec);

BranchUnitary cpmg_branches(const CpmgGateSpec& spec, const SpinRegister& reg);
ComplexMatrix cpmg_unitary(const CpmgGateSpec& spec, const SpinRegister& reg);
/// Dense product of conditional_free_evolution and microwave_pi_pulse factors.
ComplexMatrix cpmg_unitary_reference(const CpmgGateSpec& spec, const SpinRegister& reg);

/// Probability that an electron prepared in |+> is found in the state the
/// bare pulse train maps |+> to, with the nuclei maximally mixed.
double electron_coherence(const BranchUnitary& u);

std::vector<double> cpmg_signal(const SpinRegister& reg, const std::vector<double>& tau_grid_ns,
                                int n_pulses);
std::vector<double> cpmg_signal_serial(const SpinRegister& reg, const std::vector<double>& tau_grid_ns,
                                       int n_pulses);

// ---------------------------------------------------------------------------
// gate targets and fidelity

enum class GateKind { ConditionalXHalf, ZHalf, UnconditionalXHalf, CnotEToN };

std::string to_string(GateKind kind);
GateKind gate_kind_from_string(const std::string& s);

struct GateTarget {
  GateKind kind;
  std::string spin_id;
};

/// Nuclear operation applied for electron input |e>: the ideal gate is
/// sum_e |e><e| (x) branch_op[e]. `sign` selects R_{+x}/R_{-x} ordering for
/// the conditional rotation and is ignored otherwise.
std::array<Matrix2c, 2> ideal_branch_ops(GateKind kind, int sign = +1);
ComplexMatrix ideal_gate(GateKind kind, int sign = +1);

/// Average gate fidelity (|tr(V^dag U)|^2 / d + 1) / (d + 1).
double gate_fidelity(const ComplexMatrix& u_actual, const ComplexMatrix& u_ideal);

struct FrameCorrection {
  double electron = 0.0;
  std::vector<double> nuclei;

  /// Rz(electron) (x) Rz(nuclei[0]) (x) ... as a branch unitary.
  BranchUnitary branches() const;
};

struct FrameFit {
  FrameCorrection frame;
  double fidelity = 0.0;  // average gate fidelity over the whole register
};

/// Choose virtual Z angles maximizing the fidelity of `u` followed by the
/// correction against sum_e |e><e| (x) ideal[e] on nucleus `target` and the
/// identity on every other nucleus. The target's own angle is held at zero
/// when `fit_target` is false.
FrameFit fit_frame(const BranchUnitary& u, std::size_t target, const std::array<Matrix2c, 2>& ideal,
                   bool fit_target = true);

/// Fidelity of a spectator against "no conditional action": max over a
/// virtual Z of the gate fidelity of diag(V0, V1) against the identity.
double spectator_fidelity(const Matrix2c& v0, const Matrix2c& v1);

struct RealizedGate {
  ComplexMatrix full;  // whole register
  ComplexMatrix pair;  // electron + target evolved alone
};

RealizedGate realized_gate(const CpmgGateSpec& spec, const SpinRegister& reg, const std::string& target_spin);

// ---------------------------------------------------------------------------
// compilation

struct CompileSearch {
  double tau_min_ns = 0.0;
  double tau_max_ns = 0.0;
  double tau_step_ns = 1.0;
  int n_min = 0;
  int n_max = 0;
  int n_step = 2;
  double fidelity_floor = 0.9;
  double spectator_weight = 1.0;

  std::vector<double> tau_grid() const;
  std::vector<int> n_grid() const;
};

/// Default search window for each gate kind.
CompileSearch default_search(GateKind kind);

struct GridPoint {
  double tau_ns = 0.0;
  int n_pulses = 0;
  int sign = +1;
  double fidelity = 0.0;  // frame-corrected fidelity of the electron-target pair
  double objective = 0.0;
};

/// Evaluate every (tau, N) of the search grid; output order is tau-major.
std::vector<GridPoint> scan_gate_grid(const GateTarget& target, const SpinRegister& reg,
                                      const CompileSearch& search);
std::vector<GridPoint> scan_gate_grid_serial(const GateTarget& target, const SpinRegister& reg,
                                             const CompileSearch& search);

/// Deterministic best point: objective desc, then N asc, then tau asc.
GridPoint select_best(const std::vector<GridPoint>& points);

struct ResonanceReport {
  int order = 0;  // k with tau ~ k / (2 f_mean), f_mean = (f_L + f_-) / 2
  double tau_resonant_ns = 0.0;
  std::optional<double> reference_tau_ns;
  std::optional<int> reference_n;
  std::optional<int> reference_order;
  bool agrees = false;  // same order and tau within 2% of the reference
};

struct CompiledGate {
  GateTarget target;
  CpmgGateSpec spec;
  int sign = +1;
  double fidelity = 0.0;
  double objective = 0.0;
  std::vector<std::pair<std::string, double>> spectator_fidelities;
  FrameCorrection frame;
  double register_fidelity = 0.0;
  ResonanceReport resonance;

  /// CPMG unitary followed by the fitted frame correction.
  BranchUnitary branches(const SpinRegister& reg) const;
};

/// Compiled gates keyed by (spin id, kind).
struct GateLibrary {
  double b_z_gauss = 0.0;
  std::vector<CompiledGate> gates;

  const CompiledGate* find(const std::string& spin_id, GateKind kind) const;
};

class CompileError : public std::runtime_error {
 public:
  CompileError(const std::string& what, CompiledGate best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const CompiledGate& best() const { return best_; }

 private:
  CompiledGate best_;
};

/// Evaluate a fixed (tau, N) as a gate: sign, frame and fidelities.
CompiledGate evaluate_gate(const GateTarget& target, const SpinRegister& reg, const CpmgGateSpec& spec,
                           double spectator_weight = 1.0);

CompiledGate compile_gate(const GateTarget& target, const SpinRegister& reg, const CompileSearch& search);

ResonanceReport resonance_report(const GateTarget& target, const SpinRegister& reg, const CpmgGateSpec& spec);

struct ReferenceGate {
  std::string spin_id;
  GateKind kind;
  double tau_ns;
  int n_pulses;
};

/// Gate parameters reported for spins 2 and 4 at 492.65 G.
std::vector<ReferenceGate> reference_gates();
std::optional<ReferenceGate> reference_gate(const std::string& spin_id, GateKind kind);

struct CnotResult {
  ComplexMatrix pair;  // electron + target, after the fixed local corrections
  double fidelity = 0.0;
  bool below_threshold = false;
};

inline constexpr double kCnotFidelityThreshold = 0.98;

/// CNOT (electron control) from a conditional +-pi/2 x rotation:
/// CNOT ~ Rz_e(-s pi/2) Rx_n(-s pi/2) G_s.
CnotResult cnot_from_conditional(const CpmgGateSpec& spec, int sign, const SpinRegister& reg,
                                 const std::string& spin);
/// Same construction applied to an arbitrary 4x4 conditional gate.
CnotResult cnot_from_conditional(const ComplexMatrix& conditional_pair, int sign);

}  // namespace nvdiss
