#pragma once

// Gate-level circuits over a small logical register (qubit 0 = electron).

#include <cstddef>
#include <string>
#include <vector>

#include "nvdiss/qmath.hpp"

namespace nvdiss {

enum class GateName { H, X, S, Sdg, Rx, Rz, CNOT, Pump };

std::string to_string(GateName g);

struct GateOp {
  GateName name;
  std::vector<std::size_t> targets;  // CNOT: {control, target}
  double angle = 0.0;                // Rx / Rz only
};

struct Circuit {
  std::vector<GateOp> ops;

  Circuit& h(std::size_t q) { return push({GateName::H, {q}}); }
  Circuit& x(std::size_t q) { return push({GateName::X, {q}}); }
  Circuit& s(std::size_t q) { return push({GateName::S, {q}}); }
  Circuit& sdg(std::size_t q) { return push({GateName::Sdg, {q}}); }
  Circuit& rx(std::size_t q, double a) { return push({GateName::Rx, {q}, a}); }
  Circuit& rz(std::size_t q, double a) { return push({GateName::Rz, {q}, a}); }
  Circuit& cnot(std::size_t c, std::size_t t) { return push({GateName::CNOT, {c, t}}); }
  /// Optical reset of the electron (qubit 0).
  Circuit& pump() { return push({GateName::Pump, {0}}); }
  Circuit& append(const Circuit& other);

  std::size_t num_qubits() const;
  bool is_unitary() const;

 private:
  Circuit& push(GateOp op) {
    ops.push_back(std::move(op));
    return *this;
  }
};

/// Unitary of one gate on an `n_qubits` register.
ComplexMatrix ideal_unitary(const GateOp& op, std::size_t n_qubits);
/// Product of all gates; throws if the circuit contains a pump.
ComplexMatrix circuit_unitary(const Circuit& c, std::size_t n_qubits);

/// U P U^dagger
ComplexMatrix conjugate(const ComplexMatrix& u, const ComplexMatrix& p);

}  // namespace nvdiss
