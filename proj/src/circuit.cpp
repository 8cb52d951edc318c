#include "nvdiss/circuit.hpp"

#include <algorithm>
#include <stdexcept>

namespace nvdiss {

std::string to_string(GateName g) {
  switch (g) {
    case GateName::H: return "H";
    case GateName::X: return "X";
    case GateName::S: return "S";
    case GateName::Sdg: return "Sdg";
    case GateName::Rx: return "Rx";
    case GateName::Rz: return "Rz";
    case GateName::CNOT: return "CNOT";
    case GateName::Pump: return "Pump";
  }
  return "?";
}

Circuit& Circuit::append(const Circuit& other) {
  ops.insert(ops.end(), other.ops.begin(), other.ops.end());
  return *this;
}

std::size_t Circuit::num_qubits() const {
  std::size_t n = 0;
  for (const auto& op : ops)
    for (auto q : op.targets) n = std::max(n, q + 1);
  return n;
}

bool Circuit::is_unitary() const {
  return std::none_of(ops.begin(), ops.end(), [](const GateOp& op) { return op.name == GateName::Pump; });
}

namespace {

Matrix2c single_qubit(const GateOp& op) {
  const cplx i(0.0, 1.0);
  Matrix2c m;
  switch (op.name) {
    case GateName::H: return hadamard();
    case GateName::X: return pauli2(Pauli::X);
    case GateName::S: m << 1, 0, 0, i; return m;
    case GateName::Sdg: m << 1, 0, 0, -i; return m;
    case GateName::Rx: return rx(op.angle);
    case GateName::Rz: return rz(op.angle);
    default: throw std::invalid_argument("not a single-qubit gate: " + to_string(op.name));
  }
}

}  // namespace

ComplexMatrix ideal_unitary(const GateOp& op, std::size_t n_qubits) {
  for (auto q : op.targets) {
    if (q >= n_qubits) throw std::invalid_argument("gate target outside the register");
  }
  if (op.name == GateName::Pump) throw std::invalid_argument("pump is not unitary");
  if (op.name != GateName::CNOT) {
    if (op.targets.size() != 1) throw std::invalid_argument("single-qubit gate needs one target");
    return embed(single_qubit(op), op.targets[0], n_qubits);
  }
  if (op.targets.size() != 2 || op.targets[0] == op.targets[1]) {
    throw std::invalid_argument("CNOT needs distinct control and target");
  }
  const Matrix2c p0 = (Matrix2c() << 1, 0, 0, 0).finished();
  const Matrix2c p1 = (Matrix2c() << 0, 0, 0, 1).finished();
  return embed(p0, op.targets[0], n_qubits) +
         embed(p1, op.targets[0], n_qubits) * embed(pauli2(Pauli::X), op.targets[1], n_qubits);
}

ComplexMatrix circuit_unitary(const Circuit& c, std::size_t n_qubits) {
  const auto dim = Eigen::Index{1} << n_qubits;
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  for (const auto& op : c.ops) u = ideal_unitary(op, n_qubits) * u;
  return u;
}

ComplexMatrix conjugate(const ComplexMatrix& u, const ComplexMatrix& p) { return u * p * u.adjoint(); }

}  // namespace nvdiss
