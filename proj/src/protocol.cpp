#include "nvdiss/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nvdiss {

std::string to_string(GateMode m) { return m == GateMode::Ideal ? "ideal" : "compiled"; }

GateMode gate_mode_from_string(const std::string& s) {
  if (s == "ideal") return GateMode::Ideal;
  if (s == "compiled") return GateMode::Compiled;
  throw std::invalid_argument("unknown gate mode '" + s + "'");
}

void validate(const NoiseModel& noise) {
  if (!(noise.pump_fidelity >= 0.0 && noise.pump_fidelity <= 1.0)) {
    throw std::invalid_argument("pump_fidelity must lie in [0, 1]");
  }
}

std::size_t IdealGateSet::physical(std::size_t q) const {
  if (q >= n_) throw std::invalid_argument("logical qubit out of range");
  return q;
}

ComplexMatrix IdealGateSet::unitary(const GateOp& op) const { return ideal_unitary(op, n_); }

NativeGateSet::NativeGateSet(std::size_t n_physical, std::vector<std::size_t> logical_qubits,
                             std::vector<NativeGates> natives)
    : n_(n_physical), map_(std::move(logical_qubits)), natives_(std::move(natives)) {
  if (map_.size() != natives_.size()) throw std::invalid_argument("NativeGateSet: one native set per nucleus");
  const auto dim = Eigen::Index{1} << n_;
  for (std::size_t k = 0; k < map_.size(); ++k) {
    if (map_[k] == 0 || map_[k] >= n_) throw std::invalid_argument("NativeGateSet: bad nuclear qubit");
    if (std::count(map_.begin(), map_.end(), map_[k]) != 1) {
      throw std::invalid_argument("NativeGateSet: repeated nuclear qubit");
    }
    const auto& g = natives_[k];
    for (const ComplexMatrix* m : {&g.cond, &g.z_half, &g.x_half}) {
      if (m->rows() != dim || !is_unitary(*m, 1e-8)) {
        throw std::invalid_argument("NativeGateSet: native gate is not a register unitary");
      }
    }
    if (g.cond_sign != 1 && g.cond_sign != -1) throw std::invalid_argument("NativeGateSet: sign must be +-1");
  }
}

std::size_t NativeGateSet::physical(std::size_t q) const {
  if (q == 0) return 0;
  if (q > map_.size()) throw std::invalid_argument("logical qubit out of range");
  return map_[q - 1];
}

namespace {

ComplexMatrix power(const ComplexMatrix& m, int k) {
  ComplexMatrix out = ComplexMatrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) out = m * out;
  return out;
}

// k with angle = k pi/2, or -1
int quarter_turns(double angle) {
  const double k = angle / (kPi / 2.0);
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-12) return -1;
  return static_cast<int>(((static_cast<long>(r) % 4) + 4) % 4);
}

}  // namespace

// virtual Rz on one physical qubit
ComplexMatrix NativeGateSet::frame(std::size_t q, double angle) const {
  return embed(ComplexMatrix(rz(angle)), q, n_);
}

// Rx(-pi/2) as Rz(pi) x Rz(-pi): one native instead of three
ComplexMatrix NativeGateSet::negated_x_half(const NativeGates& g, std::size_t q) const {
  return frame(q, kPi) * g.x_half * frame(q, -kPi);
}

ComplexMatrix NativeGateSet::unitary(const GateOp& op) const {
  if (op.name == GateName::Pump) throw std::invalid_argument("pump is not unitary");
  for (auto q : op.targets) {
    if (q >= num_logical()) throw std::invalid_argument("gate target outside the register");
  }
  GateOp phys = op;
  for (auto& q : phys.targets) q = physical(q);

  if (op.name == GateName::CNOT) {
    if (op.targets.size() != 2 || op.targets[0] != 0 || op.targets[1] == 0) {
      throw std::invalid_argument("native CNOT needs the electron as control and a nucleus as target");
    }
    const auto& g = natives_[op.targets[1] - 1];
    const int s = g.cond_sign;
    const ComplexMatrix ez = embed(ComplexMatrix(rz(-s * kPi / 2.0)), 0, n_);
    const ComplexMatrix xn = s > 0 ? negated_x_half(g, physical(op.targets[1])) : g.x_half;
    return xn * ez * g.cond;
  }
  if (op.targets.size() != 1) throw std::invalid_argument("single-qubit gate needs one target");
  if (op.targets[0] == 0 || op.name == GateName::Rz) return ideal_unitary(phys, n_);

  const auto& g = natives_[op.targets[0] - 1];
  switch (op.name) {
    case GateName::H: return g.z_half * g.x_half * g.z_half;
    case GateName::S: return g.z_half;
    case GateName::Sdg: return frame(phys.targets[0], -kPi) * g.z_half;
    case GateName::X: return power(g.x_half, 2);
    case GateName::Rx: {
      const int k = quarter_turns(op.angle);
      if (k < 0) throw std::invalid_argument("nuclear Rx must be a multiple of pi/2");
      return k == 3 ? negated_x_half(g, phys.targets[0]) : power(g.x_half, k);
    }
    default: break;
  }
  throw std::invalid_argument("no native decomposition for " + to_string(op.name));
}

NativeGateSet compiled_gate_set(const SpinRegister& reg, const std::vector<std::string>& logical_spins,
                                const GateLibrary& library) {
  std::vector<std::size_t> qubits;
  std::vector<NativeGates> natives;
  for (const auto& id : logical_spins) {
    qubits.push_back(reg.qubit_of(id));
    NativeGates n;
    for (GateKind kind : {GateKind::ConditionalXHalf, GateKind::ZHalf, GateKind::UnconditionalXHalf}) {
      const GateTarget target{kind, id};
      CpmgGateSpec spec;
      if (const auto* g = library.find(id, kind)) {
        spec = g->spec;
      } else {
        spec = compile_gate(target, reg, default_search(kind)).spec;
      }
      const auto g = evaluate_gate(target, reg, spec);
      const ComplexMatrix u = g.branches(reg).to_matrix();
      switch (kind) {
        case GateKind::ConditionalXHalf:
          n.cond = u;
          n.cond_sign = g.sign;
          break;
        case GateKind::ZHalf: n.z_half = u; break;
        default: n.x_half = u; break;
      }
    }
    natives.push_back(std::move(n));
  }
  return NativeGateSet(reg.num_qubits(), std::move(qubits), std::move(natives));
}

NativeGateSet ideal_native_gate_set(std::size_t n_physical, const std::vector<std::size_t>& logical_qubits,
                                    int cond_sign) {
  std::vector<NativeGates> natives;
  const Matrix2c p0 = (Matrix2c() << 1, 0, 0, 0).finished();
  const Matrix2c p1 = (Matrix2c() << 0, 0, 0, 1).finished();
  for (auto q : logical_qubits) {
    if (q == 0 || q >= n_physical) throw std::invalid_argument("ideal_native_gate_set: bad nuclear qubit");
    NativeGates n;
    const auto ops = ideal_branch_ops(GateKind::ConditionalXHalf, cond_sign);
    n.cond = embed(p0, 0, n_physical) * embed(ops[0], q, n_physical) +
             embed(p1, 0, n_physical) * embed(ops[1], q, n_physical);
    n.cond_sign = cond_sign;
    n.z_half = embed(ComplexMatrix(rz(kPi / 2.0)), q, n_physical);
    n.x_half = embed(ComplexMatrix(rx(kPi / 2.0)), q, n_physical);
    natives.push_back(std::move(n));
  }
  return NativeGateSet(n_physical, logical_qubits, std::move(natives));
}

// ---------------------------------------------------------------------------

Circuit sequence2_circuit() {
  Circuit c;
  c.h(0).cnot(0, 1).cnot(0, 2).h(0);
  // C_{n1 e} written with the electron as control
  c.h(1).cnot(0, 1).h(0).h(1);
  return c;
}

Circuit sequence1_circuit() {
  Circuit c = sequence2_circuit();
  c.h(1).h(2);
  return c;
}

DensityMatrix optical_pump(const DensityMatrix& rho, const NoiseModel& noise) {
  validate(noise);
  const std::size_t dim = rho.dim();
  if (dim < 2) throw std::invalid_argument("optical_pump: no electron subsystem");
  const double p = noise.pump_fidelity;
  ComplexMatrix e = ComplexMatrix::Zero(2, 2);
  e(0, 0) = p;
  e(1, 1) = 1.0 - p;
  if (dim == 2) return DensityMatrix::from_numerical(e);
  const std::size_t n = static_cast<std::size_t>(std::lround(std::log2(static_cast<double>(dim))));
  std::vector<std::size_t> keep, dims(n, 2);
  for (std::size_t q = 1; q < n; ++q) keep.push_back(q);
  const auto rest = partial_trace(rho, keep, dims);
  return DensityMatrix::from_numerical(kron(e, rest.matrix()));
}

DensityMatrix run_circuit(const DensityMatrix& rho, const Circuit& c, const GateSet& gates,
                          const NoiseModel& noise) {
  if (rho.dim() != (std::size_t{1} << gates.num_qubits())) {
    throw std::invalid_argument("run_circuit: state does not match the gate set register");
  }
  DensityMatrix out = rho;
  for (const auto& op : c.ops) {
    out = op.name == GateName::Pump ? optical_pump(out, noise) : evolve(out, gates.unitary(op));
  }
  return out;
}

namespace {

// physical qubits in logical order, spectators last
std::vector<std::size_t> logical_layout(const GateSet& gates) {
  std::vector<std::size_t> order;
  for (std::size_t q = 0; q < gates.num_logical(); ++q) order.push_back(gates.physical(q));
  for (std::size_t q = 0; q < gates.num_qubits(); ++q) {
    if (std::find(order.begin(), order.end(), q) == order.end()) order.push_back(q);
  }
  return order;
}

}  // namespace

DensityMatrix nuclear_state(const DensityMatrix& rho, const GateSet& gates) {
  if (gates.num_logical() != 3) throw std::invalid_argument("nuclear_state: expected two logical nuclei");
  const auto n = gates.num_qubits();
  const auto layout = logical_layout(gates);
  const DensityMatrix ordered(permute_qubits(rho.matrix(), layout));
  std::vector<std::size_t> dims(n, 2);
  const std::size_t keep[] = {1, 2};
  return partial_trace(ordered, keep, dims);
}

DensityMatrix embed_nuclear_state(const DensityMatrix& rho_n, const GateSet& gates) {
  if (rho_n.dim() != 4 || gates.num_logical() != 3) {
    throw std::invalid_argument("embed_nuclear_state: expected a two-nucleus state");
  }
  const auto n = gates.num_qubits();
  ComplexMatrix e = ComplexMatrix::Zero(2, 2);
  e(0, 0) = 1.0;
  ComplexMatrix m = kron(e, rho_n.matrix());
  const auto spect = Eigen::Index{1} << (n - 3);
  m = kron(m, ComplexMatrix::Identity(spect, spect) / static_cast<double>(spect));
  // logical position of every physical qubit
  const auto layout = logical_layout(gates);
  std::vector<std::size_t> order(n);
  for (std::size_t pos = 0; pos < n; ++pos) order[layout[pos]] = pos;
  return DensityMatrix::from_numerical(permute_qubits(m, order));
}

Correlations correlations(const DensityMatrix& rho_n) {
  if (rho_n.dim() != 4) throw std::invalid_argument("correlations: expected a two-qubit state");
  return {expectation(rho_n, pauli_string({Pauli::X, Pauli::X})),
          expectation(rho_n, pauli_string({Pauli::Y, Pauli::Y})),
          expectation(rho_n, pauli_string({Pauli::Z, Pauli::Z}))};
}

double witness_fidelity_estimate(const Correlations& c) { return 0.5 - 0.25 * (1.0 - c.xx + c.yy - c.zz); }

double witness_fidelity(double xx, double yy, double zz) {
  for (double v : {xx, yy, zz}) {
    if (!(std::abs(v) <= 1.0 + 1e-12)) throw std::invalid_argument("witness_fidelity: correlation outside [-1, 1]");
  }
  return witness_fidelity_estimate({xx, yy, zz});
}

double witness_fidelity(const Correlations& c) { return witness_fidelity(c.xx, c.yy, c.zz); }

ProtocolTrace run_protocol(const DensityMatrix& rho0, int rounds, const NoiseModel& noise, const GateSet& gates) {
  if (rounds < 1) throw std::invalid_argument("run_protocol: rounds must be >= 1");
  validate(noise);
  const Circuit s1 = sequence1_circuit();
  const Circuit s2 = sequence2_circuit();
  Circuit round;
  round.pump().append(s1).pump().append(s2).pump();

  ProtocolTrace trace;
  DensityMatrix full = embed_nuclear_state(rho0, gates);
  for (int r = 1; r <= rounds; ++r) {
    full = run_circuit(full, round, gates, noise);
    auto rho_n = nuclear_state(full, gates);
    const auto c = correlations(rho_n);
    const double f = std::clamp(fidelity_with_pure(rho_n, ghz2()), 0.0, 1.0);
    trace.rounds.push_back({r, c, f, std::move(rho_n), full});
  }
  return trace;
}

ProtocolTrace run_protocol(const DensityMatrix& rho0, int rounds, const NoiseModel& noise) {
  if (noise.gate_mode != GateMode::Ideal) {
    throw std::invalid_argument("run_protocol: compiled gates need a register and gate set");
  }
  return run_protocol(rho0, rounds, noise, IdealGateSet(3));
}

}  // namespace nvdiss
