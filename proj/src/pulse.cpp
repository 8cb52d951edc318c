#include "nvdiss/pulse.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nvdiss {

std::vector<PulseAxis> xy8_pattern(int n_pulses) {
  static constexpr PulseAxis kUnit[8] = {PulseAxis::X, PulseAxis::Y, PulseAxis::X, PulseAxis::Y,
                                         PulseAxis::Y, PulseAxis::X, PulseAxis::Y, PulseAxis::X};
  if (n_pulses < 0) throw std::invalid_argument("xy8_pattern: negative pulse count");
  std::vector<PulseAxis> out(static_cast<std::size_t>(n_pulses));
  for (int k = 0; k < n_pulses; ++k) out[static_cast<std::size_t>(k)] = kUnit[k % 8];
  return out;
}

void validate(const CpmgGateSpec& spec) {
  if (!(spec.tau_ns > 0.0)) throw std::invalid_argument("CpmgGateSpec: tau must be positive");
  if (spec.n_pulses < 0) throw std::invalid_argument("CpmgGateSpec: negative pulse count");
}

namespace {

struct SequenceBlocks {
  BranchUnitary half;
  BranchUnitary full;
  BranchUnitary pulse_x;
  BranchUnitary pulse_y;
};

SequenceBlocks make_blocks(const SpinRegister& reg, double tau_ns) {
  return {free_evolution_branches(reg, tau_ns / 2.0), free_evolution_branches(reg, tau_ns),
          pi_pulse_branches(reg, PulseAxis::X), pi_pulse_branches(reg, PulseAxis::Y)};
}

const BranchUnitary& pulse_block(const SequenceBlocks& b, int k) {
  static constexpr bool kIsY[8] = {false, true, false, true, true, false, true, false};
  return kIsY[k % 8] ? b.pulse_y : b.pulse_x;
}

// Walks N = 0, 1, 2, ... and hands each complete sequence to `visit`.
template <class Visit>
void walk_sequences(const SequenceBlocks& b, int n_max, Visit&& visit) {
  BranchUnitary prefix = b.half;  // everything before the final tau/2
  visit(0, prefix.then(b.half));
  for (int k = 0; k < n_max; ++k) {
    if (k > 0) prefix = prefix.then(b.full);
    prefix = prefix.then(pulse_block(b, k));
    visit(k + 1, prefix.then(b.half));
  }
}

}  // namespace

BranchUnitary cpmg_branches(const CpmgGateSpec& spec, const SpinRegister& reg) {
  validate(spec);
  const auto blocks = make_blocks(reg, spec.tau_ns);
  BranchUnitary out;
  walk_sequences(blocks, spec.n_pulses, [&](int n, BranchUnitary u) {
    if (n == spec.n_pulses) out = std::move(u);
  });
  return out;
}

ComplexMatrix cpmg_unitary(const CpmgGateSpec& spec, const SpinRegister& reg) {
  return cpmg_branches(spec, reg).to_matrix();
}

ComplexMatrix cpmg_unitary_reference(const CpmgGateSpec& spec, const SpinRegister& reg) {
  validate(spec);
  const ComplexMatrix half = conditional_free_evolution(reg, spec.tau_ns / 2.0);
  const ComplexMatrix full = conditional_free_evolution(reg, spec.tau_ns);
  const ComplexMatrix px = microwave_pi_pulse(reg, PulseAxis::X);
  const ComplexMatrix py = microwave_pi_pulse(reg, PulseAxis::Y);
  ComplexMatrix u = half;
  const auto pattern = spec.phase_pattern();
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    if (k > 0) u = full * u;
    u = (pattern[k] == PulseAxis::X ? px : py) * u;
  }
  return half * u;
}

double electron_coherence(const BranchUnitary& u) {
  // Strip the bare pulse-train action (flip and phases); what remains is
  // |0><0| (x) V0 + |1><1| (x) V1 and P = 1/2 + Re prod_j tr(V0^dag V1)/2 / 2.
  cplx overlap = 1.0;
  for (std::size_t j = 0; j < u.v0.size(); ++j) overlap *= (u.v0[j].adjoint() * u.v1[j]).trace() / 2.0;
  return std::clamp(0.5 + 0.5 * overlap.real(), 0.0, 1.0);
}

namespace {

double coherence_at(const SpinRegister& reg, double tau, int n_pulses) {
  if (reg.num_nuclei() == 0) return 1.0;
  return electron_coherence(cpmg_branches({tau, n_pulses}, reg));
}

}  // namespace

std::vector<double> cpmg_signal_serial(const SpinRegister& reg, const std::vector<double>& tau_grid_ns,
                                       int n_pulses) {
  if (tau_grid_ns.empty()) throw std::invalid_argument("cpmg_signal: empty tau grid");
  std::vector<double> out(tau_grid_ns.size());
  for (std::size_t i = 0; i < tau_grid_ns.size(); ++i) out[i] = coherence_at(reg, tau_grid_ns[i], n_pulses);
  return out;
}

std::vector<double> cpmg_signal(const SpinRegister& reg, const std::vector<double>& tau_grid_ns, int n_pulses) {
  if (tau_grid_ns.empty()) throw std::invalid_argument("cpmg_signal: empty tau grid");
  std::vector<double> out(tau_grid_ns.size());
  const auto n = static_cast<std::ptrdiff_t>(tau_grid_ns.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = coherence_at(reg, tau_grid_ns[k], n_pulses);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::ConditionalXHalf: return "conditional_x_half";
    case GateKind::ZHalf: return "z_half";
    case GateKind::UnconditionalXHalf: return "unconditional_x_half";
    case GateKind::CnotEToN: return "cnot_e_to_n";
  }
  return "?";
}

GateKind gate_kind_from_string(const std::string& s) {
  for (auto k : {GateKind::ConditionalXHalf, GateKind::ZHalf, GateKind::UnconditionalXHalf, GateKind::CnotEToN}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown gate kind '" + s + "'");
}

std::array<Matrix2c, 2> ideal_branch_ops(GateKind kind, int sign) {
  const double q = kPi / 2.0;
  switch (kind) {
    case GateKind::ConditionalXHalf: return {rx(sign * q), rx(-sign * q)};
    case GateKind::ZHalf: return {rz(q), rz(q)};
    case GateKind::UnconditionalXHalf: return {rx(q), rx(q)};
    case GateKind::CnotEToN: return {Matrix2c::Identity(), pauli2(Pauli::X)};
  }
  throw std::invalid_argument("ideal_branch_ops: unknown kind");
}

ComplexMatrix ideal_gate(GateKind kind, int sign) {
  const auto ops = ideal_branch_ops(kind, sign);
  ComplexMatrix u = ComplexMatrix::Zero(4, 4);
  u.topLeftCorner(2, 2) = ops[0];
  u.bottomRightCorner(2, 2) = ops[1];
  return u;
}

double gate_fidelity(const ComplexMatrix& u_actual, const ComplexMatrix& u_ideal) {
  if (u_actual.rows() != u_ideal.rows() || u_actual.cols() != u_ideal.cols()) {
    throw std::invalid_argument("gate_fidelity: dimension mismatch");
  }
  if (!is_unitary(u_actual, 1e-8) || !is_unitary(u_ideal, 1e-8)) {
    throw std::invalid_argument("gate_fidelity: inputs must be unitary");
  }
  const double d = static_cast<double>(u_actual.rows());
  const double t = std::norm((u_ideal.adjoint() * u_actual).trace());
  return std::clamp((t / d + 1.0) / (d + 1.0), 0.0, 1.0);
}

BranchUnitary FrameCorrection::branches() const {
  auto b = BranchUnitary::identity(nuclei.size());
  b.phase[0] = std::exp(cplx(0.0, -electron / 2.0));
  b.phase[1] = std::exp(cplx(0.0, electron / 2.0));
  for (std::size_t j = 0; j < nuclei.size(); ++j) {
    b.v0[j] = rz(nuclei[j]);
    b.v1[j] = rz(nuclei[j]);
  }
  return b;
}

namespace {

// f(theta) = a e^{-i theta/2} + b e^{i theta/2}
struct PhaseFactor {
  cplx a, b;
  cplx at(double theta) const {
    return a * std::exp(cplx(0.0, -theta / 2.0)) + b * std::exp(cplx(0.0, theta / 2.0));
  }
};

double best_angle(cplx a, cplx b) {
  if (std::abs(a) == 0.0 || std::abs(b) == 0.0) return 0.0;
  return std::arg(a) - std::arg(b);
}

}  // namespace

FrameFit fit_frame(const BranchUnitary& u, std::size_t target, const std::array<Matrix2c, 2>& ideal,
                   bool fit_target) {
  const std::size_t n = u.v0.size();
  if (target >= n) throw std::invalid_argument("fit_frame: target out of range");
  const double d = std::ldexp(1.0, static_cast<int>(n) + 1);
  FrameFit result;
  result.frame.nuclei.assign(n, 0.0);
  if (u.flip) {
    result.fidelity = 1.0 / (d + 1.0);
    return result;
  }

  // factors[e][j]
  std::array<std::vector<PhaseFactor>, 2> factors;
  for (int e = 0; e < 2; ++e) {
    for (std::size_t j = 0; j < n; ++j) {
      const Matrix2c& v = u.branch(e)[j];
      const Matrix2c m = j == target ? Matrix2c(v * ideal[static_cast<std::size_t>(e)].adjoint()) : v;
      factors[static_cast<std::size_t>(e)].push_back({m(0, 0), m(1, 1)});
    }
  }

  auto total = [&](double alpha, const std::vector<double>& beta) {
    cplx t = 0.0;
    for (int e = 0; e < 2; ++e) {
      cplx term = u.phase[e] * std::exp(cplx(0.0, (e == 0 ? -1.0 : 1.0) * alpha / 2.0));
      for (std::size_t j = 0; j < n; ++j) term *= factors[static_cast<std::size_t>(e)][j].at(beta[j]);
      t += term;
    }
    return std::abs(t);
  };

  double best = -1.0;
  for (int start = 0; start < 8; ++start) {
    double alpha = start * kPi / 4.0;
    std::vector<double> beta(n, 0.0);
    double value = total(alpha, beta);
    for (int sweep = 0; sweep < 200; ++sweep) {
      // electron
      {
        cplx k[2];
        for (int e = 0; e < 2; ++e) {
          k[e] = u.phase[e];
          for (std::size_t j = 0; j < n; ++j) k[e] *= factors[static_cast<std::size_t>(e)][j].at(beta[j]);
        }
        alpha = best_angle(k[0], k[1]);
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (j == target && !fit_target) continue;
        cplx a = 0.0, b = 0.0;
        for (int e = 0; e < 2; ++e) {
          cplx k = u.phase[e] * std::exp(cplx(0.0, (e == 0 ? -1.0 : 1.0) * alpha / 2.0));
          for (std::size_t i = 0; i < n; ++i) {
            if (i != j) k *= factors[static_cast<std::size_t>(e)][i].at(beta[i]);
          }
          a += k * factors[static_cast<std::size_t>(e)][j].a;
          b += k * factors[static_cast<std::size_t>(e)][j].b;
        }
        beta[j] = best_angle(a, b);
      }
      const double next = total(alpha, beta);
      const bool done = next - value <= 1e-14 * std::max(1.0, value);
      value = std::max(value, next);
      if (done) break;
    }
    if (value > best + 1e-15) {
      best = value;
      result.frame.electron = std::remainder(alpha, 4.0 * kPi);
      for (std::size_t j = 0; j < n; ++j) result.frame.nuclei[j] = std::remainder(beta[j], 4.0 * kPi);
    }
  }
  result.fidelity = std::clamp((best * best / d + 1.0) / (d + 1.0), 0.0, 1.0);
  return result;
}

double spectator_fidelity(const Matrix2c& v0, const Matrix2c& v1) {
  const Matrix2c s = v0 + v1;
  const double t = std::abs(s(0, 0)) + std::abs(s(1, 1));
  return std::clamp((t * t / 4.0 + 1.0) / 5.0, 0.0, 1.0);
}

RealizedGate realized_gate(const CpmgGateSpec& spec, const SpinRegister& reg, const std::string& target_spin) {
  const auto& spin = reg.spin(target_spin);  // throws for unknown ids
  const SpinRegister alone(reg.b_z_gauss(), reg.gamma_khz_per_gauss(), {spin});
  return {cpmg_unitary(spec, reg), cpmg_unitary(spec, alone)};
}

// ---------------------------------------------------------------------------

std::vector<double> CompileSearch::tau_grid() const {
  std::vector<double> out;
  if (!(tau_step_ns > 0.0) || !(tau_min_ns > 0.0) || tau_max_ns < tau_min_ns) return out;
  const auto count = static_cast<long>(std::floor((tau_max_ns - tau_min_ns) / tau_step_ns + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) out.push_back(tau_min_ns + static_cast<double>(i) * tau_step_ns);
  return out;
}

std::vector<int> CompileSearch::n_grid() const {
  std::vector<int> out;
  if (n_step <= 0 || n_min < 0) return out;
  for (int n = n_min; n <= n_max; n += n_step) out.push_back(n);
  return out;
}

CompileSearch default_search(GateKind kind) {
  CompileSearch s;
  switch (kind) {
    case GateKind::ConditionalXHalf:
    case GateKind::CnotEToN:
      s.tau_min_ns = 4000.0;
      s.tau_max_ns = 6000.0;
      s.n_min = 4;
      s.n_max = 48;
      break;
    case GateKind::UnconditionalXHalf:
      s.tau_min_ns = 5000.0;
      s.tau_max_ns = 8000.0;
      s.n_min = 4;
      s.n_max = 64;
      break;
    case GateKind::ZHalf:
      s.tau_min_ns = 20.0;
      s.tau_max_ns = 400.0;
      s.n_min = 2;
      s.n_max = 16;
      break;
  }
  return s;
}

namespace {

GateKind scan_kind(GateKind kind) {
  return kind == GateKind::CnotEToN ? GateKind::ConditionalXHalf : kind;
}

struct PointScore {
  int sign;
  double fidelity;
};

PointScore score_pair(GateKind kind, const BranchUnitary& full, std::size_t target) {
  BranchUnitary pair;
  pair.flip = full.flip;
  pair.phase[0] = full.phase[0];
  pair.phase[1] = full.phase[1];
  pair.v0 = {full.v0[target]};
  pair.v1 = {full.v1[target]};
  const bool fit_target = kind != GateKind::ZHalf;
  const double plus = fit_frame(pair, 0, ideal_branch_ops(kind, +1), fit_target).fidelity;
  if (kind != GateKind::ConditionalXHalf) return {+1, plus};
  const double minus = fit_frame(pair, 0, ideal_branch_ops(kind, -1), fit_target).fidelity;
  return minus > plus ? PointScore{-1, minus} : PointScore{+1, plus};
}

double spectator_penalty(const BranchUnitary& full, std::size_t target) {
  double p = 0.0;
  for (std::size_t j = 0; j < full.v0.size(); ++j) {
    if (j != target) p += 1.0 - spectator_fidelity(full.v0[j], full.v1[j]);
  }
  return p;
}

void scan_tau(const GateTarget& target, const SpinRegister& reg, const CompileSearch& search, double tau,
              const std::vector<int>& ns, GridPoint* out) {
  const std::size_t t = reg.qubit_of(target.spin_id) - 1;
  const GateKind kind = scan_kind(target.kind);
  const auto blocks = make_blocks(reg, tau);
  std::size_t next = 0;
  walk_sequences(blocks, ns.back(), [&](int n, const BranchUnitary& u) {
    if (next >= ns.size() || n != ns[next]) return;
    const auto s = score_pair(kind, u, t);
    out[next] = {tau, n, s.sign, s.fidelity, s.fidelity - search.spectator_weight * spectator_penalty(u, t)};
    ++next;
  });
}

void check_search(const CompileSearch& search) {
  if (search.tau_grid().empty()) throw std::invalid_argument("compile: empty tau range");
  if (search.n_grid().empty()) throw std::invalid_argument("compile: empty N range");
}

}  // namespace

std::vector<GridPoint> scan_gate_grid_serial(const GateTarget& target, const SpinRegister& reg,
                                             const CompileSearch& search) {
  check_search(search);
  reg.qubit_of(target.spin_id);
  const auto taus = search.tau_grid();
  const auto ns = search.n_grid();
  std::vector<GridPoint> out(taus.size() * ns.size());
  for (std::size_t i = 0; i < taus.size(); ++i) scan_tau(target, reg, search, taus[i], ns, &out[i * ns.size()]);
  return out;
}

std::vector<GridPoint> scan_gate_grid(const GateTarget& target, const SpinRegister& reg,
                                      const CompileSearch& search) {
  check_search(search);
  reg.qubit_of(target.spin_id);
  const auto taus = search.tau_grid();
  const auto ns = search.n_grid();
  std::vector<GridPoint> out(taus.size() * ns.size());
  const auto count = static_cast<std::ptrdiff_t>(taus.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    scan_tau(target, reg, search, taus[k], ns, &out[k * ns.size()]);
  }
  return out;
}

GridPoint select_best(const std::vector<GridPoint>& points) {
  if (points.empty()) throw std::invalid_argument("select_best: no grid points");
  auto better = [](const GridPoint& a, const GridPoint& b) {
    if (a.objective != b.objective) return a.objective > b.objective;
    if (a.n_pulses != b.n_pulses) return a.n_pulses < b.n_pulses;
    return a.tau_ns < b.tau_ns;
  };
  return *std::min_element(points.begin(), points.end(),
                           [&](const GridPoint& a, const GridPoint& b) { return better(a, b); });
}

std::vector<ReferenceGate> reference_gates() {
  return {
      {"2", GateKind::ConditionalXHalf, 4915.0, 16}, {"2", GateKind::ZHalf, 37.0, 4},
      {"2", GateKind::UnconditionalXHalf, 6260.0, 10}, {"4", GateKind::ConditionalXHalf, 4411.0, 16},
      {"4", GateKind::ZHalf, 36.0, 4},          {"4", GateKind::UnconditionalXHalf, 5886.0, 22},
  };
}

std::optional<ReferenceGate> reference_gate(const std::string& spin_id, GateKind kind) {
  for (const auto& e : reference_gates()) {
    if (e.spin_id == spin_id && e.kind == scan_kind(kind)) return e;
  }
  return std::nullopt;
}

ResonanceReport resonance_report(const GateTarget& target, const SpinRegister& reg, const CpmgGateSpec& spec) {
  const auto& spin = reg.spin(target.spin_id);
  const double f_mean = 0.5 * (reg.larmor_khz() + precession_frequencies(spin, reg).f_minus_khz);
  // number of mean nuclear half-periods in one inter-pulse spacing
  auto order_of = [&](double tau) { return static_cast<int>(std::lround(tau * 2.0 * f_mean * 1e-6)); };
  ResonanceReport r;
  r.order = order_of(spec.tau_ns);
  r.tau_resonant_ns = r.order / (2.0 * f_mean * 1e-6);
  if (auto ref = reference_gate(target.spin_id, target.kind)) {
    r.reference_tau_ns = ref->tau_ns;
    r.reference_n = ref->n_pulses;
    r.reference_order = order_of(ref->tau_ns);
    r.agrees = *r.reference_order == r.order && std::abs(spec.tau_ns - ref->tau_ns) <= 0.02 * ref->tau_ns;
  }
  return r;
}

BranchUnitary CompiledGate::branches(const SpinRegister& reg) const {
  return cpmg_branches(spec, reg).then(frame.branches());
}

const CompiledGate* GateLibrary::find(const std::string& spin_id, GateKind kind) const {
  for (const auto& g : gates) {
    if (g.target.spin_id == spin_id && g.target.kind == kind) return &g;
  }
  return nullptr;
}

CompiledGate evaluate_gate(const GateTarget& target, const SpinRegister& reg, const CpmgGateSpec& spec,
                           double spectator_weight) {
  validate(spec);
  const std::size_t t = reg.qubit_of(target.spin_id) - 1;
  const GateKind kind = scan_kind(target.kind);
  const auto full = cpmg_branches(spec, reg);
  const auto score = score_pair(kind, full, t);

  CompiledGate g;
  g.target = target;
  g.spec = spec;
  g.sign = score.sign;
  g.fidelity = score.fidelity;
  for (std::size_t j = 0; j < reg.num_nuclei(); ++j) {
    if (j != t) g.spectator_fidelities.emplace_back(reg.spins()[j].id, spectator_fidelity(full.v0[j], full.v1[j]));
  }
  g.objective = score.fidelity - spectator_weight * spectator_penalty(full, t);
  const auto fit = fit_frame(full, t, ideal_branch_ops(kind, score.sign), kind != GateKind::ZHalf);
  g.frame = fit.frame;
  g.register_fidelity = fit.fidelity;
  g.resonance = resonance_report(target, reg, spec);

  if (target.kind == GateKind::CnotEToN) {
    const auto cnot = cnot_from_conditional(spec, score.sign, reg, target.spin_id);
    g.fidelity = cnot.fidelity;
  }
  return g;
}

CompiledGate compile_gate(const GateTarget& target, const SpinRegister& reg, const CompileSearch& search) {
  const auto best = select_best(scan_gate_grid(target, reg, search));
  auto g = evaluate_gate(target, reg, {best.tau_ns, best.n_pulses}, search.spectator_weight);
  if (g.fidelity < search.fidelity_floor) {
    throw CompileError("compile: best fidelity " + std::to_string(g.fidelity) + " for " +
                           to_string(target.kind) + " on spin " + target.spin_id + " is below the floor " +
                           std::to_string(search.fidelity_floor),
                       g);
  }
  return g;
}

CnotResult cnot_from_conditional(const ComplexMatrix& conditional_pair, int sign) {
  if (conditional_pair.rows() != 4 || conditional_pair.cols() != 4) {
    throw std::invalid_argument("cnot_from_conditional: expected a two-qubit gate");
  }
  if (sign != 1 && sign != -1) throw std::invalid_argument("cnot_from_conditional: sign must be +-1");
  const ComplexMatrix local = kron(ComplexMatrix(rz(-sign * kPi / 2.0)), ComplexMatrix(rx(-sign * kPi / 2.0)));
  CnotResult r;
  r.pair = local * conditional_pair;
  r.fidelity = gate_fidelity(r.pair, ideal_gate(GateKind::CnotEToN));
  r.below_threshold = r.fidelity < kCnotFidelityThreshold;
  return r;
}

CnotResult cnot_from_conditional(const CpmgGateSpec& spec, int sign, const SpinRegister& reg,
                                 const std::string& spin) {
  const SpinRegister alone(reg.b_z_gauss(), reg.gamma_khz_per_gauss(), {reg.spin(spin)});
  const auto u = cpmg_branches(spec, alone);
  const auto fit = fit_frame(u, 0, ideal_branch_ops(GateKind::ConditionalXHalf, sign));
  return cnot_from_conditional(u.then(fit.frame.branches()).to_matrix(), sign);
}

}  // namespace nvdiss
