#include "nvdiss/spin_model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace nvdiss {

SpinRegister::SpinRegister(double b_z_gauss, double gamma_khz_per_gauss,
                           std::vector<NuclearSpin> spins)
    : b_z_(b_z_gauss), gamma_(gamma_khz_per_gauss), spins_(std::move(spins)) {
  if (!(b_z_ > 0.0)) throw std::invalid_argument("SpinRegister: b_z must be positive");
  if (!(gamma_ > 0.0)) throw std::invalid_argument("SpinRegister: gamma_n must be positive");
  std::set<std::string> ids;
  for (const auto& s : spins_) {
    if (!ids.insert(s.id).second) throw std::invalid_argument("SpinRegister: duplicate spin id " + s.id);
    if (s.params.a_zx_khz < 0.0) {
      throw std::invalid_argument("SpinRegister: a_zx must be non-negative (spin " + s.id + ")");
    }
  }
  if (spins_.size() > 4) throw std::invalid_argument("SpinRegister: at most 4 nuclei supported");
}

std::size_t SpinRegister::qubit_of(const std::string& id) const {
  for (std::size_t k = 0; k < spins_.size(); ++k) {
    if (spins_[k].id == id) return k + 1;
  }
  throw std::invalid_argument("unknown spin id '" + id + "'");
}

const NuclearSpin& SpinRegister::spin(const std::string& id) const {
  return spins_[qubit_of(id) - 1];
}

SpinRegister SpinRegister::subregister(const std::vector<std::string>& ids) const {
  std::vector<NuclearSpin> sub;
  for (const auto& id : ids) sub.push_back(spin(id));
  return SpinRegister(b_z_, gamma_, std::move(sub));
}

std::vector<NuclearSpin> survey_spins() {
  return {
      {"1", {-1296.9, 180.0}},
      {"2", {50.16, 101.6}},
      {"3", {30.62, 43.0}},
      {"4", {-41.20, 52.3}},
  };
}

Matrix2c effective_hamiltonian(int ms, const NuclearSpin& spin, const SpinRegister& reg) {
  if (ms < -1 || ms > 1) throw std::invalid_argument("effective_hamiltonian: ms must be 0, -1 or +1");
  const double wl = reg.larmor_khz();
  double fz = wl;
  double fx = 0.0;
  if (ms != 0) {
    fz = wl + ms * spin.params.a_zz_khz;
    fx = spin.params.a_zx_khz;
  }
  // I = sigma / 2
  const Matrix2c h = (fz * pauli2(Pauli::Z) + fx * pauli2(Pauli::X)) * 0.5;
  return 2.0 * kPi * h;
}

PrecessionFrequencies precession_frequencies(const NuclearSpin& spin, const SpinRegister& reg) {
  const double wl = reg.larmor_khz();
  const double azz = spin.params.a_zz_khz;
  const double azx = spin.params.a_zx_khz;
  return {std::hypot(azx, azz + wl), std::hypot(azx, azz - wl)};
}

Matrix2c evolve_2x2(const Matrix2c& h, double t_ns) {
  // h = hx X + hy Y + hz Z (+ trace part); exp(-i h t) = exp(-i (2h).sigma t / 2)
  const double hx = h(0, 1).real();
  const double hy = -h(0, 1).imag();
  const double hz = 0.5 * (h(0, 0).real() - h(1, 1).real());
  const double h0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
  const double s = 2.0 * t_ns * 1e-6;  // h is in 2*pi*kHz
  const cplx global = std::exp(cplx(0.0, -h0 * t_ns * 1e-6));
  return global * su2_rotation(hx * s, hy * s, hz * s);
}

BranchUnitary BranchUnitary::identity(std::size_t n_nuclei) {
  BranchUnitary b;
  b.v0.assign(n_nuclei, Matrix2c::Identity());
  b.v1.assign(n_nuclei, Matrix2c::Identity());
  return b;
}

BranchUnitary BranchUnitary::then(const BranchUnitary& next) const {
  if (next.v0.size() != v0.size()) throw std::invalid_argument("BranchUnitary: register mismatch");
  BranchUnitary out;
  out.flip = flip != next.flip;
  out.v0.resize(v0.size());
  out.v1.resize(v0.size());
  for (int e = 0; e < 2; ++e) {
    const int mid = flip ? 1 - e : e;
    out.phase[e] = next.phase[mid] * phase[e];
    auto& dst = e == 0 ? out.v0 : out.v1;
    const auto& a = branch(e);
    const auto& b = next.branch(mid);
    for (std::size_t j = 0; j < a.size(); ++j) dst[j] = b[j] * a[j];
  }
  return out;
}

ComplexMatrix BranchUnitary::to_matrix() const {
  const std::size_t n = v0.size();
  const auto nd = Eigen::Index{1} << n;
  ComplexMatrix u = ComplexMatrix::Zero(2 * nd, 2 * nd);
  for (int e = 0; e < 2; ++e) {
    ComplexMatrix block = ComplexMatrix::Identity(1, 1);
    for (const auto& v : branch(e)) block = kron(block, ComplexMatrix(v));
    const int out = flip ? 1 - e : e;
    u.block(out * nd, e * nd, nd, nd) = phase[e] * block;
  }
  return u;
}

BranchUnitary free_evolution_branches(const SpinRegister& reg, double t_ns) {
  if (t_ns < 0.0) throw std::invalid_argument("free evolution: negative time");
  BranchUnitary b;
  for (const auto& s : reg.spins()) {
    b.v0.push_back(evolve_2x2(effective_hamiltonian(0, s, reg), t_ns));
    b.v1.push_back(evolve_2x2(effective_hamiltonian(-1, s, reg), t_ns));
  }
  return b;
}

BranchUnitary pi_pulse_branches(const SpinRegister& reg, PulseAxis axis) {
  auto b = BranchUnitary::identity(reg.num_nuclei());
  b.flip = true;
  if (axis == PulseAxis::Y) {
    // Y|0> = i|1>, Y|1> = -i|0>
    b.phase[0] = cplx(0.0, 1.0);
    b.phase[1] = cplx(0.0, -1.0);
  }
  return b;
}

ComplexMatrix conditional_free_evolution(const SpinRegister& reg, double t_ns) {
  if (t_ns < 0.0) throw std::invalid_argument("conditional_free_evolution: negative time");
  const auto nd = static_cast<Eigen::Index>(std::size_t{1} << reg.num_nuclei());
  ComplexMatrix u0 = ComplexMatrix::Identity(1, 1);
  ComplexMatrix u1 = ComplexMatrix::Identity(1, 1);
  for (const auto& s : reg.spins()) {
    u0 = kron(u0, ComplexMatrix((-cplx(0, 1) * effective_hamiltonian(0, s, reg) * (t_ns * 1e-6)).exp()));
    u1 = kron(u1, ComplexMatrix((-cplx(0, 1) * effective_hamiltonian(-1, s, reg) * (t_ns * 1e-6)).exp()));
  }
  ComplexMatrix u = ComplexMatrix::Zero(2 * nd, 2 * nd);
  u.topLeftCorner(nd, nd) = u0;
  u.bottomRightCorner(nd, nd) = u1;
  return u;
}

ComplexMatrix microwave_pi_pulse(const SpinRegister& reg, PulseAxis axis) {
  const auto nd = static_cast<Eigen::Index>(std::size_t{1} << reg.num_nuclei());
  const ComplexMatrix p = pauli(axis == PulseAxis::X ? Pauli::X : Pauli::Y);
  return kron(p, ComplexMatrix::Identity(nd, nd));
}

}  // namespace nvdiss
