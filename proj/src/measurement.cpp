#include "nvdiss/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace nvdiss {

ReadoutModel ReadoutModel::symmetric(double avg_fidelity, int shots) {
  ReadoutModel m;
  m.fidelity0 = m.fidelity1 = avg_fidelity;
  m.rabi_pmax = avg_fidelity;
  m.rabi_pmin = 1.0 - avg_fidelity;
  m.shots = shots;
  validate(m);
  return m;
}

void validate(const ReadoutModel& m) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(m.fidelity0) || !prob(m.fidelity1)) throw std::invalid_argument("readout fidelity must lie in [0, 1]");
  if (!prob(m.rabi_pmax) || !prob(m.rabi_pmin) || !(m.rabi_pmin < m.rabi_pmax)) {
    throw std::invalid_argument("Rabi extremes need 0 <= pmin < pmax <= 1");
  }
  if (m.shots < 1) throw std::invalid_argument("shots must be >= 1");
}

std::string basis_label(const PauliPair& b) { return {pauli_symbol(b[0]), pauli_symbol(b[1])}; }

PauliPair basis_from_label(const std::string& s) {
  if (s.size() != 2) throw std::invalid_argument("basis label must have two Pauli symbols: '" + s + "'");
  return {pauli_from_symbol(s[0]), pauli_from_symbol(s[1])};
}

std::vector<PauliPair> tomography_settings() {
  std::vector<PauliPair> out;
  for (Pauli a : {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z})
    for (Pauli b : {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z})
      if (a != Pauli::I || b != Pauli::I) out.push_back({a, b});
  return out;
}

Circuit mapping_circuit(const PauliPair& basis) {
  Circuit c;
  c.h(0);
  for (std::size_t k = 0; k < 2; ++k) {
    const std::size_t q = k + 1;
    switch (basis[k]) {
      case Pauli::I: break;
      case Pauli::X: c.cnot(0, q); break;
      case Pauli::Y: c.sdg(q).cnot(0, q).s(q); break;
      case Pauli::Z: c.h(q).cnot(0, q).h(q); break;
    }
  }
  c.h(0);
  return c;
}

std::vector<TomographySetting> tomography_circuits() {
  std::vector<TomographySetting> out;
  for (const auto& b : tomography_settings()) out.push_back({b, mapping_circuit(b)});
  return out;
}

ReadoutSample simulate_readout(double p_ideal, const ReadoutModel& model, std::mt19937_64& rng) {
  validate(model);
  if (!(p_ideal >= -1e-12 && p_ideal <= 1.0 + 1e-12)) {
    throw std::invalid_argument("simulate_readout: probability outside [0, 1]");
  }
  const double p = std::clamp(p_ideal, 0.0, 1.0);
  const double q = std::clamp(p * model.fidelity0 + (1.0 - p) * (1.0 - model.fidelity1), 0.0, 1.0);
  std::binomial_distribution<int> shots(model.shots, q);
  const int k = shots(rng);
  return {static_cast<double>(k) / model.shots, k};
}

ReadoutSample simulate_readout(double p_ideal, const ReadoutModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return simulate_readout(p_ideal, model, rng);
}

double rabi_normalize(double p0_raw, const ReadoutModel& model) {
  if (!(model.rabi_pmax - model.rabi_pmin > 1e-12)) throw std::invalid_argument("rabi_normalize: degenerate contrast");
  return 2.0 * (p0_raw - model.rabi_pmin) / (model.rabi_pmax - model.rabi_pmin) - 1.0;
}

double error_bar(double p0, int shots, double f) {
  if (!(p0 >= 0.0 && p0 <= 1.0) || shots < 1 || !(f > 0.0)) {
    throw std::invalid_argument("error_bar: need p0 in [0, 1], shots >= 1, f > 0");
  }
  return 2.0 * f * std::sqrt(p0 * (1.0 - p0) / shots);
}

std::vector<TomographyRecord> exact_records(const DensityMatrix& rho_n) {
  if (rho_n.dim() != 4) throw std::invalid_argument("exact_records: expected a two-qubit state");
  std::vector<TomographyRecord> out;
  for (const auto& b : tomography_settings()) {
    const double e = expectation(rho_n, pauli_string({b[0], b[1]}));
    out.push_back({b, 0.5 * (1.0 + e), e, 0.0});
  }
  return out;
}

double mapped_expectation(const DensityMatrix& full, const PauliPair& basis, const GateSet& gates,
                          const NoiseModel& noise) {
  const auto out = run_circuit(full, mapping_circuit(basis), gates, noise);
  return expectation(out, embed(pauli(Pauli::Z), 0, gates.num_qubits()));
}

TomographyRecord measure_setting(const DensityMatrix& full, const PauliPair& basis, const GateSet& gates,
                                 const NoiseModel& noise, const ReadoutModel& model, std::uint64_t seed) {
  const double ze = mapped_expectation(full, basis, gates, noise);
  const auto s = simulate_readout(std::clamp(0.5 * (1.0 + ze), 0.0, 1.0), model, seed);
  return {basis, s.p0_raw, rabi_normalize(s.p0_raw, model), error_bar(s.p0_raw, model.shots, model.contrast_factor())};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffU); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master), hi(master), lo(stream), hi(stream), lo(index), hi(index)};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

std::vector<TomographyRecord> simulate_tomography_serial(const DensityMatrix& full, const GateSet& gates,
                                                         const NoiseModel& noise, const ReadoutModel& model,
                                                         std::uint64_t seed) {
  const auto settings = tomography_settings();
  std::vector<TomographyRecord> out;
  for (std::size_t k = 0; k < settings.size(); ++k) {
    out.push_back(measure_setting(full, settings[k], gates, noise, model, derive_seed(seed, 1, k)));
  }
  return out;
}

std::vector<TomographyRecord> simulate_tomography(const DensityMatrix& full, const GateSet& gates,
                                                  const NoiseModel& noise, const ReadoutModel& model,
                                                  std::uint64_t seed) {
  validate(model);
  const auto settings = tomography_settings();
  std::vector<TomographyRecord> out(settings.size());
  const auto n = static_cast<std::ptrdiff_t>(settings.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = measure_setting(full, settings[k], gates, noise, model, derive_seed(seed, 1, k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// MLE

ComplexMatrix linear_inversion(const std::vector<TomographyRecord>& records) {
  ComplexMatrix m = ComplexMatrix::Identity(4, 4);
  std::map<std::string, std::pair<double, int>> mean;
  for (const auto& r : records) {
    if (r.basis[0] == Pauli::I && r.basis[1] == Pauli::I) continue;
    auto& [sum, count] = mean[basis_label(r.basis)];
    sum += r.expectation;
    ++count;
  }
  for (const auto& [label, v] : mean) {
    const auto b = basis_from_label(label);
    m += (v.first / v.second) * pauli_string({b[0], b[1]});
  }
  return m / 4.0;
}

namespace {

// Euclidean projection onto {x >= 0, sum x = 1}
Eigen::VectorXd simplex_projection(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double acc = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    acc += u[j];
    const double t = (acc - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

ComplexMatrix spectraplex_projection(const ComplexMatrix& x) {
  const ComplexMatrix h = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const Eigen::VectorXd lam = simplex_projection(es.eigenvalues());
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

struct Misfit {
  std::vector<ComplexMatrix> ops;
  std::vector<double> target, weight;

  double value(const ComplexMatrix& rho) const {
    double f = 0.0;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const double r = target[k] - (rho * ops[k]).trace().real();
      f += weight[k] * r * r;
    }
    return f;
  }
  ComplexMatrix gradient(const ComplexMatrix& rho) const {
    ComplexMatrix g = ComplexMatrix::Zero(4, 4);
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const double r = target[k] - (rho * ops[k]).trace().real();
      g -= 2.0 * weight[k] * r * ops[k];
    }
    return g;
  }
};

}  // namespace

MleResult mle_reconstruct(const std::vector<TomographyRecord>& records, const MleOptions& options) {
  std::set<std::string> seen;
  Misfit f;
  for (const auto& r : records) {
    if (!std::isfinite(r.expectation) || !std::isfinite(r.sigma) || r.sigma < 0.0) {
      throw std::invalid_argument("mle_reconstruct: record with invalid expectation or sigma");
    }
    if (r.basis[0] == Pauli::I && r.basis[1] == Pauli::I) continue;  // fixed by the trace
    seen.insert(basis_label(r.basis));
    f.ops.push_back(pauli_string({r.basis[0], r.basis[1]}));
    f.target.push_back(r.expectation);
    const double s = std::max(r.sigma, options.sigma_floor);
    f.weight.push_back(1.0 / (s * s));
  }
  if (seen.size() < 15) throw std::invalid_argument("mle_reconstruct: need all 15 Pauli settings");
  const double wsum = std::accumulate(f.weight.begin(), f.weight.end(), 0.0);
  for (auto& w : f.weight) w /= wsum;
  // largest curvature: 2 * 4 * (total weight on one Pauli), the Paulis / 2 being orthonormal
  std::map<std::string, double> per_label;
  {
    std::size_t j = 0;
    for (const auto& r : records) {
      if (r.basis[0] == Pauli::I && r.basis[1] == Pauli::I) continue;
      per_label[basis_label(r.basis)] += f.weight[j++];
    }
  }
  double wmax = 0.0;
  for (const auto& [label, w] : per_label) wmax = std::max(wmax, w);
  const double step = 1.0 / (8.0 * wmax);

  ComplexMatrix x = spectraplex_projection(linear_inversion(records));
  ComplexMatrix y = x;
  double t = 1.0;
  double gnorm = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    // projected-gradient residual at x doubles as the stopping test
    const ComplexMatrix px = spectraplex_projection(x - step * f.gradient(x));
    gnorm = (x - px).norm() / step;
    if (gnorm < options.gradient_tol) {
      converged = true;
      break;
    }
    const ComplexMatrix next = spectraplex_projection(y - step * f.gradient(y));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (f.value(next) > f.value(x)) {
      // restart momentum
      y = px;
      x = px;
      t = 1.0;
      continue;
    }
    y = next + ((t - 1.0) / t_next) * (next - x);
    x = next;
    t = t_next;
  }
  return {DensityMatrix::from_numerical(x), converged, it, f.value(x), gnorm};
}

// ---------------------------------------------------------------------------
// readout calibration

namespace {

void check_confusion(const Eigen::MatrixXd& c) {
  if (!(c.rows() == c.cols() && (c.rows() == 2 || c.rows() == 4))) {
    throw std::invalid_argument("confusion matrix must be 2x2 or 4x4");
  }
  if (!c.allFinite() || (c.array() < 0.0).any() || (c.array() > 1.0).any()) {
    throw std::invalid_argument("confusion matrix entries must be probabilities");
  }
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    if (std::abs(c.col(j).sum() - 1.0) > 1e-9) throw std::invalid_argument("confusion matrix columns must sum to 1");
  }
}

// records transformed by the distribution map m (C or C^-1)
std::vector<TomographyRecord> transform(const std::vector<TomographyRecord>& records, const Eigen::MatrixXd& m) {
  std::vector<TomographyRecord> out = records;
  if (m.rows() == 2) {
    // e' = a e + b
    const Eigen::Vector2d sgn(1.0, -1.0);
    const double b = 0.5 * sgn.dot(m * Eigen::Vector2d(1.0, 1.0));
    const double a = 0.5 * sgn.dot(m * sgn);
    for (auto& r : out) {
      r.expectation = a * r.expectation + b;
      r.sigma = std::abs(a) * r.sigma;
    }
    return out;
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < records.size(); ++k) index.emplace(basis_label(records[k].basis), k);
  auto find = [&](Pauli a, Pauli b) {
    auto it = index.find(basis_label({a, b}));
    if (it == index.end()) throw std::invalid_argument("readout calibration needs all 15 settings");
    return it->second;
  };

  // outcome ab -> row 2a + b; S maps (m1, m2, c) to signs, K the linear response
  Eigen::Matrix<double, 4, 3> s;
  Eigen::Matrix<double, 3, 4> sgn;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double sa = a == 0 ? 1.0 : -1.0, sb = b == 0 ? 1.0 : -1.0;
      s.row(2 * a + b) << sa, sb, sa * sb;
      sgn.col(2 * a + b) << sa, sb, sa * sb;
    }
  const Eigen::Matrix<double, 3, 3> k = 0.25 * sgn * m * s;
  const Eigen::Vector3d k0 = 0.25 * sgn * m * Eigen::Vector4d::Ones();

  // linear forms over input records: value = const + sum coeff_i e_i
  struct Form {
    double c = 0.0;
    std::map<std::size_t, double> coeff;
  };
  std::map<std::size_t, Form> single_acc;
  std::map<std::size_t, int> single_n;
  const Pauli paulis[] = {Pauli::X, Pauli::Y, Pauli::Z};
  for (Pauli p1 : paulis)
    for (Pauli p2 : paulis) {
      const std::size_t src[3] = {find(p1, Pauli::I), find(Pauli::I, p2), find(p1, p2)};
      for (int row = 0; row < 3; ++row) {
        Form form{k0(row), {}};
        for (int j = 0; j < 3; ++j) form.coeff[src[j]] += k(row, j);
        if (row == 2) {
          double v = form.c, var = 0.0;
          for (auto [i, c] : form.coeff) {
            v += c * records[i].expectation;
            var += c * c * records[i].sigma * records[i].sigma;
          }
          out[src[2]].expectation = v;
          out[src[2]].sigma = std::sqrt(var);
          continue;
        }
        // single-body outcomes are averaged over the three settings that contain them
        auto& acc = single_acc[src[row]];
        acc.c += form.c;
        for (auto [i, c] : form.coeff) acc.coeff[i] += c;
        ++single_n[src[row]];
      }
    }
  for (auto& [target, acc] : single_acc) {
    const double n = single_n[target];
    double v = acc.c / n, var = 0.0;
    for (auto [i, c] : acc.coeff) {
      v += c / n * records[i].expectation;
      var += (c / n) * (c / n) * records[i].sigma * records[i].sigma;
    }
    out[target].expectation = v;
    out[target].sigma = std::sqrt(var);
  }
  return out;
}

}  // namespace

std::vector<TomographyRecord> readout_calibrate(const std::vector<TomographyRecord>& records,
                                                const Eigen::MatrixXd& confusion) {
  check_confusion(confusion);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(confusion);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-12) {
    throw std::invalid_argument("readout_calibrate: confusion matrix is singular");
  }
  return transform(records, lu.inverse());
}

std::vector<TomographyRecord> apply_confusion(const std::vector<TomographyRecord>& records,
                                              const Eigen::MatrixXd& confusion) {
  check_confusion(confusion);
  return transform(records, confusion);
}

DensityMatrix experimental_ghz_state() {
  Eigen::Matrix4d re, im;
  re << 0.3706, -0.0033, -0.0263, 0.2260,
        -0.0033, 0.1502, 0.0096, 0.0177,
        -0.0263, 0.0096, 0.1446, 0.0462,
        0.2260, 0.0177, 0.0462, 0.3346;
  im << 0.0000, 0.0109, 0.0214, -0.0273,
        -0.0109, 0.0000, -0.0136, -0.0095,
        -0.0214, 0.0136, 0.0000, 0.0047,
        0.0273, 0.0095, -0.0047, 0.0000;
  ComplexMatrix m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = cplx(re(i, j), im(i, j));
  return DensityMatrix(m);
}

FidelityReport fidelity_report(const std::vector<TomographyRecord>& records, const DensityMatrix& rho_mle) {
  FidelityReport r;
  r.fidelity = fidelity_with_pure(rho_mle, ghz2());
  Correlations c;
  double var = 0.0;
  int found = 0;
  for (const auto& rec : records) {
    const auto label = basis_label(rec.basis);
    double* slot = label == "XX" ? &c.xx : label == "YY" ? &c.yy : label == "ZZ" ? &c.zz : nullptr;
    if (!slot) continue;
    *slot = rec.expectation;
    var += rec.sigma * rec.sigma;
    ++found;
  }
  if (found != 3) throw std::invalid_argument("fidelity_report: need exactly one XX, YY and ZZ record");
  r.witness = witness_fidelity_estimate(c);
  r.sigma = 0.25 * std::sqrt(var);
  return r;
}

// ---------------------------------------------------------------------------
// phase scan

CosineFit fit_cosine_fixed(const std::vector<double>& t, const std::vector<double>& y, double omega) {
  if (t.size() != y.size() || t.size() < 3) throw std::invalid_argument("fit_cosine_fixed: need >= 3 matching points");
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = omega * t[static_cast<std::size_t>(i)];
    a.row(i) << std::cos(w), -std::sin(w), 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(b);
  return {std::hypot(x(0), x(1)), std::atan2(x(1), x(0)), x(2)};
}

namespace {

const PauliPair kScanBases[] = {{Pauli::X, Pauli::X}, {Pauli::Y, Pauli::Y}, {Pauli::X, Pauli::Y}, {Pauli::Y, Pauli::X}};

// mapped <P1 P2> after free precession, one value per time and basis
std::vector<PhaseScanCurve> scan_curves(const SpinRegister& reg, const GateSet& gates,
                                        const std::vector<double>& t_grid, const std::vector<double>& comp) {
  const auto start = embed_nuclear_state(DensityMatrix::pure(ghz2()), gates);
  const NoiseModel noise;
  std::vector<PhaseScanCurve> out;
  for (std::size_t b = 0; b < 4; ++b) out.push_back({kScanBases[b], std::vector<double>(t_grid.size()), {}});
  const auto nt = static_cast<std::ptrdiff_t>(t_grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < nt; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto rho = evolve(start, conditional_free_evolution(reg, t_grid[k]));
    for (std::size_t b = 0; b < 4; ++b) {
      Circuit c;
      if (comp[b] != 0.0) c.rz(1, comp[b]);
      c.append(mapping_circuit(kScanBases[b]));
      const auto outp = run_circuit(rho, c, gates, noise);
      out[b].values[k] = expectation(outp, embed(pauli(Pauli::Z), 0, gates.num_qubits()));
    }
  }
  const double omega = 2.0 * 2.0 * kPi * reg.larmor_khz() * 1e-6;
  for (auto& c : out) c.fit = fit_cosine_fixed(t_grid, c.values, omega);
  return out;
}

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

PhaseScan simulate_tomography_phase_scan(const SpinRegister& reg, const std::vector<std::string>& logical_spins,
                                         const GateLibrary& library, bool spectators,
                                         const std::vector<double>& t_grid_ns) {
  if (logical_spins.size() != 2) throw std::invalid_argument("phase scan: need two logical spins");
  if (t_grid_ns.size() < 3) throw std::invalid_argument("phase scan: need at least 3 separation times");
  const SpinRegister bare = reg.subregister(logical_spins);
  const SpinRegister& used = spectators ? reg : bare;
  const std::vector<double> zero(4, 0.0);

  PhaseScan scan;
  scan.t_ns = t_grid_ns;
  scan.ideal = scan_curves(bare, IdealGateSet(3), t_grid_ns, zero);
  const auto gates = compiled_gate_set(used, logical_spins, library);
  scan.crosstalk = scan_curves(used, gates, t_grid_ns, zero);

  scan.compensation_rad = zero;
  if (spectators) {
    const auto reference = scan_curves(bare, compiled_gate_set(bare, logical_spins, library), t_grid_ns, zero);
    // an Rz(a) on n1 advances every curve's phase by a
    for (std::size_t b = 0; b < 4; ++b) {
      scan.compensation_rad[b] = wrap(reference[b].fit.phase - scan.crosstalk[b].fit.phase);
    }
  }
  scan.compensated = scan_curves(used, gates, t_grid_ns, scan.compensation_rad);
  for (std::size_t b = 0; b < 4; ++b) {
    const double d = std::abs(wrap(scan.compensated[b].fit.phase - scan.ideal[b].fit.phase));
    scan.max_offset_deg = std::max(scan.max_offset_deg, d * 180.0 / kPi);
  }
  return scan;
}

}  // namespace nvdiss
