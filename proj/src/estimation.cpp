#include "nvdiss/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

namespace nvdiss {

std::vector<double> ramsey_signal(const NuclearSpin& spin, const SpinRegister& reg, int ms,
                                  const std::vector<double>& t_grid_ns, const DensityMatrix& rho_z) {
  if (rho_z.dim() != 2) throw std::invalid_argument("ramsey_signal: expected a single-nucleus state");
  const Matrix2c h = effective_hamiltonian(ms, spin, reg);
  const Matrix2c r = rx(-kPi / 2.0);
  const Matrix2c rho0 = r * rho_z.matrix() * r.adjoint();
  const Eigen::Vector2cd plus_y(1.0 / std::sqrt(2.0), cplx(0.0, 1.0 / std::sqrt(2.0)));
  std::vector<double> out;
  out.reserve(t_grid_ns.size());
  for (double t : t_grid_ns) {
    const Matrix2c u = evolve_2x2(h, t);
    const Matrix2c rho = u * rho0 * u.adjoint();
    out.push_back(plus_y.dot(rho * plus_y).real());
  }
  return out;
}

std::vector<double> ramsey_signal(const NuclearSpin& spin, const SpinRegister& reg, int ms,
                                  const std::vector<double>& t_grid_ns) {
  return ramsey_signal(spin, reg, ms, t_grid_ns, DensityMatrix::pure(basis_state(2, 0)));
}

namespace {

struct LinearFit {
  double a, b, c, rss;
};

// y ~ a cos(w t) + b sin(w t) + c, w in rad/ns
LinearFit fit_at(const std::vector<double>& t, const std::vector<double>& y, double w) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd m(n, 3);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = w * t[static_cast<std::size_t>(i)];
    m.row(i) << std::cos(x), std::sin(x), 1.0;
    v(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d p = m.colPivHouseholderQr().solve(v);
  return {p(0), p(1), p(2), (m * p - v).squaredNorm()};
}

double periodogram(const std::vector<double>& t, const std::vector<double>& y, double mean, double f_khz) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += (y[i] - mean) * std::exp(cplx(0.0, -2.0 * kPi * f_khz * 1e-6 * t[i]));
  return std::norm(s);
}

}  // namespace

RamseyFit fit_ramsey(const std::vector<double>& t_ns, const std::vector<double>& y) {
  const std::size_t n = t_ns.size();
  if (n < 8 || y.size() != n) throw std::invalid_argument("fit_ramsey: need >= 8 matching samples");
  const double dt = t_ns[1] - t_ns[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (!(dt > 0.0) || std::abs(t_ns[i] - t_ns[i - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw std::invalid_argument("fit_ramsey: time grid must be uniform and increasing");
    }
  }
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  const double span_ns = dt * static_cast<double>(n);
  RamseyFit fit;
  fit.bin_width_khz = 1e6 / span_ns;
  const std::size_t bins = n / 2;

  double best = -1.0;
  for (std::size_t k = 1; k <= bins; ++k) {
    const double p = periodogram(t_ns, y, mean, k * fit.bin_width_khz);
    if (p > best) {
      best = p;
      fit.fft_frequency_khz = k * fit.bin_width_khz;
    }
  }
  // refine on an 8x finer grid, then golden section on the residual
  double f0 = fit.fft_frequency_khz;
  best = -1.0;
  for (int k = -8; k <= 8; ++k) {
    const double f = fit.fft_frequency_khz + k * fit.bin_width_khz / 8.0;
    if (f <= 0.0) continue;
    const double p = periodogram(t_ns, y, mean, f);
    if (p > best) {
      best = p;
      f0 = f;
    }
  }
  const double to_w = 2.0 * kPi * 1e-6;
  double lo = std::max(1e-9, f0 - fit.bin_width_khz / 8.0), hi = f0 + fit.bin_width_khz / 8.0;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double r1 = fit_at(t_ns, y, to_w * x1).rss, r2 = fit_at(t_ns, y, to_w * x2).rss;
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    if (r1 < r2) {
      hi = x2;
      x2 = x1;
      r2 = r1;
      x1 = hi - g * (hi - lo);
      r1 = fit_at(t_ns, y, to_w * x1).rss;
    } else {
      lo = x1;
      x1 = x2;
      r1 = r2;
      x2 = lo + g * (hi - lo);
      r2 = fit_at(t_ns, y, to_w * x2).rss;
    }
  }
  const double f = 0.5 * (lo + hi);
  const auto lf = fit_at(t_ns, y, to_w * f);
  fit.fit_ok = std::isfinite(lf.rss) && std::isfinite(lf.a) && std::isfinite(lf.b);
  if (!fit.fit_ok) {
    fit.frequency_khz = fit.fft_frequency_khz;
    fit.offset = mean;
    return fit;
  }
  fit.frequency_khz = f;
  fit.amplitude = std::hypot(lf.a, lf.b);
  fit.phase = std::atan2(-lf.b, lf.a);
  fit.offset = lf.c;
  return fit;
}

double visibility(double p_max, double p_min) {
  if (!(p_max >= p_min && p_min >= 0.0 && p_max > 0.0)) {
    throw std::invalid_argument("visibility: need p_max >= p_min >= 0 and p_max > 0");
  }
  return (p_max - p_min) / (p_max + p_min);
}

double polarization_fidelity(double v) { return 0.5 * (v + 1.0); }

HyperfineParams hyperfine_from_frequencies(double f_plus_khz, double f_minus_khz, double larmor_khz) {
  if (!(f_plus_khz >= 0.0 && f_minus_khz >= 0.0 && larmor_khz > 0.0) || !std::isfinite(f_plus_khz) ||
      !std::isfinite(f_minus_khz) || !std::isfinite(larmor_khz)) {
    throw std::invalid_argument("hyperfine_from_frequencies: frequencies must be finite, f_L > 0");
  }
  const double fp2 = f_plus_khz * f_plus_khz;
  const double fm2 = f_minus_khz * f_minus_khz;
  const double a_zz = (fp2 - fm2) / (4.0 * larmor_khz);
  const double s = a_zz + larmor_khz;
  const double zx2 = fp2 - s * s;
  // rounding allowance relative to the squared frequencies
  const double tol = 1e-12 * std::max({fp2, fm2, larmor_khz * larmor_khz});
  if (zx2 < -tol) {
    throw HyperfineInversionError("hyperfine_from_frequencies: inconsistent pair, A_zx^2 = " + std::to_string(zx2), zx2);
  }
  return {a_zz, std::sqrt(std::max(0.0, zx2))};
}

PhaseOracle ideal_phase_oracle(double f_khz) {
  return [f_khz](double t_ns) {
    const double phi = 2.0 * kPi * f_khz * t_ns * 1e-6;
    return std::make_pair(std::cos(phi), std::sin(phi));
  };
}

PhaseOracle ramsey_phase_oracle(const NuclearSpin& spin, const SpinRegister& reg, int ms) {
  const Matrix2c h = effective_hamiltonian(ms, spin, reg);
  const double lam = std::sqrt(std::max(0.0, -h.determinant().real()));
  if (!(lam > 0.0)) throw std::invalid_argument("ramsey_phase_oracle: no precession for this level");
  const Matrix2c axis = h / lam;
  return [h, axis](double t_ns) {
    // U = cos(theta/2) - i sin(theta/2) n.sigma
    const Matrix2c u = evolve_2x2(h, t_ns);
    const double c = 0.5 * u.trace().real();
    const double s = (cplx(0.0, 0.5) * (axis * u).trace()).real();
    return std::make_pair(c * c - s * s, 2.0 * s * c);
  };
}

FrequencyEstimate adaptive_estimate(const PhaseOracle& oracle, double lo_khz, double hi_khz, int iterations) {
  if (!(hi_khz > lo_khz) || iterations < 0) throw std::invalid_argument("adaptive_estimate: need lo < hi, iterations >= 0");
  FrequencyEstimate est;
  est.center_khz = 0.5 * (lo_khz + hi_khz);
  est.half_width_khz = 0.5 * (hi_khz - lo_khz);
  est.half_widths_khz.push_back(est.half_width_khz);
  for (int it = 0; it < iterations; ++it) {
    const double t_ns = 1e6 / (4.0 * est.half_width_khz);
    const auto [c, s] = oracle(t_ns);
    const double ref = 2.0 * kPi * est.center_khz * t_ns * 1e-6;
    // phase relative to the center, rotated back
    const double cr = c * std::cos(ref) + s * std::sin(ref);
    const double sr = s * std::cos(ref) - c * std::sin(ref);
    if (cr < -1e-9) {
      est.restart = true;
      break;
    }
    est.center_khz += (sr >= 0.0 ? 0.5 : -0.5) * est.half_width_khz;
    est.half_width_khz *= 0.5;
    est.half_widths_khz.push_back(est.half_width_khz);
    ++est.iterations;
  }
  return est;
}

Circuit polarization_circuit(std::size_t nucleus) {
  if (nucleus == 0) throw std::invalid_argument("polarization_circuit: target must be a nucleus");
  Circuit c;
  c.h(0).h(nucleus).cnot(0, nucleus).h(0).h(nucleus);
  c.cnot(0, nucleus).pump();
  return c;
}

double polarize_and_measure(const GateSet& gates, const NoiseModel& noise, DensityMatrix* nucleus_out) {
  const std::size_t n = gates.num_qubits();
  ComplexMatrix e = ComplexMatrix::Zero(2, 2);
  e(0, 0) = 1.0;
  const auto rest = Eigen::Index{1} << (n - 1);
  const DensityMatrix start(kron(e, ComplexMatrix::Identity(rest, rest) / static_cast<double>(rest)));
  const auto out = run_circuit(start, polarization_circuit(1), gates, noise);
  std::vector<std::size_t> dims(n, 2);
  const std::size_t keep[] = {gates.physical(1)};
  const auto rho = partial_trace(out, keep, dims);
  if (nucleus_out) *nucleus_out = rho;
  return expectation(rho, pauli(Pauli::Z));
}

namespace {

FrequencyEstimate refine(const PhaseOracle& oracle, double guess, const SpinEstimateOptions& opt) {
  double w = opt.init_half_width_khz;
  FrequencyEstimate est;
  for (int attempt = 0; attempt < 4; ++attempt) {
    est = adaptive_estimate(oracle, std::max(0.0, guess - w), guess + w, opt.iterations);
    if (!est.restart) break;
    w *= 2.0;
  }
  return est;
}

}  // namespace

SpinEstimate estimate_spin(const NuclearSpin& spin, const SpinRegister& reg, const SpinEstimateOptions& opt) {
  if (opt.samples < 8 || !(opt.dt_ns > 0.0) || opt.iterations < 0 || !(opt.init_half_width_khz > 0.0)) {
    throw std::invalid_argument("estimate_spin: invalid options");
  }
  std::vector<double> t(static_cast<std::size_t>(opt.samples));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) * opt.dt_ns;

  SpinEstimate r;
  r.id = spin.id;
  r.larmor_fit = fit_ramsey(t, ramsey_signal(spin, reg, 0, t));
  const double coarse_plus = fit_ramsey(t, ramsey_signal(spin, reg, +1, t)).frequency_khz;
  const double coarse_minus = fit_ramsey(t, ramsey_signal(spin, reg, -1, t)).frequency_khz;
  r.f_plus = refine(ramsey_phase_oracle(spin, reg, +1), coarse_plus, opt);
  r.f_minus = refine(ramsey_phase_oracle(spin, reg, -1), coarse_minus, opt);

  const double fl = reg.larmor_khz();
  r.estimate = hyperfine_from_frequencies(r.f_plus.center_khz, r.f_minus.center_khz, fl);
  // finite-difference propagation of the final half widths; both frequencies
  // are interval bounds, so the shifts add linearly
  auto shifted = [&](double dp, double dm) {
    return hyperfine_from_frequencies(r.f_plus.center_khz + dp, r.f_minus.center_khz + dm, fl);
  };
  const double hp = std::max(r.f_plus.half_width_khz, 1e-9), hm = std::max(r.f_minus.half_width_khz, 1e-9);
  try {
    const auto p = shifted(hp, 0.0), m = shifted(0.0, hm);
    r.a_zz_uncertainty_khz = std::abs(p.a_zz_khz - r.estimate.a_zz_khz) + std::abs(m.a_zz_khz - r.estimate.a_zz_khz);
    r.a_zx_uncertainty_khz = std::abs(p.a_zx_khz - r.estimate.a_zx_khz) + std::abs(m.a_zx_khz - r.estimate.a_zx_khz);
  } catch (const HyperfineInversionError&) {
    r.a_zx_uncertainty_khz = std::sqrt(hp * (r.f_plus.center_khz + hp));
  }
  r.a_zz_residual_khz = r.estimate.a_zz_khz - spin.params.a_zz_khz;
  r.a_zx_residual_khz = r.estimate.a_zx_khz - spin.params.a_zx_khz;
  return r;
}

std::vector<SpinEstimate> estimate_register(const SpinRegister& reg, const SpinEstimateOptions& opt) {
  std::vector<SpinEstimate> out(reg.num_nuclei());
  std::vector<std::exception_ptr> errors(reg.num_nuclei());
  const auto n = static_cast<std::ptrdiff_t>(reg.num_nuclei());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = estimate_spin(reg.spins()[k], reg, opt);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace nvdiss
