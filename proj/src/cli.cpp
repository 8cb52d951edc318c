#include "nvdiss/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "nvdiss/estimation.hpp"
#include "nvdiss/measurement.hpp"
#include "nvdiss/protocol.hpp"

namespace nvdiss::cli {

namespace fs = std::filesystem;

RunConfig resolve_config(const Options& opt) {
  RunConfig cfg = opt.config_path ? load_config(*opt.config_path) : default_config();
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.out_dir) cfg.output_dir = *opt.out_dir;
  if (opt.rounds) {
    if (*opt.rounds < 1) throw ConfigError("--rounds must be >= 1");
    cfg.protocol.rounds = *opt.rounds;
  }
  if (opt.mode) {
    if (*opt.mode == "ideal") {
      cfg.noise = NoiseModel::ideal();
      cfg.readout_fidelity = 1.0;
    } else if (*opt.mode == "realistic") {
      cfg.noise.gate_mode = GateMode::Compiled;
      cfg.noise.spectators_enabled = true;
    } else {
      throw ConfigError("--mode must be ideal or realistic");
    }
  }
  return cfg;
}

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

void write_json(const RunConfig& cfg, const std::string& name, const Json& j) {
  write_text_file(out_path(cfg, name), j.dump(2) + "\n");
}

GateLibrary compile_library(const RunConfig& cfg, const SpinRegister& reg, std::ostream& log) {
  GateLibrary lib;
  lib.b_z_gauss = reg.b_z_gauss();
  for (const auto& id : cfg.targets) {
    for (GateKind kind : {GateKind::ConditionalXHalf, GateKind::ZHalf, GateKind::UnconditionalXHalf}) {
      auto g = compile_gate({kind, id}, reg, cfg.search(kind));
      log << "spin " << id << " " << to_string(kind) << ": tau " << g.spec.tau_ns << " ns, N " << g.spec.n_pulses
          << ", F " << g.fidelity << "\n";
      lib.gates.push_back(std::move(g));
    }
  }
  return lib;
}

std::unique_ptr<GateSet> make_gates(const RunConfig& cfg, std::ostream& log) {
  if (cfg.noise.gate_mode == GateMode::Ideal) return std::make_unique<IdealGateSet>(3);
  const auto reg = cfg.simulation_register();
  const GateLibrary lib = cfg.gate_library ? load_gate_library(*cfg.gate_library) : compile_library(cfg, reg, log);
  return std::make_unique<NativeGateSet>(compiled_gate_set(reg, cfg.targets, lib));
}

DensityMatrix initial_nuclear_state(const std::string& name) {
  if (name == "ghz") return DensityMatrix::pure(ghz2());
  if (name == "01") return DensityMatrix::pure(basis_state(4, 1));
  if (name == "experimental") return experimental_ghz_state();
  return DensityMatrix::maximally_mixed(4);
}

Eigen::MatrixXd confusion_or_identity(const RunConfig& cfg) {
  return cfg.confusion ? *cfg.confusion : Eigen::MatrixXd::Identity(2, 2);
}

Json mle_json(const MleResult& m) {
  return {{"converged", m.converged}, {"iterations", m.iterations}, {"residual", m.residual},
          {"gradient_norm", m.gradient_norm}};
}

}  // namespace

int cpmg_scan(const RunConfig& cfg, std::ostream& log) {
  const auto reg = cfg.full_register();
  CompileSearch grid;
  grid.tau_min_ns = cfg.cpmg_scan.tau_min_ns;
  grid.tau_max_ns = cfg.cpmg_scan.tau_max_ns;
  grid.tau_step_ns = cfg.cpmg_scan.tau_step_ns;
  const auto taus = grid.tau_grid();
  const int n = cfg.cpmg_scan.n_pulses;

  std::vector<std::vector<double>> columns;
  for (const auto& s : reg.spins()) {
    columns.push_back(cpmg_signal(SpinRegister(reg.b_z_gauss(), reg.gamma_khz_per_gauss(), {s}), taus, n));
  }
  const auto total = cpmg_signal(reg, taus, n);

  std::ostringstream csv;
  csv << "tau_ns";
  for (const auto& s : reg.spins()) csv << ",spin_" << s.id;
  csv << ",total\n";
  for (std::size_t i = 0; i < taus.size(); ++i) {
    csv << format_double(taus[i]);
    for (const auto& c : columns) csv << ',' << format_double(c[i]);
    csv << ',' << format_double(total[i]) << "\n";
  }
  write_text_file(out_path(cfg, "cpmg_scan.csv"), csv.str());
  write_json(cfg, "cpmg_scan_summary.json",
             {{"command", "cpmg-scan"}, {"seed", cfg.seed}, {"n_pulses", n}, {"points", taus.size()},
              {"larmor_khz", reg.larmor_khz()}, {"config", to_json(cfg)}});
  log << "cpmg-scan: " << taus.size() << " points, " << reg.num_nuclei() << " spins -> " << cfg.output_dir << "\n";
  return kExitOk;
}

int compile(const RunConfig& cfg, std::ostream& log) {
  const auto reg = cfg.simulation_register();
  try {
    const auto lib = compile_library(cfg, reg, log);
    write_json(cfg, "gate_library.json", to_json(lib));
    Json summary = {{"command", "compile"}, {"seed", cfg.seed}, {"gates", lib.gates.size()}};
    for (const auto& g : lib.gates) {
      if (g.resonance.reference_tau_ns) {
        log << "spin " << g.target.spin_id << " " << to_string(g.target.kind) << ": resonance order "
            << g.resonance.order << " vs reference order " << *g.resonance.reference_order << " (tau "
            << *g.resonance.reference_tau_ns << " ns): " << (g.resonance.agrees ? "agrees" : "disagrees") << "\n";
      }
    }
    write_json(cfg, "compile_summary.json", summary);
  } catch (const CompileError& e) {
    write_json(cfg, "compile_report.json", {{"error", e.what()}, {"best", to_json(e.best())}});
    throw;
  }
  return kExitOk;
}

int run_protocol(const RunConfig& cfg, std::ostream& log) {
  const auto gates = make_gates(cfg, log);
  const auto model = cfg.readout();
  const auto trace = nvdiss::run_protocol(initial_nuclear_state(cfg.protocol.initial_state), cfg.protocol.rounds,
                                          cfg.noise, *gates);

  const PauliPair bases[] = {{Pauli::X, Pauli::X}, {Pauli::Y, Pauli::Y}, {Pauli::Z, Pauli::Z}};
  std::vector<MeasuredRound> measured;
  for (const auto& r : trace.rounds) {
    TomographyRecord rec[3];
    for (std::size_t b = 0; b < 3; ++b) {
      rec[b] = measure_setting(r.full, bases[b], *gates, cfg.noise, model,
                               derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(r.round), b));
    }
    MeasuredRound m;
    m.corr = {rec[0].expectation, rec[1].expectation, rec[2].expectation};
    m.sigma = {rec[0].sigma, rec[1].sigma, rec[2].sigma};
    m.fidelity = witness_fidelity_estimate(m.corr);
    m.sigma_fidelity = 0.25 * std::sqrt(m.sigma.xx * m.sigma.xx + m.sigma.yy * m.sigma.yy + m.sigma.zz * m.sigma.zz);
    measured.push_back(m);
  }
  {
    std::ostringstream csv;
    write_trace_csv(csv, trace, measured);
    write_text_file(out_path(cfg, "protocol_trace.csv"), csv.str());
  }

  // full tomography of the final state, raw and calibrated
  const auto records = simulate_tomography(trace.rounds.back().full, *gates, cfg.noise, model, derive_seed(cfg.seed, 7, 0));
  const auto raw = mle_reconstruct(records);
  const auto calibrated_records = readout_calibrate(records, confusion_or_identity(cfg));
  const auto cal = mle_reconstruct(calibrated_records);

  Json rounds = Json::array();
  double mean = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    rounds.push_back({{"round", trace.rounds[i].round},
                      {"state_fidelity", trace.rounds[i].fidelity},
                      {"measured_fidelity", measured[i].fidelity},
                      {"measured_fidelity_sigma", measured[i].sigma_fidelity}});
    mean += measured[i].fidelity;
  }
  mean /= static_cast<double>(measured.size());
  Json summary = {{"command", "run-protocol"},
                  {"seed", cfg.seed},
                  {"mode", to_string(cfg.noise.gate_mode)},
                  {"pump_fidelity", cfg.noise.pump_fidelity},
                  {"spectators_enabled", cfg.noise.spectators_enabled},
                  {"readout_fidelity", cfg.readout_fidelity},
                  {"rounds", rounds},
                  {"mean_measured_fidelity", mean},
                  {"final_state_fidelity", trace.rounds.back().fidelity},
                  {"min_measured_fidelity", std::accumulate(measured.begin(), measured.end(), 1.0,
                                                            [](double a, const MeasuredRound& m) { return std::min(a, m.fidelity); })},
                  {"raw_fidelity", fidelity_with_pure(raw.rho, ghz2())},
                  {"calibrated_fidelity", fidelity_with_pure(cal.rho, ghz2())},
                  {"calibration", cfg.confusion ? "config" : "identity"},
                  {"mle_raw", mle_json(raw)},
                  {"mle_calibrated", mle_json(cal)}};
  // spread over rounds 2..N around their own mean
  if (measured.size() > 2) {
    double m2 = 0.0;
    for (std::size_t i = 1; i < measured.size(); ++i) m2 += measured[i].fidelity;
    m2 /= static_cast<double>(measured.size() - 1);
    double v2 = 0.0;
    for (std::size_t i = 1; i < measured.size(); ++i) v2 += std::pow(measured[i].fidelity - m2, 2);
    summary["std_measured_fidelity_after_round_1"] = std::sqrt(v2 / static_cast<double>(measured.size() - 2));
  }
  write_json(cfg, "protocol_summary.json", summary);
  log << "run-protocol: " << trace.rounds.size() << " rounds, final F " << trace.rounds.back().fidelity
      << ", measured F " << measured.back().fidelity << "\n";
  return kExitOk;
}

int tomography(const RunConfig& cfg, std::ostream& log) {
  const auto gates = make_gates(cfg, log);
  DensityMatrix truth_full = DensityMatrix::maximally_mixed(std::size_t{1} << gates->num_qubits());
  if (cfg.tomography.state == "protocol") {
    truth_full = nvdiss::run_protocol(initial_nuclear_state(cfg.protocol.initial_state), cfg.protocol.rounds,
                                      cfg.noise, *gates)
                     .rounds.back()
                     .full;
  } else {
    truth_full = embed_nuclear_state(initial_nuclear_state(cfg.tomography.state), *gates);
  }
  const auto truth = nuclear_state(truth_full, *gates);

  std::vector<TomographyRecord> records;
  if (cfg.tomography.exact) {
    for (const auto& b : tomography_settings()) {
      const double e = mapped_expectation(truth_full, b, *gates, cfg.noise);
      records.push_back({b, 0.5 * (1.0 + e), e, 0.0});
    }
  } else {
    records = simulate_tomography(truth_full, *gates, cfg.noise, cfg.readout(), derive_seed(cfg.seed, 7, 0));
  }
  if (cfg.confusion) records = readout_calibrate(records, *cfg.confusion);
  const auto mle = mle_reconstruct(records);
  const auto rep = fidelity_report(records, mle.rho);

  {
    std::ostringstream csv;
    write_records_csv(csv, records);
    write_text_file(out_path(cfg, "tomography_records.csv"), csv.str());
  }
  write_json(cfg, "rho.json", density_matrix_json(mle.rho));
  write_json(cfg, "fidelity_report.json",
             {{"command", "tomography"},
              {"seed", cfg.seed},
              {"state", cfg.tomography.state},
              {"exact", cfg.tomography.exact},
              {"fidelity", rep.fidelity},
              {"sigma", rep.sigma},
              {"witness_fidelity", rep.witness},
              {"true_fidelity", fidelity_with_pure(truth, ghz2())},
              {"trace_distance_to_truth", trace_distance(mle.rho, truth)},
              {"calibrated", cfg.confusion.has_value()},
              {"mle", mle_json(mle)}});
  log << "tomography: F = " << rep.fidelity << " +- " << rep.sigma << (mle.converged ? "" : " (MLE not converged)")
      << "\n";
  return kExitOk;
}

int estimate(const RunConfig& cfg, std::ostream& log) {
  const auto reg = cfg.full_register();
  const auto est = estimate_register(reg, cfg.estimate);
  Json spins = Json::array();
  for (const auto& e : est) {
    auto j = to_json(e);
    const auto& s = reg.spin(e.id);
    j["reference"] = {{"a_zz_khz", s.params.a_zz_khz}, {"a_zx_khz", s.params.a_zx_khz}};
    spins.push_back(j);
    log << "spin " << e.id << ": A_zz " << e.estimate.a_zz_khz << " +- " << e.a_zz_uncertainty_khz << " kHz, A_zx "
        << e.estimate.a_zx_khz << " +- " << e.a_zx_uncertainty_khz << " kHz\n";
  }
  write_json(cfg, "estimation.json",
             {{"command", "estimate"}, {"seed", cfg.seed}, {"larmor_khz", reg.larmor_khz()}, {"spins", spins}});
  return kExitOk;
}

int run(const std::string& command, const Options& opt, std::ostream& log, std::ostream& err) {
  try {
    const RunConfig cfg = resolve_config(opt);
    if (command == "cpmg-scan") return cpmg_scan(cfg, log);
    if (command == "compile") return compile(cfg, log);
    if (command == "run-protocol") return run_protocol(cfg, log);
    if (command == "tomography") return tomography(cfg, log);
    if (command == "estimate") return estimate(cfg, log);
    err << "unknown command '" << command << "'\n";
    return kExitValidation;
  } catch (const CompileError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumericalFloor;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace nvdiss::cli
