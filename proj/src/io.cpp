#include "nvdiss/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace nvdiss {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// config

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("confusion: expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || row.size() != j.size()) throw ConfigError("confusion: matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

RunConfig parse_unchecked(const Json& j) {
  RunConfig c = default_config();
  check_keys(j, {"register", "targets", "spectators", "noise", "readout", "gate_library", "seed", "output_dir", "cpmg_scan",
                 "compile", "protocol", "tomography", "estimate"},
             "config");
  if (j.contains("register")) {
    const auto& r = j.at("register");
    check_keys(r, {"b_z_gauss", "gamma_khz_per_gauss", "spins"}, "register");
    read(r, "b_z_gauss", c.b_z_gauss);
    read(r, "gamma_khz_per_gauss", c.gamma_khz_per_gauss);
    if (r.contains("spins")) {
      c.spins.clear();
      for (const auto& s : r.at("spins")) {
        check_keys(s, {"id", "a_zz_khz", "a_zx_khz"}, "register.spins[]");
        NuclearSpin n;
        n.id = s.at("id").get<std::string>();
        n.params.a_zz_khz = s.at("a_zz_khz").get<double>();
        n.params.a_zx_khz = s.at("a_zx_khz").get<double>();
        c.spins.push_back(n);
      }
    }
  }
  read(j, "targets", c.targets);
  read(j, "spectators", c.spectators);
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    check_keys(n, {"pump_fidelity", "gate_mode", "spectators_enabled"}, "noise");
    read(n, "pump_fidelity", c.noise.pump_fidelity);
    if (n.contains("gate_mode")) c.noise.gate_mode = gate_mode_from_string(n.at("gate_mode").get<std::string>());
    read(n, "spectators_enabled", c.noise.spectators_enabled);
  }
  if (j.contains("readout")) {
    const auto& r = j.at("readout");
    check_keys(r, {"avg_fidelity", "shots", "confusion"}, "readout");
    read(r, "avg_fidelity", c.readout_fidelity);
    read(r, "shots", c.shots);
    if (r.contains("confusion")) c.confusion = matrix_from_json(r.at("confusion"));
  }
  if (j.contains("gate_library")) c.gate_library = j.at("gate_library").get<std::string>();
  read(j, "seed", c.seed);
  read(j, "output_dir", c.output_dir);
  if (j.contains("cpmg_scan")) {
    const auto& s = j.at("cpmg_scan");
    check_keys(s, {"tau_min_ns", "tau_max_ns", "tau_step_ns", "n_pulses"}, "cpmg_scan");
    read(s, "tau_min_ns", c.cpmg_scan.tau_min_ns);
    read(s, "tau_max_ns", c.cpmg_scan.tau_max_ns);
    read(s, "tau_step_ns", c.cpmg_scan.tau_step_ns);
    read(s, "n_pulses", c.cpmg_scan.n_pulses);
  }
  if (j.contains("compile")) {
    const auto& s = j.at("compile");
    check_keys(s, {"fidelity_floor", "spectator_weight", "windows"}, "compile");
    for (auto& [kind, search] : c.compile) {
      (void)kind;
      read(s, "fidelity_floor", search.fidelity_floor);
      read(s, "spectator_weight", search.spectator_weight);
    }
    if (s.contains("windows")) {
      const auto& w = s.at("windows");
      check_keys(w, {"conditional_x_half", "z_half", "unconditional_x_half"}, "compile.windows");
      for (const auto& [name, win] : w.items()) {
        check_keys(win, {"tau_min_ns", "tau_max_ns", "tau_step_ns", "n_min", "n_max", "n_step"},
                   "compile.windows." + name);
        auto& search = c.compile[gate_kind_from_string(name)];
        read(win, "tau_min_ns", search.tau_min_ns);
        read(win, "tau_max_ns", search.tau_max_ns);
        read(win, "tau_step_ns", search.tau_step_ns);
        read(win, "n_min", search.n_min);
        read(win, "n_max", search.n_max);
        read(win, "n_step", search.n_step);
      }
    }
  }
  if (j.contains("protocol")) {
    const auto& p = j.at("protocol");
    check_keys(p, {"rounds", "initial_state"}, "protocol");
    read(p, "rounds", c.protocol.rounds);
    read(p, "initial_state", c.protocol.initial_state);
  }
  if (j.contains("tomography")) {
    const auto& t = j.at("tomography");
    check_keys(t, {"state", "exact"}, "tomography");
    read(t, "state", c.tomography.state);
    read(t, "exact", c.tomography.exact);
  }
  if (j.contains("estimate")) {
    const auto& e = j.at("estimate");
    check_keys(e, {"iterations", "init_half_width_khz", "dt_ns", "samples"}, "estimate");
    read(e, "iterations", c.estimate.iterations);
    read(e, "init_half_width_khz", c.estimate.init_half_width_khz);
    read(e, "dt_ns", c.estimate.dt_ns);
    read(e, "samples", c.estimate.samples);
  }
  return c;
}

void validate_config(const RunConfig& c) {
  const auto reg = c.full_register();  // field, constants, spin table
  if (c.targets.size() != 2 || c.targets[0] == c.targets[1]) throw ConfigError("targets: need two distinct spin ids");
  for (const auto& t : c.targets) reg.qubit_of(t);
  for (const auto& t : c.spectators) {
    reg.qubit_of(t);
    if (t == c.targets[0] || t == c.targets[1]) throw ConfigError("spectators: '" + t + "' is a target");
  }
  validate(c.noise);
  c.readout();
  if (c.confusion) {
    const auto& m = *c.confusion;
    if (m.rows() != 2 && m.rows() != 4) throw ConfigError("confusion: must be 2x2 or 4x4");
  }
  const auto& s = c.cpmg_scan;
  if (!(s.tau_min_ns > 0.0 && s.tau_max_ns >= s.tau_min_ns && s.tau_step_ns > 0.0) || s.n_pulses < 0) {
    throw ConfigError("cpmg_scan: need 0 < tau_min <= tau_max, tau_step > 0, n_pulses >= 0");
  }
  for (const auto& [kind, search] : c.compile) {
    if (search.tau_grid().empty() || search.n_grid().empty()) {
      throw ConfigError("compile window for " + to_string(kind) + " is empty");
    }
    if (!(search.fidelity_floor >= 0.0 && search.fidelity_floor <= 1.0)) {
      throw ConfigError("compile.fidelity_floor must lie in [0, 1]");
    }
  }
  if (c.protocol.rounds < 1) throw ConfigError("protocol.rounds must be >= 1");
  const std::set<std::string> init = {"maximally_mixed", "ghz", "01"};
  if (!init.count(c.protocol.initial_state)) throw ConfigError("protocol.initial_state: unknown state");
  const std::set<std::string> tomo = {"protocol", "ghz", "experimental", "maximally_mixed"};
  if (!tomo.count(c.tomography.state)) throw ConfigError("tomography.state: unknown state");
  const auto& e = c.estimate;
  if (e.iterations < 0 || !(e.init_half_width_khz > 0.0) || !(e.dt_ns > 0.0) || e.samples < 8) {
    throw ConfigError("estimate: need iterations >= 0, init_half_width_khz > 0, dt_ns > 0, samples >= 8");
  }
}

}  // namespace

SpinRegister RunConfig::full_register() const { return SpinRegister(b_z_gauss, gamma_khz_per_gauss, spins); }

SpinRegister RunConfig::simulation_register() const {
  const auto reg = full_register();
  if (!noise.spectators_enabled) return reg.subregister(targets);
  // register order, targets plus listed spectators
  std::vector<std::string> ids;
  for (const auto& s : reg.spins()) {
    const bool keep = std::find(targets.begin(), targets.end(), s.id) != targets.end() ||
                      std::find(spectators.begin(), spectators.end(), s.id) != spectators.end();
    if (keep) ids.push_back(s.id);
  }
  return reg.subregister(ids);
}

ReadoutModel RunConfig::readout() const { return ReadoutModel::symmetric(readout_fidelity, shots); }

CompileSearch RunConfig::search(GateKind kind) const {
  auto it = compile.find(kind == GateKind::CnotEToN ? GateKind::ConditionalXHalf : kind);
  return it == compile.end() ? default_search(kind) : it->second;
}

RunConfig default_config() {
  RunConfig c;
  c.spins = survey_spins();
  for (GateKind k : {GateKind::ConditionalXHalf, GateKind::ZHalf, GateKind::UnconditionalXHalf}) {
    c.compile[k] = default_search(k);
  }
  return c;
}

RunConfig parse_config(const Json& j) {
  RunConfig c;
  try {
    c = parse_unchecked(j);
    validate_config(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(j);
}

Json to_json(const RunConfig& c) {
  Json j;
  Json spins = Json::array();
  for (const auto& s : c.spins) spins.push_back({{"id", s.id}, {"a_zz_khz", s.params.a_zz_khz}, {"a_zx_khz", s.params.a_zx_khz}});
  j["register"] = {{"b_z_gauss", c.b_z_gauss}, {"gamma_khz_per_gauss", c.gamma_khz_per_gauss}, {"spins", spins}};
  j["targets"] = c.targets;
  j["spectators"] = c.spectators;
  j["noise"] = {{"pump_fidelity", c.noise.pump_fidelity},
                {"gate_mode", to_string(c.noise.gate_mode)},
                {"spectators_enabled", c.noise.spectators_enabled}};
  j["readout"] = {{"avg_fidelity", c.readout_fidelity}, {"shots", c.shots}};
  if (c.confusion) j["readout"]["confusion"] = matrix_to_json(*c.confusion);
  if (c.gate_library) j["gate_library"] = *c.gate_library;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["cpmg_scan"] = {{"tau_min_ns", c.cpmg_scan.tau_min_ns},
                    {"tau_max_ns", c.cpmg_scan.tau_max_ns},
                    {"tau_step_ns", c.cpmg_scan.tau_step_ns},
                    {"n_pulses", c.cpmg_scan.n_pulses}};
  Json windows;
  double floor = 0.9, weight = 1.0;
  for (const auto& [kind, s] : c.compile) {
    windows[to_string(kind)] = {{"tau_min_ns", s.tau_min_ns}, {"tau_max_ns", s.tau_max_ns}, {"tau_step_ns", s.tau_step_ns},
                                {"n_min", s.n_min},           {"n_max", s.n_max},           {"n_step", s.n_step}};
    floor = s.fidelity_floor;
    weight = s.spectator_weight;
  }
  j["compile"] = {{"fidelity_floor", floor}, {"spectator_weight", weight}, {"windows", windows}};
  j["protocol"] = {{"rounds", c.protocol.rounds}, {"initial_state", c.protocol.initial_state}};
  j["tomography"] = {{"state", c.tomography.state}, {"exact", c.tomography.exact}};
  j["estimate"] = {{"iterations", c.estimate.iterations},
                   {"init_half_width_khz", c.estimate.init_half_width_khz},
                   {"dt_ns", c.estimate.dt_ns},
                   {"samples", c.estimate.samples}};
  return j;
}

// ---------------------------------------------------------------------------
// gate library

Json to_json(const CompiledGate& g) {
  Json spect = Json::object();
  for (const auto& [id, f] : g.spectator_fidelities) spect[id] = f;
  Json res = {{"order", g.resonance.order}, {"tau_resonant_ns", g.resonance.tau_resonant_ns}};
  res["reference_tau_ns"] = g.resonance.reference_tau_ns ? Json(*g.resonance.reference_tau_ns) : Json();
  res["reference_n"] = g.resonance.reference_n ? Json(*g.resonance.reference_n) : Json();
  res["reference_order"] = g.resonance.reference_order ? Json(*g.resonance.reference_order) : Json();
  res["agrees"] = g.resonance.agrees;
  return {{"spin_id", g.target.spin_id},
          {"kind", to_string(g.target.kind)},
          {"tau_ns", g.spec.tau_ns},
          {"n_pulses", g.spec.n_pulses},
          {"sign", g.sign},
          {"fidelity", g.fidelity},
          {"objective", g.objective},
          {"register_fidelity", g.register_fidelity},
          {"frame", {{"electron_rad", g.frame.electron}, {"nuclei_rad", g.frame.nuclei}}},
          {"spectator_fidelities", spect},
          {"resonance", res}};
}

Json to_json(const GateLibrary& lib) {
  Json gates = Json::array();
  for (const auto& g : lib.gates) gates.push_back(to_json(g));
  return {{"b_z_gauss", lib.b_z_gauss}, {"gates", gates}};
}

GateLibrary gate_library_from_json(const Json& j) {
  try {
    check_keys(j, {"b_z_gauss", "gates"}, "gate library");
    GateLibrary lib;
    lib.b_z_gauss = j.at("b_z_gauss").get<double>();
    for (const auto& e : j.at("gates")) {
      check_keys(e, {"spin_id", "kind", "tau_ns", "n_pulses", "sign", "fidelity", "objective", "register_fidelity",
                     "frame", "spectator_fidelities", "resonance"},
                 "gate library entry");
      CompiledGate g;
      g.target = {gate_kind_from_string(e.at("kind").get<std::string>()), e.at("spin_id").get<std::string>()};
      g.spec = {e.at("tau_ns").get<double>(), e.at("n_pulses").get<int>()};
      validate(g.spec);
      read(e, "sign", g.sign);
      read(e, "fidelity", g.fidelity);
      read(e, "objective", g.objective);
      read(e, "register_fidelity", g.register_fidelity);
      if (e.contains("frame")) {
        const auto& f = e.at("frame");
        read(f, "electron_rad", g.frame.electron);
        read(f, "nuclei_rad", g.frame.nuclei);
      }
      if (e.contains("spectator_fidelities")) {
        for (const auto& [id, f] : e.at("spectator_fidelities").items()) g.spectator_fidelities.emplace_back(id, f.get<double>());
      }
      if (e.contains("resonance")) {
        const auto& r = e.at("resonance");
        read(r, "order", g.resonance.order);
        read(r, "tau_resonant_ns", g.resonance.tau_resonant_ns);
        if (r.contains("reference_tau_ns") && !r.at("reference_tau_ns").is_null()) {
          g.resonance.reference_tau_ns = r.at("reference_tau_ns").get<double>();
        }
        if (r.contains("reference_n") && !r.at("reference_n").is_null()) g.resonance.reference_n = r.at("reference_n").get<int>();
        if (r.contains("reference_order") && !r.at("reference_order").is_null()) {
          g.resonance.reference_order = r.at("reference_order").get<int>();
        }
        read(r, "agrees", g.resonance.agrees);
      }
      lib.gates.push_back(std::move(g));
    }
    return lib;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("gate library: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("gate library: ") + e.what());
  }
}

GateLibrary load_gate_library(const std::string& path) {
  try {
    return gate_library_from_json(Json::parse(read_text_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("gate library '" + path + "': " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// tables

void write_trace_csv(std::ostream& os, const ProtocolTrace& trace, const std::vector<MeasuredRound>& measured) {
  if (!measured.empty() && measured.size() != trace.rounds.size()) {
    throw std::invalid_argument("write_trace_csv: one measured row per round");
  }
  os << "round,xx,yy,zz,fidelity";
  if (!measured.empty()) os << ",measured_xx,measured_yy,measured_zz,measured_fidelity,measured_fidelity_sigma";
  os << "\n";
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const auto& r = trace.rounds[i];
    os << r.round << ',' << format_double(r.corr.xx) << ',' << format_double(r.corr.yy) << ','
       << format_double(r.corr.zz) << ',' << format_double(r.fidelity);
    if (!measured.empty()) {
      const auto& m = measured[i];
      os << ',' << format_double(m.corr.xx) << ',' << format_double(m.corr.yy) << ',' << format_double(m.corr.zz)
         << ',' << format_double(m.fidelity) << ',' << format_double(m.sigma_fidelity);
    }
    os << "\n";
  }
}

void write_records_csv(std::ostream& os, const std::vector<TomographyRecord>& records) {
  os << "basis,p0_raw,expectation,sigma\n";
  for (const auto& r : records) {
    os << basis_label(r.basis) << ',' << format_double(r.p0_raw) << ',' << format_double(r.expectation) << ','
       << format_double(r.sigma) << "\n";
  }
}

std::vector<TomographyRecord> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "basis,p0_raw,expectation,sigma") {
    throw std::invalid_argument("records CSV: unexpected header");
  }
  std::vector<TomographyRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell[4];
    for (auto& c : cell) {
      if (!std::getline(ss, c, ',')) throw std::invalid_argument("records CSV: short row '" + line + "'");
    }
    TomographyRecord r;
    r.basis = basis_from_label(cell[0]);
    r.p0_raw = std::stod(cell[1]);
    r.expectation = std::stod(cell[2]);
    r.sigma = std::stod(cell[3]);
    out.push_back(r);
  }
  return out;
}

Json density_matrix_json(const DensityMatrix& rho) {
  Json re = Json::array(), im = Json::array();
  const auto& m = rho.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rr = Json::array(), ri = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      rr.push_back(m(i, k).real());
      ri.push_back(m(i, k).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"real", re}, {"imag", im}};
}

DensityMatrix density_matrix_from_json(const Json& j) {
  const auto& re = j.at("real");
  const auto& im = j.at("imag");
  const auto n = static_cast<Eigen::Index>(re.size());
  if (im.size() != re.size()) throw std::invalid_argument("density matrix JSON: real/imag size mismatch");
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rr = re.at(static_cast<std::size_t>(i));
    const auto& ri = im.at(static_cast<std::size_t>(i));
    if (rr.size() != re.size() || ri.size() != re.size()) throw std::invalid_argument("density matrix JSON: not square");
    for (Eigen::Index k = 0; k < n; ++k) {
      m(i, k) = cplx(rr.at(static_cast<std::size_t>(k)).get<double>(), ri.at(static_cast<std::size_t>(k)).get<double>());
    }
  }
  return DensityMatrix(m);
}

Json to_json(const FrequencyEstimate& e) {
  return {{"center_khz", e.center_khz},
          {"half_width_khz", e.half_width_khz},
          {"iterations", e.iterations},
          {"restart", e.restart},
          {"half_widths_khz", e.half_widths_khz}};
}

Json to_json(const SpinEstimate& e) {
  return {{"id", e.id},
          {"a_zz_khz", e.estimate.a_zz_khz},
          {"a_zx_khz", e.estimate.a_zx_khz},
          {"a_zz_uncertainty_khz", e.a_zz_uncertainty_khz},
          {"a_zx_uncertainty_khz", e.a_zx_uncertainty_khz},
          {"a_zz_residual_khz", e.a_zz_residual_khz},
          {"a_zx_residual_khz", e.a_zx_residual_khz},
          {"f_plus", to_json(e.f_plus)},
          {"f_minus", to_json(e.f_minus)},
          {"larmor_fit_khz", e.larmor_fit.frequency_khz},
          {"larmor_fit_ok", e.larmor_fit.fit_ok}};
}

}  // namespace nvdiss
