#pragma once

// Run configuration and result files (JSON / CSV).

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvdiss/estimation.hpp"
#include "nvdiss/measurement.hpp"
#include "nvdiss/protocol.hpp"
#include "nvdiss/pulse.hpp"
#include "nvdiss/spin_model.hpp"

namespace nvdiss {

using Json = nlohmann::ordered_json;

/// Bad or unknown configuration content.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CpmgScanConfig {
  double tau_min_ns = 100.0;
  double tau_max_ns = 8000.0;
  double tau_step_ns = 2.0;
  int n_pulses = 32;
};

struct ProtocolConfig {
  int rounds = 8;
  std::string initial_state = "maximally_mixed";  // maximally_mixed | ghz | 01
};

struct TomographyConfig {
  std::string state = "protocol";  // protocol | ghz | experimental | maximally_mixed
  bool exact = false;              // skip the readout simulation
};

struct RunConfig {
  double b_z_gauss = kReferenceFieldGauss;
  double gamma_khz_per_gauss = kGamma13C_kHzPerGauss;
  std::vector<NuclearSpin> spins;
  std::vector<std::string> targets = {"2", "4"};
  std::vector<std::string> spectators = {"1"};  // simulated alongside the targets
  NoiseModel noise = NoiseModel::realistic();
  double readout_fidelity = 0.765;
  int shots = 5000;
  std::optional<Eigen::MatrixXd> confusion;
  std::optional<std::string> gate_library;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  CpmgScanConfig cpmg_scan;
  std::map<GateKind, CompileSearch> compile;  // defaults from default_search
  ProtocolConfig protocol;
  TomographyConfig tomography;
  SpinEstimateOptions estimate;

  SpinRegister full_register() const;
  /// Targets plus spectators, in register order; targets only when spectators are disabled.
  SpinRegister simulation_register() const;
  ReadoutModel readout() const;
  CompileSearch search(GateKind kind) const;
};

/// Defaults: the four surveyed spins, targets 2 and 4, realistic noise.
RunConfig default_config();
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::string& path);
Json to_json(const RunConfig& c);

// gate library
Json to_json(const CompiledGate& g);
Json to_json(const GateLibrary& lib);
GateLibrary gate_library_from_json(const Json& j);
GateLibrary load_gate_library(const std::string& path);

// protocol trace; measured columns are optional
struct MeasuredRound {
  Correlations corr;
  Correlations sigma;
  double fidelity = 0.0;
  double sigma_fidelity = 0.0;
};

void write_trace_csv(std::ostream& os, const ProtocolTrace& trace, const std::vector<MeasuredRound>& measured = {});

void write_records_csv(std::ostream& os, const std::vector<TomographyRecord>& records);
std::vector<TomographyRecord> read_records_csv(std::istream& is);

Json density_matrix_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const Json& j);

Json to_json(const SpinEstimate& e);
Json to_json(const FrequencyEstimate& e);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Shortest round-trippable decimal form.
std::string format_double(double v);

}  // namespace nvdiss
