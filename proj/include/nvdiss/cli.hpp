#pragma once

// Subcommands of the command-line tool. Each writes its files into the
// output directory and returns a process exit code.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "nvdiss/io.hpp"

namespace nvdiss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumericalFloor = 3;

struct Options {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;  // ideal | realistic
  std::optional<int> rounds;
};

/// Config file (or defaults) with the command-line overrides applied.
RunConfig resolve_config(const Options& opt);

int cpmg_scan(const RunConfig& cfg, std::ostream& log);
int compile(const RunConfig& cfg, std::ostream& log);
int run_protocol(const RunConfig& cfg, std::ostream& log);
int tomography(const RunConfig& cfg, std::ostream& log);
int estimate(const RunConfig& cfg, std::ostream& log);

/// Resolve the config, dispatch, and map errors to exit codes.
int run(const std::string& command, const Options& opt, std::ostream& log, std::ostream& err);

}  // namespace nvdiss::cli
