#include <iostream>

#include <CLI11.hpp>

#include "nvdiss/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"NV-center nuclear-spin dissipative GHZ simulator"};
  app.require_subcommand(1, 1);

  nvdiss::cli::Options opt;
  std::string config, out, mode;
  std::uint64_t seed = 0;
  int rounds = 0;

  const char* commands[][2] = {
      {"cpmg-scan", "CPMG coherence scan over the tau grid"},
      {"compile", "compile nuclear gates into a gate library"},
      {"run-protocol", "run the dissipative protocol"},
      {"tomography", "two-qubit tomography with MLE"},
      {"estimate", "adaptive hyperfine estimation"},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master RNG seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--mode", mode, "ideal | realistic")->check(CLI::IsMember({"ideal", "realistic"}));
    sub->add_option("--rounds", rounds, "protocol rounds")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : nvdiss::cli::kExitValidation;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->count("--config")) opt.config_path = config;
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--out")) opt.out_dir = out;
  if (sub->count("--mode")) opt.mode = mode;
  if (sub->count("--rounds")) opt.rounds = rounds;
  return nvdiss::cli::run(sub->get_name(), opt, std::cout, std::cerr);
}
