#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "nvdiss/cli.hpp"
#include "nvdiss/io.hpp"

using namespace nvdiss;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("nvdiss_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string str(const std::string& name = "") const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string write_config(const TempDir& dir, const Json& j) {
  const auto p = dir.str("config.json");
  write_text_file(p, j.dump(2));
  return p;
}

int run_cli(const std::string& cmd, const cli::Options& opt) {
  std::ostringstream log, err;
  return cli::run(cmd, opt, log, err);
}

Json small_scan() {
  return {{"cpmg_scan", {{"tau_min_ns", 4000.0}, {"tau_max_ns", 4200.0}, {"tau_step_ns", 5.0}, {"n_pulses", 8}}}};
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const auto j = to_json(default_config());
  EXPECT_EQ(to_json(parse_config(j)).dump(), j.dump());
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(parse_config(Json{{"bogus", 1}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"noise", {{"pump", 0.9}}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"register", {{"spins", {{{"id", "1"}, {"a_zz", 1.0}}}}}}}), ConfigError);
}

TEST(Config, ValidationErrors) {
  EXPECT_THROW(parse_config(Json{{"targets", {"2"}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"spectators", {"2"}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"spectators", {"9"}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"protocol", {{"rounds", 0}}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"tomography", {{"state", "bell"}}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"readout", {{"confusion", {{1.0, 0.0, 0.0}}}}}}), ConfigError);
  EXPECT_NO_THROW(parse_config(Json{{"spectators", Json::array()}}));
}

TEST(Config, SimulationRegisterOrder) {
  auto c = parse_config(Json{{"targets", {"4", "2"}}, {"spectators", {"3", "1"}}});
  const auto reg = c.simulation_register();
  ASSERT_EQ(reg.num_nuclei(), 4u);
  EXPECT_EQ(reg.spins()[0].id, "1");
  EXPECT_EQ(reg.spins()[3].id, "4");
  c.noise.spectators_enabled = false;
  EXPECT_EQ(c.simulation_register().num_nuclei(), 2u);
}

TEST(Files, GateLibraryRoundTrip) {
  const auto reg = default_config().simulation_register();
  GateLibrary lib;
  lib.b_z_gauss = reg.b_z_gauss();
  lib.gates.push_back(compile_gate({GateKind::ZHalf, "2"}, reg, default_search(GateKind::ZHalf)));
  const auto j = to_json(lib);
  const auto back = gate_library_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  ASSERT_NE(back.find("2", GateKind::ZHalf), nullptr);
  EXPECT_EQ(back.find("2", GateKind::ZHalf)->spec.tau_ns, lib.gates[0].spec.tau_ns);
  EXPECT_EQ(back.find("4", GateKind::ZHalf), nullptr);
}

TEST(Files, RecordsCsvRoundTrip) {
  std::mt19937_64 rng(1);
  auto recs = exact_records(random_density_matrix(4, rng));
  for (auto& r : recs) r.sigma = 0.0123456789;
  std::stringstream ss;
  write_records_csv(ss, recs);
  const auto back = read_records_csv(ss);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(basis_label(back[i].basis), basis_label(recs[i].basis));
    EXPECT_EQ(back[i].expectation, recs[i].expectation);
    EXPECT_EQ(back[i].sigma, recs[i].sigma);
  }
}

TEST(Files, DensityMatrixRoundTrip) {
  std::mt19937_64 rng(2);
  const auto rho = random_density_matrix(4, rng);
  EXPECT_EQ(density_matrix_from_json(density_matrix_json(rho)).matrix(), rho.matrix());
}

TEST(Files, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -1296.9, 1e-300, 527.549382}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Cli, CpmgScanIsDeterministic) {
  TempDir a, b;
  cli::Options opt;
  opt.config_path = write_config(a, small_scan());
  opt.out_dir = a.str("out");
  ASSERT_EQ(run_cli("cpmg-scan", opt), cli::kExitOk);
  opt.out_dir = b.str("out");
  ASSERT_EQ(run_cli("cpmg-scan", opt), cli::kExitOk);
  const auto csv = read_text_file(a.str("out/cpmg_scan.csv"));
  EXPECT_EQ(csv, read_text_file(b.str("out/cpmg_scan.csv")));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "tau_ns,spin_1,spin_2,spin_3,spin_4,total");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 42);
}

TEST(Cli, ValidationExitCode) {
  TempDir d;
  cli::Options opt;
  opt.config_path = write_config(d, Json{{"bogus_key", 1}});
  opt.out_dir = d.str("out");
  EXPECT_EQ(run_cli("cpmg-scan", opt), cli::kExitValidation);
  opt.config_path.reset();
  opt.rounds = 0;
  EXPECT_EQ(run_cli("run-protocol", opt), cli::kExitValidation);
  opt.rounds.reset();
  opt.mode = "noisy";
  EXPECT_EQ(run_cli("run-protocol", opt), cli::kExitValidation);
}

TEST(Cli, UnreachableFloorExitCode) {
  TempDir d;
  Json window = {{"tau_min_ns", 100.0}, {"tau_max_ns", 110.0}, {"tau_step_ns", 5.0},
                 {"n_min", 2},          {"n_max", 2},          {"n_step", 2}};
  Json cfg = {{"compile",
               {{"fidelity_floor", 0.999999},
                {"windows", {{"conditional_x_half", window}, {"z_half", window}, {"unconditional_x_half", window}}}}}};
  cli::Options opt;
  opt.config_path = write_config(d, cfg);
  opt.out_dir = d.str("out");
  EXPECT_EQ(run_cli("compile", opt), cli::kExitNumericalFloor);
  const auto report = Json::parse(read_text_file(d.str("out/compile_report.json")));
  EXPECT_TRUE(report.contains("error"));
  EXPECT_LT(report.at("best").at("fidelity").get<double>(), 0.999999);
}

TEST(Cli, IdealRunProtocol) {
  TempDir d;
  cli::Options opt;
  opt.out_dir = d.str("out");
  opt.mode = "ideal";
  opt.rounds = 3;
  opt.seed = 5;
  ASSERT_EQ(run_cli("run-protocol", opt), cli::kExitOk);
  const auto s = Json::parse(read_text_file(d.str("out/protocol_summary.json")));
  EXPECT_NEAR(s.at("final_state_fidelity").get<double>(), 1.0, 1e-10);
  EXPECT_EQ(s.at("rounds").size(), 3u);
  EXPECT_TRUE(s.contains("raw_fidelity"));
  EXPECT_TRUE(s.contains("calibrated_fidelity"));
  const auto csv = read_text_file(d.str("out/protocol_trace.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Cli, ExactTomographyOfKnownStates) {
  for (const auto& [state, f] : {std::pair{"ghz", 1.0}, std::pair{"experimental", 0.579}}) {
    TempDir d;
    cli::Options opt;
    opt.config_path = write_config(d, Json{{"tomography", {{"state", state}, {"exact", true}}}});
    opt.out_dir = d.str("out");
    opt.mode = "ideal";
    ASSERT_EQ(run_cli("tomography", opt), cli::kExitOk);
    const auto rep = Json::parse(read_text_file(d.str("out/fidelity_report.json")));
    EXPECT_NEAR(rep.at("fidelity").get<double>(), f, f == 1.0 ? 1e-6 : 0.002) << state;
    EXPECT_TRUE(fs::exists(d.str("out/rho.json")));
  }
}

TEST(Cli, UnknownCommand) {
  cli::Options opt;
  EXPECT_EQ(run_cli("teleport", opt), cli::kExitValidation);
}
