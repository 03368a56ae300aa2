// Exercises the installed command surface end to end: exit codes, report
// shapes, and byte-identical reruns. The binary path arrives in KESS_BIN
// (set by ctest); the suite is skipped when it is absent.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kess/chain_io.hpp"
#include "kess/samplers.hpp"

using namespace kess;

namespace {

std::filesystem::path work_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "kess_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

const char* binary() { return std::getenv("KESS_BIN"); }

int run_cli(const std::string& args) {
  const std::string command = std::string(binary()) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string run_cli_capture(const std::string& args, const std::filesystem::path& out) {
  const std::string command =
      std::string(binary()) + " " + args + " > " + out.string() + " 2>/dev/null";
  [[maybe_unused]] const int status = std::system(command.c_str());
  std::ifstream in(out);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::filesystem::path sample_chain_file() {
  static const std::filesystem::path path = [] {
    Rng rng(808);
    const MixtureTarget target =
        MixtureTarget::single(VmfParams(UnitVector(Eigen::Vector3d(0, 0, 1)), 12.0));
    const auto file = work_dir() / "chain.csv";
    write_chain(file, sample_iid_mixture(target, 300, rng));
    return file;
  }();
  return path;
}

std::filesystem::path constant_chain_file() {
  static const std::filesystem::path path = [] {
    Eigen::MatrixXd pts(8, 3);
    for (int i = 0; i < 8; ++i) pts.row(i) << 0, 0, 1;
    const auto file = work_dir() / "constant.csv";
    write_chain(file, Chain(Manifold::sphere, {3}, pts));
    return file;
  }();
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("ess subcommand: success, unstable, and validation exit codes") {
  if (!binary()) return;
  const std::string input = sample_chain_file().string();

  CHECK(run_cli("ess --input " + input + " --kernel sphere-poisson --rho 0.75") == 0);
  CHECK(run_cli("ess --input " + input + " --kernel sphere-poisson --rho 0.75 --bandwidth 14 "
                "--output csv") == 0);

  // constant chain: zero feature variance is a validation failure
  CHECK(run_cli("ess --input " + constant_chain_file().string() +
                " --kernel sphere-poisson --rho 0.75") == 2);

  CHECK(run_cli("ess --input " + input + " --kernel sphere-poisson --rho 1.5") == 2);
  CHECK(run_cli("ess --input /nonexistent.csv --kernel sphere-poisson --rho 0.5") == 2);
}

TEST_CASE("ess report json carries the documented fields") {
  if (!binary()) return;
  const std::string payload = run_cli_capture(
      "ess --input " + sample_chain_file().string() + " --kernel sphere-poisson --rho 0.75",
      work_dir() / "ess.json");
  for (const char* key :
       {"\"n\"", "\"gamma0\"", "\"sigma2\"", "\"ess\"", "\"tau\"", "\"bandwidth\"",
        "\"window\"", "\"status\""}) {
    CHECK(payload.find(key) != std::string::npos);
  }
  CHECK(payload.find("\"bartlett\"") != std::string::npos);

  // auto bandwidth at n = 300 resolves to 6
  CHECK(payload.find("\"bandwidth\": 6") != std::string::npos);
}

TEST_CASE("reruns with identical flags produce byte-identical reports") {
  if (!binary()) return;
  const std::string args =
      "ess --input " + sample_chain_file().string() + " --kernel sphere-poisson --rho 0.6";
  const std::string first = run_cli_capture(args, work_dir() / "a.json");
  const std::string second = run_cli_capture(args, work_dir() / "b.json");
  CHECK(first == second);
  CHECK(!first.empty());
}

TEST_CASE("mmd subcommand vanishes on identical inputs") {
  if (!binary()) return;
  const std::string input = sample_chain_file().string();
  const std::string payload = run_cli_capture(
      "mmd --a " + input + " --b " + input + " --kernel sphere-poisson --rho 0.75",
      work_dir() / "mmd.json");
  const auto pos = payload.find("\"mmd2\": ");
  REQUIRE(pos != std::string::npos);
  const double value = std::stod(payload.substr(pos + 8));
  CHECK(std::abs(value) <= 1e-12);
}

TEST_CASE("pd-audit search emits a negative eigenvalue witness") {
  if (!binary()) return;
  const std::string payload = run_cli_capture(
      "pd-audit --kernel geodesic-gauss-unsafe --search --seed 31337",
      work_dir() / "witness.json");
  CHECK(payload.find("\"found\": true") != std::string::npos);
  const auto pos = payload.find("\"min_eigenvalue\": ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(payload.substr(pos + 18)) < -1e-6);
}

TEST_CASE("precision subcommand gates on epsilon") {
  if (!binary()) return;
  // report with sigma2/n = 0.01: passes eps = 0.2, fails eps = 0.05
  const auto report = work_dir() / "report.json";
  {
    std::ofstream out(report);
    out << R"({"n":1000,"gamma0":2.0,"sigma2":10.0,"ess":200.0,"tau":5.0,)"
        << R"("bandwidth":9,"window":"bartlett","status":"ok"})";
  }
  CHECK(run_cli("precision --report " + report.string() + " --epsilon 0.2") == 0);
  CHECK(run_cli("precision --report " + report.string() + " --epsilon 0.05") == 4);

  const auto unstable = work_dir() / "unstable.json";
  {
    std::ofstream out(unstable);
    out << R"({"n":1000,"gamma0":2.0,"sigma2":-0.5,"ess":null,"tau":null,)"
        << R"("bandwidth":9,"window":"bartlett","status":"unstable_sigma"})";
  }
  CHECK(run_cli("precision --report " + unstable.string() + " --epsilon 0.2") == 3);
}

TEST_CASE("unsafe kernel is rejected by the ess pipeline") {
  if (!binary()) return;
  CHECK(run_cli("ess --input " + sample_chain_file().string() +
                " --kernel geodesic-gauss-unsafe --geodesic-h 1.0 --acknowledge-unsafe") == 2);
}

TEST_CASE("stored random-walk path through the full command") {
  if (!binary()) return;
  ChainRunConfig cfg;
  cfg.n_keep = 3000;
  cfg.burn_in = 1000;
  cfg.seed = 919;
  cfg.target = MixtureTarget::single(VmfParams(UnitVector(Eigen::Vector3d(0, 0, 1)), 12.0));
  cfg.proposal_kappa = 35.0;
  const auto file = work_dir() / "rwmh_path.csv";
  write_chain(file, rwmh_sphere(cfg).chain);
  const std::string payload = run_cli_capture(
      "ess --input " + file.string() + " --kernel sphere-poisson --rho 0.75 --bandwidth 14",
      work_dir() / "rwmh_ess.json");
  const auto pos = payload.find("\"ess\": ");
  REQUIRE(pos != std::string::npos);
  const double ess = std::stod(payload.substr(pos + 7));
  CHECK(ess >= 380.0);
  CHECK(ess <= 640.0);
}

TEST_CASE("experiment subcommand writes the report file set") {
  if (!binary()) return;
  const auto dir = work_dir() / "cli_experiment";
  std::filesystem::remove_all(dir);
  const auto cfg = work_dir() / "tiny.json";
  {
    std::ofstream out(cfg);
    out << R"({"n_keep": 200, "burn_in": 100, "rotations": 3})";
  }
  CHECK(run_cli("experiment --preset rotation --config " + cfg.string() + " --out " +
                dir.string() + " --seed 555") == 0);
  for (const char* name : {"rotation_summary.json", "rotation_rows.csv", "rotation_long.csv"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  std::ifstream summary(dir / "rotation_summary.json");
  const std::string text(std::istreambuf_iterator<char>(summary),
                         std::istreambuf_iterator<char>{});
  CHECK(text.find("\"master_seed\": 555") != std::string::npos);
}

}  // TEST_SUITE
