// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>

#ifndef EQUIVAR_CLI_PATH
#error "EQUIVAR_CLI_PATH must point at the equivar binary"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int exit_code = -1;
  std::string stdout_text;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path out = fs::temp_directory_path() / ("equivar-cli-" + std::to_string(counter++));
  const std::string cmd =
      env + " " + std::string(EQUIVAR_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::ostringstream buf;
  buf << in.rdbuf();
  result.stdout_text = buf.str();
  fs::remove(out);
  return result;
}

json parse_stdout(const CliResult& r) { return json::parse(r.stdout_text); }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("equivar-clitest-" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("check-equivariance: default-config slice passes and writes a report") {
  TempDir dir;
  const auto report_path = (dir.path / "audit.json").string();
  const CliResult r =
      run_cli("check-equivariance --dim 2 --dim 8 --trials 100 --out " + report_path);
  REQUIRE(r.exit_code == 0);
  const json doc = parse_stdout(r);
  CHECK(doc["pass"] == true);
  CHECK(doc["trials"] == 100);
  CHECK(doc["equivariance"].size() == 50);  // 25 specs x 2 dims
  CHECK(fs::exists(report_path));
  CHECK(json::parse(std::ifstream(report_path)) == doc);
}

TEST_CASE("check-equivariance: zero tolerance fails, exit 1") {
  const CliResult r = run_cli("check-equivariance --dim 2 --trials 20 --tolerance 0");
  CHECK(r.exit_code == 1);
  CHECK(parse_stdout(r)["pass"] == false);
}

TEST_CASE("check-equivariance: identity family alone is reassociation-exact") {
  const CliResult r = run_cli("check-equivariance --dim 4 --trials 50 --families identity");
  REQUIRE(r.exit_code == 0);
  const json doc = parse_stdout(r);
  for (const json& c : doc["equivariance"]) {
    CHECK(c["max_error"].get<double>() <= 1e-15);
  }
  CHECK(doc["equivariance"].size() == 1);
}

TEST_CASE("grad-check: seeded matrix passes") {
  const CliResult r = run_cli("grad-check");
  REQUIRE(r.exit_code == 0);
  const json doc = parse_stdout(r);
  CHECK(doc["pass"] == true);
  CHECK(doc["cases"].size() == 20);
  CHECK(doc["max_error"].get<double>() <= 1e-5);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli("no-such-command").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("train --task no-such-task").exit_code == 2);
  CHECK(run_cli("check-equivariance --families not-a-family").exit_code == 2);
  CHECK(run_cli("eval").exit_code == 2);  // --model required
  CHECK(run_cli("train --momentum 1.5").exit_code == 2);
}

TEST_CASE("train: identity-fit meets the ratio bound and writes artifacts") {
  TempDir dir;
  const CliResult r = run_cli("train --task identity-fit --out " + dir.path.string());
  REQUIRE(r.exit_code == 0);
  const json doc = parse_stdout(r);
  CHECK(doc["loss_ratio"].get<double>() <= 0.01);
  CHECK(fs::exists(dir.path / "model.json"));
  CHECK(fs::exists(dir.path / "history.csv"));

  std::ifstream csv(dir.path / "history.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "step,loss");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == doc["steps"].get<int>() + 1);
}

TEST_CASE("train: --dim override lands in the saved model") {
  TempDir dir;
  const CliResult r =
      run_cli("train --task identity-fit --dim 8 --steps 5 --out " + dir.path.string());
  REQUIRE(r.exit_code == 0);
  const json model = json::parse(std::ifstream(dir.path / "model.json"));
  CHECK(model["vector_dim"] == 8);
  CHECK(model["schema"] == "equivar-act/1");
}

TEST_CASE("train: --steps 0 leaves the ratio at 1 and still writes files") {
  TempDir dir;
  const CliResult r = run_cli("train --task identity-fit --steps 0 --out " + dir.path.string());
  REQUIRE(r.exit_code == 0);
  const json doc = parse_stdout(r);
  CHECK(doc["loss_ratio"].get<double>() == 1.0);
  CHECK(fs::exists(dir.path / "model.json"));
  CHECK(fs::exists(dir.path / "history.csv"));
}

TEST_CASE("train then eval: final loss matches bit-for-bit") {
  TempDir dir;
  const CliResult trained =
      run_cli("train --task teacher-student --seed 5 --out " + dir.path.string());
  REQUIRE(trained.exit_code == 0);
  const double final_loss = parse_stdout(trained)["final_loss"].get<double>();

  const CliResult evaled = run_cli("eval --task teacher-student --seed 5 --model " +
                                   (dir.path / "model.json").string());
  REQUIRE(evaled.exit_code == 0);
  const json doc = parse_stdout(evaled);
  CHECK(std::abs(doc["loss"].get<double>() - final_loss) <= 1e-12 * std::max(1.0, final_loss));
  CHECK(doc["equivariance_error"].get<double>() <= 1e-9);
}

TEST_CASE("eval: rotating the dataset leaves the loss unchanged") {
  TempDir dir;
  REQUIRE(run_cli("train --task teacher-student --steps 200 --seed 9 --out " +
                  dir.path.string())
              .exit_code == 0);
  const CliResult r = run_cli("eval --task teacher-student --seed 9 --apply-unitary 321 --model " +
                              (dir.path / "model.json").string());
  REQUIRE(r.exit_code == 0);
  const json doc = parse_stdout(r);
  CHECK(doc["loss_shift"].get<double>() <= 1e-9 * std::max(1.0, doc["loss"].get<double>()));
}

TEST_CASE("eval: corrupted model file exits 3") {
  TempDir dir;
  const auto bad = dir.path / "bad.json";
  std::ofstream(bad) << "{ this is not a model";
  CHECK(run_cli("eval --model " + bad.string()).exit_code == 3);
  CHECK(run_cli("eval --model " + (dir.path / "missing.json").string()).exit_code == 3);
}

TEST_CASE("train: divergence exits 4") {
  TempDir dir;
  const CliResult r =
      run_cli("train --task teacher-student --lr 5.0 --out " + dir.path.string());
  CHECK(r.exit_code == 4);
}

TEST_CASE("unwritable report path exits 3") {
  const CliResult r =
      run_cli("check-equivariance --dim 2 --trials 5 --out /nonexistent-dir/report.json");
  CHECK(r.exit_code == 3);
}

TEST_CASE("seed precedence: env < config file < flags") {
  TempDir dir;
  const auto cfg_path = dir.path / "cfg.json";
  std::ofstream(cfg_path) << R"({"seed": 11, "trials": 7, "dim": [2]})";

  // env only
  const json env_doc = parse_stdout(
      run_cli("check-equivariance --dim 2 --trials 5", "EQUIVAR_SEED=99"));
  CHECK(env_doc["seed"] == 99);

  // config overrides env
  const json cfg_doc = parse_stdout(
      run_cli("check-equivariance --config " + cfg_path.string(), "EQUIVAR_SEED=99"));
  CHECK(cfg_doc["seed"] == 11);
  CHECK(cfg_doc["trials"] == 7);

  // flag overrides config
  const json flag_doc = parse_stdout(
      run_cli("check-equivariance --config " + cfg_path.string() + " --seed 42 --trials 3"));
  CHECK(flag_doc["seed"] == 42);
  CHECK(flag_doc["trials"] == 3);

  // malformed env value and unknown config keys are usage errors
  CHECK(run_cli("check-equivariance --dim 2 --trials 2", "EQUIVAR_SEED=abc").exit_code == 2);
  std::ofstream(cfg_path) << R"({"bogus": 1})";
  CHECK(run_cli("check-equivariance --config " + cfg_path.string()).exit_code == 2);
}

TEST_CASE("reports are deterministic for a fixed seed") {
  const json a = parse_stdout(run_cli("check-equivariance --dim 2 --trials 40 --seed 4"));
  const json b = parse_stdout(run_cli("check-equivariance --dim 2 --trials 40 --seed 4"));
  CHECK(a["equivariance"] == b["equivariance"]);
  CHECK(a["gate"] == b["gate"]);
  CHECK(a["recovery"] == b["recovery"]);
}

TEST_SUITE_END();
