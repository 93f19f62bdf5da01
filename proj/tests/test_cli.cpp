#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "doma/io.hpp"
#include "doma/metrics.hpp"
#include "doma/model.hpp"
#include "doma/rng.hpp"
#include "test_util.hpp"

using namespace doma;
using doma::testing::random_dataset;
using doma::testing::random_model;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("doma_cli_" + std::to_string(::getpid()) + "_" + name))
      .string();
}

// Runs the binary under test with stdout/stderr captured to temp files.
RunResult run_cli(const std::string& args) {
  const char* cli = std::getenv("DOMA_CLI_PATH");
  REQUIRE_MESSAGE(cli != nullptr, "DOMA_CLI_PATH must point at the binary");
  static int counter = 0;
  std::string out_file = temp_path("stdout_" + std::to_string(counter));
  std::string err_file = temp_path("stderr_" + std::to_string(counter));
  ++counter;
  std::string cmd =
      std::string(cli) + " " + args + " >" + out_file + " 2>" + err_file;
  int status = std::system(cmd.c_str());
  RunResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  std::filesystem::remove(out_file);
  std::filesystem::remove(err_file);
  return result;
}

// Files created by a test, removed when the scope closes.
struct Workspace {
  std::vector<std::string> files;
  std::string add(const std::string& name) {
    files.push_back(temp_path(name));
    return files.back();
  }
  ~Workspace() {
    for (const auto& f : files) {
      std::error_code ec;
      std::filesystem::remove(f, ec);
    }
  }
};

DomaModel crease_model() {
  DomaModel m;
  m.d = 1;
  m.beta.resize(2, 2);
  m.beta << 1, 0, -1, 0;
  m.alpha = Eigen::MatrixXd::Zero(1, 2);
  return m;
}

}  // namespace

TEST_CASE("cli: --version and --help exit zero") {
  RunResult version = run_cli("--version");
  CHECK(version.code == 0);
  CHECK(version.out.find("doma 0.1.0") != std::string::npos);
  RunResult help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("fit") != std::string::npos);
}

TEST_CASE("cli: unknown flags and missing subcommands exit one") {
  CHECK(run_cli("fit --no-such-flag").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
}

TEST_CASE("cli fit: recovers a model and writes the report") {
  Workspace ws;
  Rng rng(705);
  DomaModel truth = random_model(rng, 3, 2, 2);
  Dataset data = random_dataset(truth, 800, 0.0, rng);
  std::string data_path = ws.add("fit_data.csv");
  std::string model_path = ws.add("fit_model.json");
  std::string report_path = ws.add("fit_report.json");
  write_dataset(data_path, data);

  RunResult r = run_cli("fit --data " + data_path + " --k1 2 --k2 2 --out " +
                        model_path + " --report " + report_path +
                        " --T 200 --seed 7");
  CHECK(r.code == 0);
  DomaModel est = read_model(model_path);
  CHECK(test_nmse(est, data) < 1e-3);

  nlohmann::json report;
  std::ifstream in(report_path);
  in >> report;
  CHECK(report.contains("converged"));
  CHECK(report.contains("iterations"));
  CHECK(report["model"]["k1"] == 2);
}

TEST_CASE("cli fit: a missing data file names the path on stderr") {
  RunResult r = run_cli(
      "fit --data /nonexistent/doma_data.csv --k1 1 --k2 1 --out " +
      temp_path("never_written.json"));
  CHECK(r.code == 1);
  CHECK(r.err.find("/nonexistent/doma_data.csv") != std::string::npos);
}

TEST_CASE("cli fit: hitting the iteration cap exits 2 but still writes the "
          "model") {
  Workspace ws;
  Rng rng(709);
  DomaModel truth = random_model(rng, 2, 2, 2);
  Dataset data = random_dataset(truth, 100, 0.0, rng);
  std::string data_path = ws.add("cap_data.csv");
  std::string model_path = ws.add("cap_model.json");
  write_dataset(data_path, data);

  RunResult r = run_cli("fit --data " + data_path +
                        " --k1 2 --k2 2 --gamma 0 --max-iters 1 --out " +
                        model_path + " --seed 3");
  CHECK(r.code == 2);
  CHECK(std::filesystem::exists(model_path));
  DomaModel est = read_model(model_path);
  CHECK(est.k1() == 2);
}

TEST_CASE("cli init: emits a parseable model of the requested shape") {
  Workspace ws;
  Rng rng(719);
  DomaModel truth = random_model(rng, 2, 2, 1);
  Dataset data = random_dataset(truth, 200, 0.0, rng);
  std::string data_path = ws.add("init_data.csv");
  std::string init_path = ws.add("init_model.json");
  write_dataset(data_path, data);

  RunResult r = run_cli("init --data " + data_path +
                        " --k1 2 --k2 1 --T 20 --out " + init_path);
  CHECK(r.code == 0);
  DomaModel init = read_model(init_path);
  CHECK(init.d == 2);
  CHECK(init.k1() == 2);
  CHECK(init.k2() == 1);
}

TEST_CASE("cli predict: evaluates a stored model on covariates") {
  Workspace ws;
  std::string model_path = ws.add("predict_model.json");
  std::string x_path = ws.add("predict_x.csv");
  std::string out_path = ws.add("predict_out.csv");
  write_model(model_path, crease_model());
  {
    std::ofstream out(x_path);
    out << "x1\n-2\n3\n";
  }
  RunResult r = run_cli("predict --model " + model_path + " --data " +
                        x_path + " --out " + out_path);
  CHECK(r.code == 0);
  CHECK(slurp(out_path) == "# doma 0.1.0\ny_hat\n2\n3\n");
}

TEST_CASE("cli predict: zero rows produce an empty prediction column") {
  Workspace ws;
  std::string model_path = ws.add("predict0_model.json");
  std::string x_path = ws.add("predict0_x.csv");
  std::string out_path = ws.add("predict0_out.csv");
  write_model(model_path, crease_model());
  {
    std::ofstream out(x_path);
    out << "x1\n";
  }
  RunResult r = run_cli("predict --model " + model_path + " --data " +
                        x_path + " --out " + out_path);
  CHECK(r.code == 0);
  CHECK(slurp(out_path) == "# doma 0.1.0\ny_hat\n");
}

TEST_CASE("cli predict: dimension mismatch exits one with a message") {
  Workspace ws;
  std::string model_path = ws.add("mismatch_model.json");
  std::string x_path = ws.add("mismatch_x.csv");
  write_model(model_path, crease_model());
  {
    std::ofstream out(x_path);
    out << "x1,x2\n1,2\n";
  }
  RunResult r = run_cli("predict --model " + model_path + " --data " +
                        x_path + " --out " + temp_path("mismatch_out.csv"));
  CHECK(r.code == 1);
  CHECK(!r.err.empty());
}

TEST_CASE("cli compress: drops the dominated slope and reports it") {
  Workspace ws;
  std::string model_path = ws.add("compress_model.json");
  std::string out_path = ws.add("compress_out.json");
  DomaModel m;
  m.d = 1;
  m.beta.resize(3, 2);
  m.beta << -1, 0, 1, 0, 0.5, 0;
  m.alpha = Eigen::MatrixXd::Zero(1, 2);
  write_model(model_path, m);

  RunResult r = run_cli("compress --model " + model_path + " --out " +
                        out_path);
  CHECK(r.code == 0);
  DomaModel compressed = read_model(out_path);
  CHECK(compressed.k1() == 2);
  CHECK(compressed.k2() == 1);
  nlohmann::json report = nlohmann::json::parse(r.out);
  CHECK(report["removed_beta"] == nlohmann::json::array({2}));
  CHECK(report["k1_before"] == 3);
  CHECK(report["k1_after"] == 2);
}

TEST_CASE("cli eval: identical models score zero error") {
  Workspace ws;
  Rng rng(727);
  DomaModel truth = random_model(rng, 2, 2, 2);
  std::string truth_path = ws.add("eval_truth.json");
  write_model(truth_path, truth);

  RunResult r = run_cli("eval --model " + truth_path + " --truth " +
                        truth_path + " --mc 1000 --seed 5");
  CHECK(r.code == 0);
  nlohmann::json report = nlohmann::json::parse(r.out);
  CHECK(report["rel_error"] == 0.0);
  CHECK(report["generalization_gap"] == 0.0);
}

TEST_CASE("cli simulate and summarize: a small grid runs end to end") {
  Workspace ws;
  std::string grid_path = ws.add("sim_grid.json");
  std::string records_path = ws.add("sim_records.csv");
  std::string summary_path = ws.add("sim_summary.csv");
  {
    std::ofstream out(grid_path);
    out << R"({"cells": [{"n": 60, "d": 3}], "trials": 2})";
  }
  RunResult sim = run_cli("simulate --grid " + grid_path + " --out " +
                          records_path + " --seed 42");
  CHECK(sim.code == 0);
  auto records = read_records_csv(records_path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].n == 60);
  CHECK(records[0].converged);

  RunResult sum = run_cli("summarize --records " + records_path + " --out " +
                          summary_path);
  CHECK(sum.code == 0);
  std::string text = slurp(summary_path);
  CHECK(text.rfind("# doma 0.1.0\n", 0) == 0);
  CHECK(text.find("\n60,3,2,2,") != std::string::npos);
}
