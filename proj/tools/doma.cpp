// Command-line driver: fit, init, predict, compress, eval, simulate,
// summarize. Exit codes: 0 success, 1 usage or I/O error, 2 non-convergence.
// All randomness flows from --seed; nothing reads the environment.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "doma/io.hpp"
#include "doma/metrics.hpp"
#include "doma/model.hpp"
#include "doma/optimizer.hpp"
#include "doma/spectral.hpp"
#include "doma/synth.hpp"
#include "doma/tropical.hpp"

namespace {

struct FitArgs {
  std::string data_path;
  std::string out_path = "model.json";
  std::string report_path = "report.json";
  std::string init_model_path;
  int k1 = 0;
  int k2 = 0;
  int t_candidates = 100;
  int refine_sweeps = 5;
  std::optional<double> scale;
  double gamma = 1e-10;
  int max_iters = 2000;
  bool trace = false;
  std::uint64_t seed = 0;
};

int run_fit(const FitArgs& a) {
  doma::Dataset data = doma::read_dataset(a.data_path);
  doma::DomaModel start;
  if (!a.init_model_path.empty()) {
    start = doma::read_model(a.init_model_path);
    doma::require_same_dimension(start, data);
  } else {
    doma::InitConfig ic;
    ic.t_candidates = a.t_candidates;
    ic.refine_sweeps = a.refine_sweeps;
    ic.scale = a.scale;
    ic.seed = a.seed;
    start = doma::initialize(data, a.k1, a.k2, ic);
  }

  doma::FitConfig fc;
  fc.gamma = a.gamma;
  fc.max_iters = a.max_iters;
  fc.record_trace = a.trace;
  doma::FitReport report;
  try {
    report = doma::fit(data, start, fc);
  } catch (const doma::divergence_error& e) {
    // The iterate left the finite range; there is no representable model to
    // write, so only the diagnostic comes out.
    std::cerr << e.what() << '\n';
    return 2;
  }
  doma::write_model(a.out_path, report.model);
  doma::write_report(a.report_path, report);
  return report.converged ? 0 : 2;
}

struct InitArgs {
  std::string data_path;
  std::string out_path = "init.json";
  int k1 = 0;
  int k2 = 0;
  int t_candidates = 100;
  int refine_sweeps = 5;
  std::optional<double> scale;
  std::uint64_t seed = 0;
};

int run_init(const InitArgs& a) {
  doma::Dataset data = doma::read_dataset(a.data_path);
  doma::InitConfig ic;
  ic.t_candidates = a.t_candidates;
  ic.refine_sweeps = a.refine_sweeps;
  ic.scale = a.scale;
  ic.seed = a.seed;
  doma::DomaModel model = doma::initialize(data, a.k1, a.k2, ic);
  doma::write_model(a.out_path, model);
  return 0;
}

struct PredictArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path = "predictions.csv";
};

int run_predict(const PredictArgs& a) {
  doma::DomaModel model = doma::read_model(a.model_path);
  Eigen::MatrixXd x = doma::read_covariates(a.data_path);
  if (x.cols() != model.d) {
    std::cerr << "covariates have dimension " << x.cols()
              << ", model expects " << model.d << '\n';
    return 1;
  }
  doma::write_predictions(a.out_path, doma::evaluate_batch(model, x));
  return 0;
}

struct CompressArgs {
  std::string model_path;
  std::string out_path = "compressed.json";
  double tol = doma::kDefaultHullTol;
};

int run_compress(const CompressArgs& a) {
  doma::DomaModel model = doma::read_model(a.model_path);
  doma::CompressionReport report = doma::compress(model, a.tol);
  doma::write_model(a.out_path, report.model);
  nlohmann::json j{{"removed_beta", report.removed_beta},
                   {"removed_alpha", report.removed_alpha},
                   {"k1_before", model.k1()},
                   {"k1_after", report.model.k1()},
                   {"k2_before", model.k2()},
                   {"k2_after", report.model.k2()}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct EvalArgs {
  std::string model_path;
  std::string truth_path;
  std::string data_path;
  std::int64_t mc_samples = 10000;
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a) {
  doma::DomaModel est = doma::read_model(a.model_path);
  doma::DomaModel truth = doma::read_model(a.truth_path);
  nlohmann::json j;
  j["rel_error"] = doma::relative_param_error(est, truth);
  if (!a.data_path.empty()) {
    doma::Dataset data = doma::read_dataset(a.data_path);
    j["nmse"] = doma::test_nmse(est, data);
  }
  if (a.mc_samples > 0) {
    doma::Rng rng(a.seed);
    j["generalization_gap"] =
        doma::generalization_gap(est, truth, a.mc_samples, rng);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct SimulateArgs {
  std::string grid_path;
  std::string out_path = "records.csv";
  std::string init_kind = "oracle_perturbation";
  int trials = 0;  // 0: take the config's value
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& a) {
  doma::GridConfig config = doma::read_grid_config(a.grid_path);
  int trials = a.trials > 0 ? a.trials : config.trials;
  std::vector<doma::TrialRecord> records =
      doma::run_grid(config.cells, trials, doma::parse_init_kind(a.init_kind),
                     a.seed, config.options);
  doma::write_records_csv(a.out_path, records);
  return 0;
}

struct SummarizeArgs {
  std::string records_path;
  std::string out_path = "summary.csv";
};

int run_summarize(const SummarizeArgs& a) {
  std::vector<doma::TrialRecord> records =
      doma::read_records_csv(a.records_path);
  doma::write_summary_csv(a.out_path, doma::summarize(records));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise-linear regression as a difference of max-affine "
               "functions"};
  app.set_version_flag(
      "--version", std::string(doma::kToolName) + " " + doma::kToolVersion);
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "fit a model to a dataset (spectral init unless --init-model)");
  fit->add_option("--data", fit_args.data_path, "training CSV")->required();
  fit->add_option("--k1", fit_args.k1, "positive-part pieces")
      ->required()
      ->check(CLI::PositiveNumber);
  fit->add_option("--k2", fit_args.k2, "negative-part pieces")
      ->required()
      ->check(CLI::PositiveNumber);
  fit->add_option("--out", fit_args.out_path, "output model JSON");
  fit->add_option("--report", fit_args.report_path, "output report JSON");
  fit->add_option("--init-model", fit_args.init_model_path,
                  "start from this model instead of the spectral method");
  fit->add_option("--T", fit_args.t_candidates, "spectral candidates")
      ->check(CLI::PositiveNumber);
  fit->add_option("--refine-sweeps", fit_args.refine_sweeps,
                  "sweeps per candidate")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--scale", fit_args.scale,
                  "candidate scale (default: sample std of y)");
  fit->add_option("--gamma", fit_args.gamma, "relative-change stop threshold")
      ->check(CLI::NonNegativeNumber);
  fit->add_option("--max-iters", fit_args.max_iters, "sweep cap")
      ->check(CLI::PositiveNumber);
  fit->add_flag("--trace", fit_args.trace, "record the per-sweep loss");
  fit->add_option("--seed", fit_args.seed, "RNG seed");

  InitArgs init_args;
  CLI::App* init = app.add_subcommand(
      "init", "spectral initialization only, no full fit");
  init->add_option("--data", init_args.data_path, "training CSV")->required();
  init->add_option("--k1", init_args.k1, "positive-part pieces")
      ->required()
      ->check(CLI::PositiveNumber);
  init->add_option("--k2", init_args.k2, "negative-part pieces")
      ->required()
      ->check(CLI::PositiveNumber);
  init->add_option("--out", init_args.out_path, "output model JSON");
  init->add_option("--T", init_args.t_candidates, "spectral candidates")
      ->check(CLI::PositiveNumber);
  init->add_option("--refine-sweeps", init_args.refine_sweeps,
                   "sweeps per candidate")
      ->check(CLI::NonNegativeNumber);
  init->add_option("--scale", init_args.scale,
                   "candidate scale (default: sample std of y)");
  init->add_option("--seed", init_args.seed, "RNG seed");

  PredictArgs predict_args;
  CLI::App* predict =
      app.add_subcommand("predict", "evaluate a model on covariates");
  predict->add_option("--model", predict_args.model_path, "model JSON")
      ->required();
  predict->add_option("--data", predict_args.data_path,
                      "covariate CSV (x1..xd, no y)")
      ->required();
  predict->add_option("--out", predict_args.out_path, "output y_hat CSV");

  CompressArgs compress_args;
  CLI::App* compress = app.add_subcommand(
      "compress", "drop blocks inside the hull of their part");
  compress->add_option("--model", compress_args.model_path, "model JSON")
      ->required();
  compress->add_option("--out", compress_args.out_path,
                       "output compressed model JSON");
  compress->add_option("--tol", compress_args.tol, "hull distance tolerance")
      ->check(CLI::NonNegativeNumber);

  EvalArgs eval_args;
  CLI::App* eval =
      app.add_subcommand("eval", "error metrics against a ground truth");
  eval->add_option("--model", eval_args.model_path, "estimate JSON")
      ->required();
  eval->add_option("--truth", eval_args.truth_path, "ground-truth JSON")
      ->required();
  eval->add_option("--data", eval_args.data_path, "test CSV for NMSE");
  eval->add_option("--mc", eval_args.mc_samples,
                   "Monte Carlo samples for the generalization gap");
  eval->add_option("--seed", eval_args.seed, "RNG seed");

  SimulateArgs sim_args;
  CLI::App* simulate =
      app.add_subcommand("simulate", "run a Monte Carlo trial grid");
  simulate->add_option("--grid", sim_args.grid_path, "grid config JSON")
      ->required();
  simulate->add_option("--out", sim_args.out_path, "output records CSV");
  simulate
      ->add_option("--init-kind", sim_args.init_kind,
                   "oracle_perturbation or spectral")
      ->check(CLI::IsMember({"oracle_perturbation", "spectral"}));
  simulate->add_option("--trials", sim_args.trials, "trials per cell")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_args.seed, "base seed");

  SummarizeArgs sum_args;
  CLI::App* summarize =
      app.add_subcommand("summarize", "per-cell medians of a records CSV");
  summarize->add_option("--records", sum_args.records_path, "records CSV")
      ->required();
  summarize->add_option("--out", sum_args.out_path, "output summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) return run_fit(fit_args);
    if (init->parsed()) return run_init(init_args);
    if (predict->parsed()) return run_predict(predict_args);
    if (compress->parsed()) return run_compress(compress_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (simulate->parsed()) return run_simulate(sim_args);
    if (summarize->parsed()) return run_summarize(sum_args);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
