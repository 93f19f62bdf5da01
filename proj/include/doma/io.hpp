#pragma once

// File formats: model and report JSON, dataset/records/summary CSV, and the
// grid config. Numbers are written in shortest round-trip form, so every
// file parses back to bit-identical values. CSV outputs begin with a version
// comment line; lines starting with '#' are skipped on read.

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "doma/model.hpp"
#include "doma/optimizer.hpp"
#include "doma/synth.hpp"

namespace doma {

inline constexpr const char* kToolName = "doma";
inline constexpr const char* kToolVersion = "0.1.0";

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal form that parses back to exactly v ("inf", "-inf", "nan"
// for the non-finite values).
std::string format_double(double v);

// "# doma 0.1.0", the comment line atop every CSV output.
std::string csv_version_header();

nlohmann::json model_to_json(const DomaModel& model);
DomaModel model_from_json(const nlohmann::json& j);
DomaModel read_model(const std::string& path);
void write_model(const std::string& path, const DomaModel& model);

// Model plus iterations/converged, and the loss trace when recorded.
nlohmann::json report_to_json(const FitReport& report);
void write_report(const std::string& path, const FitReport& report);

// Dataset CSV: header x1,...,xd,y then one row per sample.
Dataset read_dataset(const std::string& path);
void write_dataset(const std::string& path, const Dataset& data);

// Covariates-only CSV: header x1,...,xd. May have zero rows.
Eigen::MatrixXd read_covariates(const std::string& path);

// Single y_hat column.
void write_predictions(const std::string& path, const Eigen::VectorXd& y_hat);

void write_records_csv(const std::string& path,
                       const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_records_csv(const std::string& path);
void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows);

struct GridConfig {
  std::vector<GridCell> cells;
  int trials = 20;
  GridOptions options;
};

// JSON grid config. Either an explicit cell list,
//   {"cells":[{"n":..,"d":..,"k1":..,"k2":..,"sigma_z":..},...]}
// or a product grid,
//   {"d":[5,10,20],"n_over_d":[2,5,...],"sigma_z":[0,0.1],"k1":2,"k2":2}
// where "n" may replace "n_over_d" for absolute sample counts. Cells expand
// in d-major, then n, then sigma_z order. Optional top-level keys: trials,
// kappa_min, param_scale, oracle_radius_factor, test_samples, gamma,
// max_iters, t_candidates, refine_sweeps, covariates.
GridConfig read_grid_config(const std::string& path);

}  // namespace doma
