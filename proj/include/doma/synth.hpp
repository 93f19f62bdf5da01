#pragma once

// Synthetic ground truths, covariate/noise samplers, basin perturbations,
// and the Monte Carlo trial grid. Every operation is a pure function of its
// spec and seed; trial seeds derive from (base_seed, cell, trial) so output
// is independent of scheduling.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doma/model.hpp"
#include "doma/optimizer.hpp"
#include "doma/rng.hpp"
#include "doma/spectral.hpp"

namespace doma {

struct GroundTruthSpec {
  int d = 1;
  int k1 = 1;
  int k2 = 1;
  double kappa_min = 0.5;    // required pairwise slope separation per part
  double param_scale = 1.0;  // std dev of sampled parameter entries
  std::uint64_t seed = 0;
};

// Covariate laws. All variants are zero-mean with average per-coordinate
// variance 1: the cube is scaled by sqrt(3)/half_width and the mixture is
// centered and divided by the square root of its mean coordinate variance.
struct CovariateDistribution {
  enum class Kind { standard_normal, uniform_cube, gaussian_mixture };
  Kind kind = Kind::standard_normal;
  double half_width = 1.0;        // uniform_cube
  Eigen::MatrixXd centers;        // gaussian_mixture, one center per row
  Eigen::VectorXd weights;        // gaussian_mixture, sums to 1

  static CovariateDistribution standard_normal();
  static CovariateDistribution uniform_cube(double half_width);
  static CovariateDistribution gaussian_mixture(Eigen::MatrixXd centers,
                                                Eigen::VectorXd weights);
};

enum class InitKind { oracle_perturbation, spectral };

std::string init_kind_name(InitKind kind);
InitKind parse_init_kind(const std::string& name);

struct TrialRecord {
  int n = 0;
  int d = 0;
  int k1 = 0;
  int k2 = 0;
  double sigma_z = 0.0;
  std::uint64_t seed = 0;
  InitKind init_kind = InitKind::oracle_perturbation;
  double rel_error = 0.0;  // +inf flags a failed trial
  double nmse = 0.0;       // +inf flags a failed trial
  int iterations = 0;
  bool converged = false;
};

struct GridCell {
  int n = 0;
  int d = 0;
  int k1 = 2;
  int k2 = 2;
  double sigma_z = 0.0;
};

struct SummaryRow {
  int n = 0;
  int d = 0;
  int k1 = 0;
  int k2 = 0;
  double sigma_z = 0.0;
  InitKind init_kind = InitKind::oracle_perturbation;
  int trials = 0;
  double median_rel_error = 0.0;
  double median_nmse = 0.0;
  double median_iterations = 0.0;
  double converged_fraction = 0.0;
};

struct GridOptions {
  double kappa_min = 0.5;
  double param_scale = 1.0;
  // Oracle perturbation radius as a fraction of the truth's measured
  // separation; param_scale stands in when the separation is infinite
  // (both parts singleton).
  double oracle_radius_factor = 0.05;
  int test_samples = 5000;  // noiseless test set for the NMSE column
  CovariateDistribution dist = CovariateDistribution::standard_normal();
  FitConfig fit;
  InitConfig init;
};

class infeasible_spec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Draws i.i.d. normal(0, param_scale^2) parameter entries (beta block rows
// first, then alpha) and rejects until (a) within each part every pair of
// slope vectors is at least kappa_min apart and (b) on 10^4 standard normal
// probes every cell of each part has empirical probability >= 1/(4 max(k1,k2)).
// Throws infeasible_spec after 1000 consecutive rejections.
DomaModel sample_ground_truth(const GroundTruthSpec& spec, Rng& rng);

// n rows drawn from dist in row order, then n noise draws; y = f(x) + z with
// z ~ normal(0, sigma_z^2). Noise is drawn even when sigma_z is zero so the
// covariates match across noise levels at a fixed seed.
Dataset generate_dataset(const DomaModel& model, int n,
                         const CovariateDistribution& dist, double sigma_z,
                         Rng& rng);

// Adds to the stacked beta parameters (blocks concatenated in row order) a
// uniformly random direction scaled to exactly radius, then independently to
// the stacked alpha parameters. Directions are drawn even at radius zero.
DomaModel perturbed_init(const DomaModel& truth, double radius, Rng& rng);

// Minimum pairwise slope distance within either part; +inf when both parts
// are singletons.
double model_kappa(const DomaModel& model);

// Largest exponent r such that, on the probe sample,
// P(cell_j and cell_l) <= P(cell_j)/k1^r and <= P(cell_l)/k2^r for every
// pair. +inf when nothing constrains it (k1 = k2 = 1, or no co-occurrence).
// Measured for logging; never enforced during sampling.
double measure_intersection_r(const DomaModel& model, int probes, Rng& rng);

// One record per (cell, trial), in grid order. Per trial: derive
// seed = mix_seed(base_seed, cell_index, trial_index), then from one stream
// draw truth, training set, and test set, then initialize (oracle
// perturbation from the trial stream, or the spectral method seeded with
// mix_seed(seed, 1)) and fit. Failures (divergence, infeasible spec, init
// failure) are recorded with rel_error = nmse = +inf and converged = false;
// the grid never aborts.
std::vector<TrialRecord> run_grid(const std::vector<GridCell>& cells,
                                  int trials_per_cell, InitKind init_kind,
                                  std::uint64_t base_seed,
                                  const GridOptions& options);

// Per-cell medians over the fixed trial count, cells in first-appearance
// order. +inf sentinels participate in the medians, so a cell with mostly
// failed trials reports an infinite median rather than a filtered one.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

}  // namespace doma
