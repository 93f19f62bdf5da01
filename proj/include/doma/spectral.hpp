#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "doma/model.hpp"
#include "doma/rng.hpp"

namespace doma {

// Empirical moment proxies built from the data:
//   m1 = (1/n) sum y_i x_i,
//   m2 = (1/n) sum y_i (x_i x_i^T - I),
//   m  = m1 m1^T + m2.
struct MomentEstimates {
  Eigen::VectorXd m1;
  Eigen::MatrixXd m2;
  Eigen::MatrixXd m;
};

// Orthonormal basis (d x r) of the estimated slope-difference subspace.
struct SubspaceBasis {
  Eigen::MatrixXd v;
};

struct InitConfig {
  int t_candidates = 100;
  int refine_sweeps = 5;
  // Candidate coefficient scale; unset means "auto" = sample std of y.
  std::optional<double> scale{};
  std::uint64_t seed = 0;
};

class init_failure : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

MomentEstimates estimate_moments(const Dataset& data);

// Top-r left singular vectors of m (descending singular values). SVD rather
// than an eigendecomposition: m2 is not symmetric in general, and the left
// singular vectors capture its column space without a symmetry assumption.
SubspaceBasis subspace(const MomentEstimates& moments, int r);

// One random model with every slope in span(basis): slope = scale * V c with
// c standard normal of length r, intercepts Normal(0, scale^2). Draw order
// per block: the r subspace coefficients, then the intercept; beta blocks
// first, then alpha blocks.
DomaModel sample_candidate(const SubspaceBasis& basis, int k1, int k2,
                           double scale, Rng& rng);

// Full initializer: moments, dominant subspace, then T independent
// sample-and-refine trials scored by loss; the best refined candidate wins
// (lowest trial index on ties). Candidates that diverge are discarded;
// init_failure if every trial diverges.
DomaModel initialize(const Dataset& data, int k1, int k2,
                     const InitConfig& config);

// Numerical rank (singular values > 1e-8 * max) of the matrix whose columns
// are the pairwise differences beta_j - alpha_l, as full (d+1)-vectors.
int pairwise_difference_rank(const DomaModel& model);

// Numerical rank of all parameters shifted by the block at `shift_index`
// in the stacked order [beta_1..beta_k1, alpha_1..alpha_k2]. Equal to
// pairwise_difference_rank for every valid index.
int shifted_stack_rank(const DomaModel& model, int shift_index);

// Monte Carlo estimate of the population m1 under standard normal covariates:
// draws x, classifies it with argmax_pair, and averages the active slope
// difference. Independent of estimate_moments by construction.
Eigen::VectorXd population_m1_oracle(const DomaModel& model,
                                     std::int64_t mc_samples, Rng& rng);

}  // namespace doma
