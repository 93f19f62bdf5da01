#pragma once

// Error measures between an estimated model and the ground truth. The model
// is unchanged by adding one common vector to every block of both parts and
// by reordering blocks within a part, so parameter error is measured after
// minimizing over that shift and both permutations.

#include <vector>

#include <Eigen/Dense>

#include "doma/model.hpp"
#include "doma/rng.hpp"

namespace doma {

struct AmbiguityResolution {
  Eigen::VectorXd shift;        // optimal common shift v, length d+1
  std::vector<int> perm_beta;   // perm_beta[j] = estimate block matched to truth block j
  std::vector<int> perm_alpha;
  double sq_error = 0.0;        // minimized sum of squared block residuals
};

// Exhaustive search over both block permutations; for each pair the optimal
// shift is closed-form (the negated mean of all block residuals). Ties go to
// the lexicographically smallest (perm_beta, perm_alpha). Throws
// std::invalid_argument on shape mismatch and std::length_error when
// k1! * k2! exceeds 1e7.
AmbiguityResolution resolve_ambiguity(const DomaModel& est,
                                      const DomaModel& truth);

// resolve_ambiguity(...).sq_error normalized by the stacked squared norm of
// the truth parameters. Throws std::domain_error for an all-zero truth.
double relative_param_error(const DomaModel& est, const DomaModel& truth);

// sum (y_i - f(x_i))^2 / sum y_i^2. Throws std::domain_error when all
// targets are zero.
double test_nmse(const DomaModel& model, const Dataset& data);

// Monte Carlo estimate of E[(f_est(x) - f_truth(x))^2] over standard normal
// covariates.
double generalization_gap(const DomaModel& est, const DomaModel& truth,
                          std::int64_t mc_samples, Rng& rng);

}  // namespace doma
