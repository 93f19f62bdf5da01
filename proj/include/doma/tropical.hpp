#pragma once

// Lossless model compression. A block whose parameter vector lies inside the
// convex hull of the other blocks of the same part never attains the max, so
// dropping it leaves the function unchanged everywhere. Membership is decided
// by minimizing the distance to the hull over simplex weights.

#include <vector>

#include <Eigen/Dense>

#include "doma/model.hpp"

namespace doma {

inline constexpr double kDefaultHullTol = 1e-8;

struct CompressionReport {
  std::vector<int> removed_beta;
  std::vector<int> removed_alpha;
  DomaModel model;
};

// Distance from p to the convex hull of points, via pairwise Frank-Wolfe on
// the squared-distance QP over the probability simplex. Terminates when an
// iteration improves the residual by less than tol/10; a zero-length step
// certifies optimality exactly, so early stalls cannot occur. Requires at
// least one point.
double hull_distance(const Eigen::VectorXd& p,
                     const std::vector<Eigen::VectorXd>& points,
                     double tol = kDefaultHullTol);

bool hull_membership(const Eigen::VectorXd& p,
                     const std::vector<Eigen::VectorXd>& points,
                     double tol = kDefaultHullTol);

// Greedy scan in ascending index order: index j is inactive if params[j] lies
// in the hull of the currently surviving others, and once marked it leaves
// the hull set for later checks. At least one index always survives, so
// duplicates collapse onto their last copy.
std::vector<int> inactive_indices(const std::vector<Eigen::VectorXd>& params,
                                  double tol = kDefaultHullTol);

CompressionReport compress(const DomaModel& model,
                           double tol = kDefaultHullTol);

// True iff |f_a(x) - f_b(x)| <= tol for every x in xs.
bool equivalent_on_samples(const DomaModel& a, const DomaModel& b,
                           const std::vector<Eigen::VectorXd>& xs, double tol);

}  // namespace doma
