#include "doma/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace doma {

namespace {

double permutation_count(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Residual blocks for one permutation: rows[j] = est block perm[j] minus
// truth block j.
Eigen::MatrixXd residuals(const Eigen::MatrixXd& est,
                          const Eigen::MatrixXd& truth,
                          const std::vector<int>& perm) {
  Eigen::MatrixXd r(truth.rows(), truth.cols());
  for (Eigen::Index j = 0; j < truth.rows(); ++j) {
    r.row(j) = est.row(perm[static_cast<std::size_t>(j)]) - truth.row(j);
  }
  return r;
}

}  // namespace

AmbiguityResolution resolve_ambiguity(const DomaModel& est,
                                      const DomaModel& truth) {
  if (est.d != truth.d || est.k1() != truth.k1() || est.k2() != truth.k2()) {
    throw std::invalid_argument("resolve_ambiguity: models must share shape");
  }
  const int k1 = truth.k1(), k2 = truth.k2();
  if (permutation_count(k1) * permutation_count(k2) > 1e7) {
    throw std::length_error(
        "resolve_ambiguity: too many permutations to enumerate");
  }

  std::vector<int> p1(static_cast<std::size_t>(k1));
  std::iota(p1.begin(), p1.end(), 0);
  AmbiguityResolution best;
  best.sq_error = std::numeric_limits<double>::infinity();
  const double blocks = k1 + k2;

  // next_permutation walks each permutation set in lexicographic order, so
  // strict improvement keeps the lexicographically smallest tie.
  do {
    Eigen::MatrixXd h = residuals(est.beta, truth.beta, p1);
    Eigen::RowVectorXd h_sum = h.colwise().sum();
    std::vector<int> p2(static_cast<std::size_t>(k2));
    std::iota(p2.begin(), p2.end(), 0);
    do {
      Eigen::MatrixXd q = residuals(est.alpha, truth.alpha, p2);
      Eigen::RowVectorXd v = -(h_sum + q.colwise().sum()) / blocks;
      double sq = (h.rowwise() + v).squaredNorm() +
                  (q.rowwise() + v).squaredNorm();
      if (sq < best.sq_error) {
        best.sq_error = sq;
        best.shift = v.transpose();
        best.perm_beta = p1;
        best.perm_alpha = p2;
      }
    } while (std::next_permutation(p2.begin(), p2.end()));
  } while (std::next_permutation(p1.begin(), p1.end()));
  return best;
}

double relative_param_error(const DomaModel& est, const DomaModel& truth) {
  double denom = truth.beta.squaredNorm() + truth.alpha.squaredNorm();
  if (denom == 0.0) {
    throw std::domain_error("relative_param_error: all-zero truth");
  }
  return resolve_ambiguity(est, truth).sq_error / denom;
}

double test_nmse(const DomaModel& model, const Dataset& data) {
  if (data.n() < 1) throw std::invalid_argument("test_nmse: empty dataset");
  double denom = data.y.squaredNorm();
  if (denom == 0.0) throw std::domain_error("test_nmse: all-zero targets");
  Eigen::VectorXd pred = evaluate_batch(model, data.x);
  return (data.y - pred).squaredNorm() / denom;
}

double generalization_gap(const DomaModel& est, const DomaModel& truth,
                          std::int64_t mc_samples, Rng& rng) {
  require_same_dimension(est, truth);
  if (mc_samples < 1) {
    throw std::invalid_argument("generalization_gap: need mc_samples >= 1");
  }
  double acc = 0.0;
  for (std::int64_t s = 0; s < mc_samples; ++s) {
    Eigen::VectorXd x = rng.normal_vector(est.d);
    double diff = evaluate(est, x) - evaluate(truth, x);
    acc += diff * diff;
  }
  return acc / static_cast<double>(mc_samples);
}

}  // namespace doma
