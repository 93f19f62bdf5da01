#include "doma/tropical.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace doma {

double hull_distance(const Eigen::VectorXd& p,
                     const std::vector<Eigen::VectorXd>& points, double tol) {
  const std::size_t k = points.size();
  if (k == 0) throw std::invalid_argument("hull_distance: no points");
  for (const auto& q : points) {
    if (q.size() != p.size()) {
      throw std::invalid_argument("hull_distance: dimension mismatch");
    }
  }
  if (k == 1) return (points[0] - p).norm();

  // Start from the closest vertex.
  Eigen::Index best = 0;
  double best_sq = (points[0] - p).squaredNorm();
  for (std::size_t i = 1; i < k; ++i) {
    double sq = (points[i] - p).squaredNorm();
    if (sq < best_sq) {
      best_sq = sq;
      best = static_cast<Eigen::Index>(i);
    }
  }
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  lambda[best] = 1.0;
  Eigen::VectorXd r = points[static_cast<std::size_t>(best)] - p;
  double dist = std::sqrt(best_sq);

  const int max_iters = 100000;
  for (int it = 0; it < max_iters; ++it) {
    // The distance only shrinks from here, so once the incumbent clears the
    // membership threshold with margin the decision is already settled.
    if (dist <= 0.5 * tol) break;
    // Toward atom: most negative correlation with the residual. Away atom:
    // most positive correlation among atoms carrying weight.
    Eigen::Index s = 0, v = -1;
    double s_val = std::numeric_limits<double>::infinity();
    double v_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      double c = r.dot(points[i]);
      if (c < s_val) {
        s_val = c;
        s = static_cast<Eigen::Index>(i);
      }
      if (lambda[static_cast<Eigen::Index>(i)] > 0.0 && c > v_val) {
        v_val = c;
        v = static_cast<Eigen::Index>(i);
      }
    }
    // Convexity bounds the squared-distance suboptimality by the toward-atom
    // gap, so stopping on the gap certifies the thresholded decision; stopping
    // on per-iteration improvement instead can quit inside a slow tail with
    // the distance still far from optimal.
    double gap = 2.0 * (r.dot(p) + dist * dist - s_val);
    if (gap <= 0.25 * tol * tol) break;
    Eigen::VectorXd dir = points[static_cast<std::size_t>(s)] -
                          points[static_cast<std::size_t>(v)];
    double denom = dir.squaredNorm();
    if (denom == 0.0) break;
    // Exact line search for the quadratic; gamma = 0 means the support is
    // already optimal.
    double gamma = -r.dot(dir) / denom;
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, lambda[v]);
    lambda[v] -= gamma;
    lambda[s] += gamma;

    // Recompute the residual from the weights to keep rounding from
    // accumulating across iterations.
    r = -p;
    for (std::size_t i = 0; i < k; ++i) {
      if (lambda[static_cast<Eigen::Index>(i)] > 0.0) {
        r += lambda[static_cast<Eigen::Index>(i)] * points[i];
      }
    }
    double next = r.norm();
    // A capped exact line-search step strictly decreases the distance in
    // exact arithmetic, so a non-improving step marks the floating-point
    // floor.
    if (next >= dist) break;
    dist = next;
  }
  return dist;
}

bool hull_membership(const Eigen::VectorXd& p,
                     const std::vector<Eigen::VectorXd>& points, double tol) {
  return hull_distance(p, points, tol) <= tol;
}

std::vector<int> inactive_indices(const std::vector<Eigen::VectorXd>& params,
                                  double tol) {
  const int m = static_cast<int>(params.size());
  if (m == 0) throw std::invalid_argument("inactive_indices: no parameters");
  std::vector<bool> alive(static_cast<std::size_t>(m), true);
  std::vector<int> removed;
  for (int j = 0; j < m; ++j) {
    std::vector<Eigen::VectorXd> others;
    others.reserve(static_cast<std::size_t>(m) - 1);
    for (int i = 0; i < m; ++i) {
      if (i != j && alive[static_cast<std::size_t>(i)]) {
        others.push_back(params[static_cast<std::size_t>(i)]);
      }
    }
    if (others.empty()) continue;
    if (hull_membership(params[static_cast<std::size_t>(j)], others, tol)) {
      alive[static_cast<std::size_t>(j)] = false;
      removed.push_back(j);
    }
  }
  return removed;
}

namespace {

std::vector<Eigen::VectorXd> part_rows(const Eigen::MatrixXd& part) {
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(static_cast<std::size_t>(part.rows()));
  for (Eigen::Index j = 0; j < part.rows(); ++j) {
    rows.push_back(part.row(j).transpose());
  }
  return rows;
}

Eigen::MatrixXd drop_rows(const Eigen::MatrixXd& part,
                          const std::vector<int>& removed) {
  Eigen::MatrixXd kept(part.rows() - static_cast<Eigen::Index>(removed.size()),
                       part.cols());
  Eigen::Index out = 0;
  std::size_t next = 0;
  for (Eigen::Index j = 0; j < part.rows(); ++j) {
    if (next < removed.size() && removed[next] == static_cast<int>(j)) {
      ++next;
      continue;
    }
    kept.row(out++) = part.row(j);
  }
  return kept;
}

}  // namespace

CompressionReport compress(const DomaModel& model, double tol) {
  CompressionReport report;
  report.removed_beta = inactive_indices(part_rows(model.beta), tol);
  report.removed_alpha = inactive_indices(part_rows(model.alpha), tol);
  report.model.d = model.d;
  report.model.beta = drop_rows(model.beta, report.removed_beta);
  report.model.alpha = drop_rows(model.alpha, report.removed_alpha);
  return report;
}

bool equivalent_on_samples(const DomaModel& a, const DomaModel& b,
                           const std::vector<Eigen::VectorXd>& xs,
                           double tol) {
  require_same_dimension(a, b);
  for (const auto& x : xs) {
    if (std::abs(evaluate(a, x) - evaluate(b, x)) > tol) return false;
  }
  return true;
}

}  // namespace doma
