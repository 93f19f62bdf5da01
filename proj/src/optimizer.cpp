#include "doma/optimizer.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace doma {

double loss(const DomaModel& model, const Dataset& data) {
  require_same_dimension(model, data);
  Eigen::VectorXd r = data.y - evaluate_batch(model, data.x);
  return r.squaredNorm() / (2.0 * static_cast<double>(data.n()));
}

namespace {

// Shared accumulation for both block gradients:
//   (1/n) sum_{i in cell} (<xi_i, own> - other_max_i + y_sign * y_i) xi_i.
// Summation runs in ascending sample order so results are bit-reproducible.
Eigen::VectorXd block_gradient(const Eigen::VectorXd& own_values,
                               const Eigen::VectorXd& other_max,
                               const Dataset& data,
                               const std::vector<Eigen::Index>& cell,
                               double y_sign) {
  const Eigen::Index d = data.d();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d + 1);
  for (Eigen::Index i : cell) {
    double r = own_values[i] - other_max[i] + y_sign * data.y[i];
    g.head(d) += r * data.x.row(i).transpose();
    g[d] += r;
  }
  g /= static_cast<double>(data.n());
  return g;
}

}  // namespace

Eigen::VectorXd grad_beta_block(const DomaModel& model, const Dataset& data,
                                const ActivationIndex& idx, int j) {
  require_same_dimension(model, data);
  assert(static_cast<int>(idx.beta_cells.size()) == model.k1() &&
         idx.n == data.n() && j >= 0 && j < model.k1());
  Eigen::VectorXd own, amax;
  own = part_values(model.beta.row(j), data.x).col(0);
  rowwise_max(part_values(model.alpha, data.x), &amax, nullptr);
  return block_gradient(own, amax, data, idx.beta_cells[j], -1.0);
}

Eigen::VectorXd grad_alpha_block(const DomaModel& model, const Dataset& data,
                                 const ActivationIndex& idx, int l) {
  require_same_dimension(model, data);
  assert(static_cast<int>(idx.alpha_cells.size()) == model.k2() &&
         idx.n == data.n() && l >= 0 && l < model.k2());
  Eigen::VectorXd own, bmax;
  own = part_values(model.alpha.row(l), data.x).col(0);
  rowwise_max(part_values(model.beta, data.x), &bmax, nullptr);
  return block_gradient(own, bmax, data, idx.alpha_cells[l], 1.0);
}

double step_size(Eigen::Index cell_size, Eigen::Index n) {
  if (cell_size < 1) return 0.0;
  return static_cast<double>(n) / static_cast<double>(cell_size);
}

DomaModel abgd_sweep(const DomaModel& model, const Dataset& data) {
  require_same_dimension(model, data);
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();

  DomaModel next = model;

  // Step 1: update every beta block from (beta^t, alpha^t).
  {
    Eigen::MatrixXd bvals = part_values(model.beta, data.x);
    Eigen::VectorXd amax;
    rowwise_max(part_values(model.alpha, data.x), &amax, nullptr);
    std::vector<int> jarg;
    rowwise_max(bvals, nullptr, &jarg);

    std::vector<std::vector<Eigen::Index>> cells(model.k1());
    for (Eigen::Index i = 0; i < n; ++i) cells[jarg[i]].push_back(i);

    for (int j = 0; j < model.k1(); ++j) {
      if (cells[j].empty()) continue;  // step size 0: block untouched
      Eigen::VectorXd g = Eigen::VectorXd::Zero(d + 1);
      for (Eigen::Index i : cells[j]) {
        double r = bvals(i, j) - amax[i] - data.y[i];
        g.head(d) += r * data.x.row(i).transpose();
        g[d] += r;
      }
      double mu_over_n = 1.0 / static_cast<double>(cells[j].size());
      next.beta.row(j) -= mu_over_n * g.transpose();
    }
  }

  // Step 2: update every alpha block from (beta^{t+1}, alpha^t).
  {
    Eigen::MatrixXd avals = part_values(model.alpha, data.x);
    Eigen::VectorXd bmax;
    rowwise_max(part_values(next.beta, data.x), &bmax, nullptr);
    std::vector<int> larg;
    rowwise_max(avals, nullptr, &larg);

    std::vector<std::vector<Eigen::Index>> cells(model.k2());
    for (Eigen::Index i = 0; i < n; ++i) cells[larg[i]].push_back(i);

    for (int l = 0; l < model.k2(); ++l) {
      if (cells[l].empty()) continue;
      Eigen::VectorXd g = Eigen::VectorXd::Zero(d + 1);
      for (Eigen::Index i : cells[l]) {
        double r = avals(i, l) - bmax[i] + data.y[i];
        g.head(d) += r * data.x.row(i).transpose();
        g[d] += r;
      }
      double mu_over_n = 1.0 / static_cast<double>(cells[l].size());
      next.alpha.row(l) -= mu_over_n * g.transpose();
    }
  }

  return next;
}

double relative_change(const DomaModel& prev, const DomaModel& next) {
  double den_b = prev.beta.norm();
  double den_a = prev.alpha.norm();
  if (den_b == 0.0) den_b = 1.0;
  if (den_a == 0.0) den_a = 1.0;
  double db = (next.beta - prev.beta).norm() / den_b;
  double da = (next.alpha - prev.alpha).norm() / den_a;
  return std::max(db, da);
}

FitReport fit(const Dataset& data, const DomaModel& init,
              const FitConfig& config) {
  require_same_dimension(init, data);
  if (config.gamma < 0.0 || config.max_iters < 1) {
    throw std::invalid_argument("fit: gamma must be >= 0 and max_iters >= 1");
  }

  FitReport report;
  report.model = init;
  for (int t = 1; t <= config.max_iters; ++t) {
    DomaModel next = abgd_sweep(report.model, data);
    double change = relative_change(report.model, next);
    report.model = std::move(next);
    report.iterations = t;

    if (!report.model.beta.allFinite() || !report.model.alpha.allFinite()) {
      throw divergence_error("fit: iterate left the finite range at sweep " +
                                 std::to_string(t),
                             report);
    }
    if (config.record_trace) {
      double l = loss(report.model, data);
      report.change_trace.push_back(change);
      report.loss_trace.push_back(l);
      if (!std::isfinite(l)) {
        throw divergence_error(
            "fit: loss became non-finite at sweep " + std::to_string(t),
            report);
      }
    }
    if (change <= config.gamma) {
      report.converged = true;
      break;
    }
  }
  return report;
}

}  // namespace doma
