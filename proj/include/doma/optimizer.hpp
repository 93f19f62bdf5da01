#pragma once

#include <stdexcept>
#include <vector>

#include "doma/model.hpp"

namespace doma {

struct FitConfig {
  double gamma = 1e-10;   // relative-change stop threshold
  int max_iters = 2000;   // hard sweep cap
  bool record_trace = false;
};

struct FitReport {
  DomaModel model;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_trace;    // per sweep, when recorded
  std::vector<double> change_trace;  // max relative block change per sweep
};

// Thrown when the iterate leaves the finite range; carries whatever part of
// the run completed.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, FitReport partial)
      : std::runtime_error(what), partial_report(std::move(partial)) {}
  FitReport partial_report;
};

// Mean squared error loss, (1/2n) sum_i (y_i - f(x_i))^2.
double loss(const DomaModel& model, const Dataset& data);

// Generalized gradient of the loss with respect to one beta block:
// (1/n) sum_{i in cell j} (<xi_i, beta_j> - max_l <xi_i, alpha_l> - y_i) xi_i.
// The zero vector when the cell is empty.
Eigen::VectorXd grad_beta_block(const DomaModel& model, const Dataset& data,
                                const ActivationIndex& idx, int j);

// Mirror image for an alpha block, with residual
// (<xi_i, alpha_l> - max_j <xi_i, beta_j> + y_i).
Eigen::VectorXd grad_alpha_block(const DomaModel& model, const Dataset& data,
                                 const ActivationIndex& idx, int l);

// Adaptive step n/|cell|, or 0 for an empty cell.
double step_size(Eigen::Index cell_size, Eigen::Index n);

// One full iteration: all beta blocks updated simultaneously from
// (beta^t, alpha^t), then all alpha blocks from (beta^{t+1}, alpha^t).
// Blocks with empty cells are left bitwise unchanged.
DomaModel abgd_sweep(const DomaModel& model, const Dataset& data);

// Stop-criterion quantity: max over parts of ||part^{t+1}-part^t|| /
// ||part^t||, with zero denominators replaced by 1.
double relative_change(const DomaModel& prev, const DomaModel& next);

// Repeats abgd_sweep until relative_change <= gamma or max_iters.
FitReport fit(const Dataset& data, const DomaModel& init,
              const FitConfig& config);

}  // namespace doma
