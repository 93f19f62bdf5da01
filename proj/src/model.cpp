#include "doma/model.hpp"

#include <cmath>
#include <stdexcept>

namespace doma {

Eigen::MatrixXd part_values(const Eigen::MatrixXd& params,
                            const Eigen::MatrixXd& x) {
  const Eigen::Index d = x.cols();
  // x * slopes^T, then broadcast the intercept column.
  Eigen::MatrixXd v = x * params.leftCols(d).transpose();
  v.rowwise() += params.col(d).transpose();
  return v;
}

void rowwise_max(const Eigen::MatrixXd& values, Eigen::VectorXd* max_out,
                 std::vector<int>* argmax_out) {
  const Eigen::Index n = values.rows();
  const Eigen::Index k = values.cols();
  if (max_out) max_out->resize(n);
  if (argmax_out) argmax_out->assign(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = values(i, 0);
    int best_j = 0;
    for (Eigen::Index j = 1; j < k; ++j) {
      if (values(i, j) > best) {  // strict: ties keep the lowest index
        best = values(i, j);
        best_j = static_cast<int>(j);
      }
    }
    if (max_out) (*max_out)[i] = best;
    if (argmax_out) (*argmax_out)[i] = best_j;
  }
}

namespace {

void require_point_dimension(const DomaModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.d) {
    throw std::invalid_argument("evaluate: point has dimension " +
                                std::to_string(x.size()) + ", model expects " +
                                std::to_string(model.d));
  }
}

// Max of <params_j, [x;1]> over rows, returning the lowest maximizing index.
double max_over_part(const Eigen::MatrixXd& params, const Eigen::VectorXd& x,
                     int* argmax) {
  const Eigen::Index d = x.size();
  double best = params.row(0).head(d).dot(x) + params(0, d);
  int best_j = 0;
  for (Eigen::Index j = 1; j < params.rows(); ++j) {
    double v = params.row(j).head(d).dot(x) + params(j, d);
    if (v > best) {
      best = v;
      best_j = static_cast<int>(j);
    }
  }
  if (argmax) *argmax = best_j;
  return best;
}

}  // namespace

double evaluate(const DomaModel& model, const Eigen::VectorXd& x) {
  require_point_dimension(model, x);
  return max_over_part(model.beta, x, nullptr) -
         max_over_part(model.alpha, x, nullptr);
}

Eigen::VectorXd evaluate_batch(const DomaModel& model,
                               const Eigen::MatrixXd& x) {
  if (x.cols() != model.d) {
    throw std::invalid_argument("evaluate_batch: dimension mismatch");
  }
  Eigen::VectorXd bmax, amax;
  rowwise_max(part_values(model.beta, x), &bmax, nullptr);
  rowwise_max(part_values(model.alpha, x), &amax, nullptr);
  return bmax - amax;
}

std::pair<int, int> argmax_pair(const DomaModel& model,
                                const Eigen::VectorXd& x) {
  require_point_dimension(model, x);
  int j = 0, l = 0;
  max_over_part(model.beta, x, &j);
  max_over_part(model.alpha, x, &l);
  return {j, l};
}

ActivationIndex activation_index(const DomaModel& model, const Dataset& data) {
  require_same_dimension(model, data);
  ActivationIndex idx;
  idx.n = data.n();
  idx.beta_cells.resize(model.k1());
  idx.alpha_cells.resize(model.k2());

  std::vector<int> jarg, larg;
  rowwise_max(part_values(model.beta, data.x), nullptr, &jarg);
  rowwise_max(part_values(model.alpha, data.x), nullptr, &larg);
  for (Eigen::Index i = 0; i < idx.n; ++i) {
    idx.beta_cells[jarg[i]].push_back(i);
    idx.alpha_cells[larg[i]].push_back(i);
  }
  return idx;
}

std::vector<std::string> validate(const DomaModel& model) {
  std::vector<std::string> errors;
  if (model.d < 1) errors.push_back("dimension d must be positive");
  if (model.beta.rows() < 1) errors.push_back("k1 must be at least 1");
  if (model.alpha.rows() < 1) errors.push_back("k2 must be at least 1");
  if (model.beta.rows() >= 1 && model.beta.cols() != model.d + 1)
    errors.push_back("wrong parameter length in beta: expected d+1 columns");
  if (model.alpha.rows() >= 1 && model.alpha.cols() != model.d + 1)
    errors.push_back("wrong parameter length in alpha: expected d+1 columns");
  if (!model.beta.allFinite()) errors.push_back("non-finite entry in beta");
  if (!model.alpha.allFinite()) errors.push_back("non-finite entry in alpha");
  return errors;
}

void require_same_dimension(const DomaModel& a, const DomaModel& b) {
  if (a.d != b.d) {
    throw std::invalid_argument("models have dimensions " +
                                std::to_string(a.d) + " and " +
                                std::to_string(b.d));
  }
}

void require_same_dimension(const DomaModel& model, const Dataset& data) {
  if (data.d() != model.d) {
    throw std::invalid_argument("dataset dimension " +
                                std::to_string(data.d()) +
                                " does not match model dimension " +
                                std::to_string(model.d));
  }
  if (data.x.rows() != data.y.size()) {
    throw std::invalid_argument("dataset has " +
                                std::to_string(data.x.rows()) +
                                " covariate rows but " +
                                std::to_string(data.y.size()) + " targets");
  }
}

}  // namespace doma
