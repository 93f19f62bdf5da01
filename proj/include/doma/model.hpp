#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace doma {

// Piecewise-linear model represented as the difference of two max-affine
// parts,
//
//   f(x) = max_j <beta_j, [x;1]> - max_l <alpha_l, [x;1]>.
//
// Each row of `beta` / `alpha` is one affine piece: the first d entries are
// the slope, the last entry the intercept. The augmented vector [x;1] is
// formed on the fly in every dot product and never stored.
struct DomaModel {
  int d = 0;
  Eigen::MatrixXd beta;   // k1 x (d+1)
  Eigen::MatrixXd alpha;  // k2 x (d+1)

  int k1() const { return static_cast<int>(beta.rows()); }
  int k2() const { return static_cast<int>(alpha.rows()); }
};

struct Dataset {
  Eigen::MatrixXd x;  // n x d
  Eigen::VectorXd y;  // n

  Eigen::Index n() const { return x.rows(); }
  int d() const { return static_cast<int>(x.cols()); }
};

// Which samples activate which affine piece. Cells within a part are pairwise
// disjoint and cover [n]; ties on a cell boundary go to the lowest index.
struct ActivationIndex {
  std::vector<std::vector<Eigen::Index>> beta_cells;   // size k1
  std::vector<std::vector<Eigen::Index>> alpha_cells;  // size k2
  Eigen::Index n = 0;
};

// Values of every affine piece of one part at every sample: row i holds
// <params_j, [x_i;1]> for all j. params is k x (d+1), x is n x d.
Eigen::MatrixXd part_values(const Eigen::MatrixXd& params,
                            const Eigen::MatrixXd& x);

// Row-wise max and argmax with lowest-index tie-breaking.
void rowwise_max(const Eigen::MatrixXd& values, Eigen::VectorXd* max_out,
                 std::vector<int>* argmax_out);

double evaluate(const DomaModel& model, const Eigen::VectorXd& x);

Eigen::VectorXd evaluate_batch(const DomaModel& model,
                               const Eigen::MatrixXd& x);

// Indices of the maximizing piece in each part (lowest index on ties).
std::pair<int, int> argmax_pair(const DomaModel& model,
                                const Eigen::VectorXd& x);

ActivationIndex activation_index(const DomaModel& model, const Dataset& data);

// Shape and finiteness diagnostics; returns an empty list when well formed.
std::vector<std::string> validate(const DomaModel& model);

// Throws std::invalid_argument unless data and model dimensions agree.
void require_same_dimension(const DomaModel& model, const Dataset& data);

// Throws std::invalid_argument unless both models share one input dimension.
void require_same_dimension(const DomaModel& a, const DomaModel& b);

}  // namespace doma
