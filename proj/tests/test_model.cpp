#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "doma/model.hpp"
#include "doma/rng.hpp"
#include "test_util.hpp"

using namespace doma;
using doma::testing::abs_model;
using doma::testing::random_model;

TEST_CASE("evaluate: identical parts cancel to zero everywhere") {
  Rng rng(11);
  DomaModel m = random_model(rng, 3, 2, 2);
  m.alpha = m.beta;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x = rng.normal_vector(3);
    CHECK(evaluate(m, x) == 0.0);
  }
}

TEST_CASE("evaluate: absolute value at x = 2") {
  DomaModel m = abs_model();
  Eigen::VectorXd x(1);
  x << 2.0;
  CHECK(evaluate(m, x) == doctest::Approx(2.0).epsilon(1e-15));
  x << -3.5;
  CHECK(evaluate(m, x) == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("evaluate: worked 1-d example with two pieces per part") {
  // beta = {(2,1), (-1,0)}, alpha = {(0.5,0), (0,-1)}, x = 1:
  // max(3,-1) - max(0.5,-1) = 2.5.
  DomaModel m;
  m.d = 1;
  m.beta.resize(2, 2);
  m.beta << 2, 1, -1, 0;
  m.alpha.resize(2, 2);
  m.alpha << 0.5, 0, 0, -1;
  Eigen::VectorXd x(1);
  x << 1.0;
  CHECK(evaluate(m, x) == 2.5);
}

TEST_CASE("argmax_pair: interior point and lowest-index tie-break") {
  DomaModel m = abs_model();
  Eigen::VectorXd x(1);
  x << 2.0;
  auto [j, l] = argmax_pair(m, x);
  CHECK(j == 0);
  CHECK(l == 0);
  // At x = 0 both beta pieces tie at 0; the lower index wins.
  x << 0.0;
  auto [jt, lt] = argmax_pair(m, x);
  CHECK(jt == 0);
  CHECK(lt == 0);
}

TEST_CASE("argmax_pair: worked example selects (0, 0)") {
  DomaModel m;
  m.d = 1;
  m.beta.resize(2, 2);
  m.beta << 2, 1, -1, 0;
  m.alpha.resize(2, 2);
  m.alpha << 0.5, 0, 0, -1;
  Eigen::VectorXd x(1);
  x << 1.0;
  auto [j, l] = argmax_pair(m, x);
  CHECK(j == 0);
  CHECK(l == 0);
}

TEST_CASE("activation_index: two samples split the two beta cells") {
  DomaModel m;
  m.d = 1;
  m.beta.resize(2, 2);
  m.beta << 1, 0, -1, 0;
  m.alpha = Eigen::MatrixXd::Zero(1, 2);
  Dataset data;
  data.x.resize(2, 1);
  data.x << -1, 1;
  data.y.resize(2);
  data.y << 1, 1;
  ActivationIndex idx = activation_index(m, data);
  REQUIRE(idx.beta_cells.size() == 2);
  REQUIRE(idx.alpha_cells.size() == 1);
  // x = -1 activates the slope -1 piece (index 1), x = +1 the slope +1 piece.
  REQUIRE(idx.beta_cells[0].size() == 1);
  CHECK(idx.beta_cells[0][0] == 1);
  REQUIRE(idx.beta_cells[1].size() == 1);
  CHECK(idx.beta_cells[1][0] == 0);
  CHECK(idx.alpha_cells[0].size() == 2);
  CHECK(idx.n == 2);
}

TEST_CASE("activation_index: equal pieces put every sample in cell 0") {
  DomaModel m;
  m.d = 2;
  m.beta = Eigen::MatrixXd::Zero(3, 3);
  m.alpha = Eigen::MatrixXd::Zero(2, 3);
  Rng rng(5);
  Dataset data;
  data.x = rng.normal_matrix(7, 2);
  data.y = Eigen::VectorXd::Zero(7);
  ActivationIndex idx = activation_index(m, data);
  CHECK(idx.beta_cells[0].size() == 7);
  CHECK(idx.beta_cells[1].empty());
  CHECK(idx.beta_cells[2].empty());
  CHECK(idx.alpha_cells[0].size() == 7);
}

TEST_CASE("activation_index: cells partition the samples and agree with "
          "argmax_pair") {
  Rng rng(29);
  DomaModel m = random_model(rng, 2, 3, 2);
  Dataset data;
  data.x = rng.normal_matrix(100, 2);
  data.y = Eigen::VectorXd::Zero(100);
  ActivationIndex idx = activation_index(m, data);

  std::vector<int> beta_owner(100, -1);
  std::vector<int> alpha_owner(100, -1);
  for (int j = 0; j < m.k1(); ++j) {
    for (Eigen::Index i : idx.beta_cells[j]) {
      CHECK(beta_owner[i] == -1);
      beta_owner[i] = j;
    }
  }
  for (int l = 0; l < m.k2(); ++l) {
    for (Eigen::Index i : idx.alpha_cells[l]) {
      CHECK(alpha_owner[i] == -1);
      alpha_owner[i] = l;
    }
  }
  for (int i = 0; i < 100; ++i) {
    auto [j, l] = argmax_pair(m, data.x.row(i).transpose());
    CHECK(beta_owner[i] == j);
    CHECK(alpha_owner[i] == l);
  }
}

TEST_CASE("validate: well-formed model produces no diagnostics") {
  Rng rng(3);
  DomaModel m = random_model(rng, 4, 2, 3);
  CHECK(validate(m).empty());
}

TEST_CASE("validate: wrong row length is reported") {
  DomaModel m;
  m.d = 3;
  m.beta = Eigen::MatrixXd::Zero(2, 3);  // should be d+1 = 4 columns
  m.alpha = Eigen::MatrixXd::Zero(1, 4);
  auto problems = validate(m);
  REQUIRE(!problems.empty());
  bool mentions_length = false;
  for (const auto& p : problems)
    if (p.find("length") != std::string::npos) mentions_length = true;
  CHECK(mentions_length);
}

TEST_CASE("validate: non-finite entry is reported") {
  DomaModel m = abs_model();
  m.alpha(0, 1) = std::numeric_limits<double>::quiet_NaN();
  auto problems = validate(m);
  REQUIRE(!problems.empty());
  bool mentions_finite = false;
  for (const auto& p : problems)
    if (p.find("finite") != std::string::npos) mentions_finite = true;
  CHECK(mentions_finite);
}

TEST_CASE("property: adding one affine row to both parts' intercepts shifts "
          "nothing") {
  // Adding the same constant c to every beta intercept and every alpha
  // intercept leaves f unchanged: both maxima shift by c.
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    DomaModel m = random_model(rng, 3, 2, 2);
    DomaModel shifted = m;
    double c = rng.normal();
    shifted.beta.col(3).array() += c;
    shifted.alpha.col(3).array() += c;
    Eigen::VectorXd x = rng.normal_vector(3);
    double a = evaluate(m, x);
    double b = evaluate(shifted, x);
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("property: permuting rows within a part never changes the value") {
  Rng rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    DomaModel m = random_model(rng, 2, 3, 3);
    DomaModel p = m;
    p.beta.row(0) = m.beta.row(2);
    p.beta.row(2) = m.beta.row(0);
    p.alpha.row(1) = m.alpha.row(2);
    p.alpha.row(2) = m.alpha.row(1);
    Eigen::VectorXd x = rng.normal_vector(2);
    CHECK(evaluate(m, x) == evaluate(p, x));
  }
}

TEST_CASE("property: f is linear on the segment between two same-cell "
          "points") {
  Rng rng(303);
  int checked = 0;
  while (checked < 20) {
    DomaModel m = random_model(rng, 2, 3, 2);
    Eigen::VectorXd a = rng.normal_vector(2);
    Eigen::VectorXd b = a + 0.01 * rng.normal_vector(2);
    Eigen::VectorXd mid = 0.5 * (a + b);
    // Only meaningful when all three points share both cells.
    if (argmax_pair(m, a) != argmax_pair(m, b)) continue;
    if (argmax_pair(m, a) != argmax_pair(m, mid)) continue;
    double expect = 0.5 * (evaluate(m, a) + evaluate(m, b));
    CHECK(evaluate(m, mid) ==
          doctest::Approx(expect).epsilon(1e-9).scale(1.0));
    ++checked;
  }
}

TEST_CASE("dimension mismatch between model and data throws") {
  DomaModel m = abs_model();
  Dataset data;
  data.x = Eigen::MatrixXd::Zero(3, 2);
  data.y = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(require_same_dimension(m, data), std::invalid_argument);
  Eigen::VectorXd x2(2);
  x2 << 1, 2;
  CHECK_THROWS_AS(evaluate(m, x2), std::invalid_argument);
}

TEST_CASE("model dimension mismatch between two models throws") {
  Rng rng(7);
  DomaModel a = random_model(rng, 2, 1, 1);
  DomaModel b = random_model(rng, 3, 1, 1);
  CHECK_THROWS_AS(require_same_dimension(a, b), std::invalid_argument);
  CHECK_NOTHROW(require_same_dimension(a, a));
}

TEST_CASE("evaluate_batch matches evaluate row by row") {
  Rng rng(404);
  DomaModel m = random_model(rng, 4, 3, 2);
  Eigen::MatrixXd x = rng.normal_matrix(50, 4);
  Eigen::VectorXd batch = evaluate_batch(m, x);
  for (int i = 0; i < 50; ++i)
    CHECK(batch[i] == evaluate(m, x.row(i).transpose()));
}
