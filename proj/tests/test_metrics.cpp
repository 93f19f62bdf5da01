#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "doma/metrics.hpp"
#include "doma/model.hpp"
#include "doma/optimizer.hpp"
#include "doma/rng.hpp"
#include "doma/synth.hpp"
#include "test_util.hpp"

using namespace doma;
using doma::testing::random_dataset;
using doma::testing::random_model;

TEST_CASE("resolve_ambiguity: identical models resolve to the identity") {
  Rng rng(301);
  DomaModel m = random_model(rng, 3, 2, 2);
  AmbiguityResolution res = resolve_ambiguity(m, m);
  CHECK(res.sq_error == 0.0);
  CHECK(res.shift.norm() == 0.0);
  CHECK(res.perm_beta == std::vector<int>{0, 1});
  CHECK(res.perm_alpha == std::vector<int>{0, 1});
}

TEST_CASE("resolve_ambiguity: a global all-ones shift is recovered "
          "exactly") {
  Rng rng(307);
  DomaModel truth = random_model(rng, 3, 2, 2);
  DomaModel est = truth;
  est.beta.array() += 1.0;
  est.alpha.array() += 1.0;
  AmbiguityResolution res = resolve_ambiguity(est, truth);
  CHECK(res.sq_error <= 1e-18);
  Eigen::VectorXd minus_ones = Eigen::VectorXd::Constant(4, -1.0);
  CHECK((res.shift - minus_ones).norm() <= 1e-12);
}

TEST_CASE("resolve_ambiguity: swapped beta blocks are matched by the swap "
          "permutation") {
  Rng rng(311);
  DomaModel truth = random_model(rng, 2, 2, 1);
  DomaModel est = truth;
  est.beta.row(0) = truth.beta.row(1);
  est.beta.row(1) = truth.beta.row(0);
  AmbiguityResolution res = resolve_ambiguity(est, truth);
  CHECK(res.sq_error == 0.0);
  CHECK(res.perm_beta == std::vector<int>{1, 0});
}

TEST_CASE("relative_param_error: worked single-piece example is 0.5") {
  DomaModel truth;
  truth.d = 1;
  truth.beta.resize(1, 2);
  truth.beta << 1, 0;
  truth.alpha = Eigen::MatrixXd::Zero(1, 2);
  DomaModel est = truth;
  est.beta << 2, 0;
  AmbiguityResolution res = resolve_ambiguity(est, truth);
  CHECK(res.shift[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(res.shift[1] == 0.0);
  CHECK(res.sq_error == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(relative_param_error(est, truth) ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("property: sq_error ignores global shifts and block permutations "
          "applied to the estimate") {
  Rng rng(313);
  for (int trial = 0; trial < 10; ++trial) {
    DomaModel truth = random_model(rng, 2, 3, 2);
    DomaModel est = random_model(rng, 2, 3, 2);
    double base = resolve_ambiguity(est, truth).sq_error;

    DomaModel mangled = est;
    Eigen::RowVectorXd v = rng.normal_vector(3).transpose();
    mangled.beta.rowwise() += v;
    mangled.alpha.rowwise() += v;
    mangled.beta.row(0).swap(mangled.beta.row(2));
    mangled.alpha.row(0).swap(mangled.alpha.row(1));
    double shifted = resolve_ambiguity(mangled, truth).sq_error;
    CHECK(std::abs(base - shifted) <= 1e-12 * std::max(1.0, base));
  }
}

TEST_CASE("property: closed-form shift beats a fine grid search") {
  // Brute-force oracle on d=1, k1=k2=2: enumerate both permutations and
  // every v on a 0.02 grid over [-2,2]^2. The closed form must be at least
  // as good, and better by no more than one grid cell's quadratic slack.
  Rng rng(317);
  for (int trial = 0; trial < 5; ++trial) {
    DomaModel truth = random_model(rng, 1, 2, 2);
    DomaModel est = truth;
    est.beta += 0.3 * rng.normal_matrix(2, 2);
    est.alpha += 0.3 * rng.normal_matrix(2, 2);
    double closed = resolve_ambiguity(est, truth).sq_error;

    const int perms[2][2] = {{0, 1}, {1, 0}};
    double grid_best = std::numeric_limits<double>::infinity();
    for (const auto& pb : perms) {
      for (const auto& pa : perms) {
        for (double v0 = -2.0; v0 <= 2.0; v0 += 0.02) {
          for (double v1 = -2.0; v1 <= 2.0; v1 += 0.02) {
            double sq = 0.0;
            for (int j = 0; j < 2; ++j) {
              Eigen::RowVectorXd h =
                  est.beta.row(pb[j]) - truth.beta.row(j);
              sq += (h[0] + v0) * (h[0] + v0) + (h[1] + v1) * (h[1] + v1);
            }
            for (int l = 0; l < 2; ++l) {
              Eigen::RowVectorXd q =
                  est.alpha.row(pa[l]) - truth.alpha.row(l);
              sq += (q[0] + v0) * (q[0] + v0) + (q[1] + v1) * (q[1] + v1);
            }
            grid_best = std::min(grid_best, sq);
          }
        }
      }
    }
    CHECK(closed <= grid_best + 1e-12);
    // Quadratic in v with curvature k1+k2=4: a 0.01-rounding of v* costs at
    // most 4 * (0.01*sqrt(2))^2 < 1e-3.
    CHECK(grid_best - closed <= 1e-3);
  }
}

TEST_CASE("resolve_ambiguity: shape mismatches and oversized searches are "
          "refused") {
  Rng rng(331);
  DomaModel a = random_model(rng, 2, 2, 2);
  DomaModel b = random_model(rng, 2, 3, 2);
  CHECK_THROWS_AS(resolve_ambiguity(a, b), std::invalid_argument);
  DomaModel big = random_model(rng, 2, 7, 7);
  CHECK_THROWS_AS(resolve_ambiguity(big, big), std::length_error);
}

TEST_CASE("relative_param_error: zero for identical models, refused for "
          "zero truth") {
  Rng rng(337);
  DomaModel m = random_model(rng, 3, 2, 2);
  CHECK(relative_param_error(m, m) == 0.0);
  DomaModel zero;
  zero.d = 3;
  zero.beta = Eigen::MatrixXd::Zero(2, 4);
  zero.alpha = Eigen::MatrixXd::Zero(2, 4);
  CHECK_THROWS_AS(relative_param_error(m, zero), std::domain_error);
}

TEST_CASE("test_nmse: exact model, zero model, doubled model") {
  Rng rng(347);
  DomaModel m = random_model(rng, 2, 2, 2);
  Dataset data = random_dataset(m, 100, 0.0, rng);
  CHECK(test_nmse(m, data) == 0.0);

  DomaModel zero;
  zero.d = 2;
  zero.beta = Eigen::MatrixXd::Zero(1, 3);
  zero.alpha = Eigen::MatrixXd::Zero(1, 3);
  CHECK(test_nmse(zero, data) == doctest::Approx(1.0).epsilon(1e-12));

  // Scaling every parameter by 2 scales f by 2, so each residual is -y.
  DomaModel doubled = m;
  doubled.beta *= 2.0;
  doubled.alpha *= 2.0;
  CHECK(test_nmse(doubled, data) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("test_nmse: all-zero targets are refused") {
  Rng rng(349);
  DomaModel m = random_model(rng, 2, 1, 1);
  Dataset data;
  data.x = rng.normal_matrix(10, 2);
  data.y = Eigen::VectorXd::Zero(10);
  CHECK_THROWS_AS(test_nmse(m, data), std::domain_error);
}

TEST_CASE("generalization_gap: zero for identical and globally shifted "
          "models") {
  Rng rng(353);
  DomaModel truth = random_model(rng, 3, 2, 2);
  Rng mc1(1), mc2(2);
  CHECK(generalization_gap(truth, truth, 1000, mc1) == 0.0);
  DomaModel shifted = truth;
  shifted.beta.array() += 1.0;
  shifted.alpha.array() += 1.0;
  CHECK(generalization_gap(shifted, truth, 1000, mc2) <= 1e-18);
}

TEST_CASE("generalization_gap: unit slope difference has unit expected "
          "square") {
  DomaModel truth;
  truth.d = 3;
  truth.beta = Eigen::MatrixXd::Zero(1, 4);
  truth.alpha = Eigen::MatrixXd::Zero(1, 4);
  DomaModel est = truth;
  est.beta(0, 0) = 1.0;  // f_est - f_truth = <e_1, x>
  Rng rng(359);
  double gap = generalization_gap(est, truth, 100000, rng);
  CHECK(std::abs(gap - 1.0) <= 0.01);
}

TEST_CASE("property: tiny parameter error implies tiny generalization gap") {
  GroundTruthSpec spec;
  spec.d = 3;
  spec.k1 = 2;
  spec.k2 = 2;
  Rng rng(367);
  DomaModel truth = sample_ground_truth(spec, rng);
  Dataset data = generate_dataset(truth, 300,
                                  CovariateDistribution::standard_normal(),
                                  0.0, rng);
  DomaModel init = perturbed_init(truth, 0.01 * model_kappa(truth), rng);
  FitReport report = fit(data, init, FitConfig{});
  double e = relative_param_error(report.model, truth);
  REQUIRE(e < 1e-8);
  Rng mc(373);
  CHECK(generalization_gap(report.model, truth, 20000, mc) < 1e-6);
}
