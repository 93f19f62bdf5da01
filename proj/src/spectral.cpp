#include "doma/spectral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "doma/optimizer.hpp"

namespace doma {

MomentEstimates estimate_moments(const Dataset& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  if (n < 1) throw std::invalid_argument("estimate_moments: empty dataset");

  MomentEstimates out;
  out.m1 = data.x.transpose() * data.y / static_cast<double>(n);
  out.m2 = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.m2 += data.y[i] * (data.x.row(i).transpose() * data.x.row(i));
  }
  out.m2 /= static_cast<double>(n);
  out.m2.diagonal().array() -= data.y.mean();
  out.m = out.m1 * out.m1.transpose() + out.m2;
  return out;
}

SubspaceBasis subspace(const MomentEstimates& moments, int r) {
  const Eigen::Index d = moments.m.rows();
  if (r < 1 || r > d) {
    throw std::invalid_argument("subspace: r must satisfy 1 <= r <= d");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(moments.m, Eigen::ComputeThinU);
  return SubspaceBasis{svd.matrixU().leftCols(r)};
}

DomaModel sample_candidate(const SubspaceBasis& basis, int k1, int k2,
                           double scale, Rng& rng) {
  const Eigen::Index d = basis.v.rows();
  const Eigen::Index r = basis.v.cols();
  if (r < 1) throw std::invalid_argument("sample_candidate: empty basis");

  DomaModel model;
  model.d = static_cast<int>(d);
  model.beta.resize(k1, d + 1);
  model.alpha.resize(k2, d + 1);
  auto draw_block = [&]() {
    Eigen::RowVectorXd row(d + 1);
    Eigen::VectorXd c = rng.normal_vector(r);
    row.head(d) = (scale * (basis.v * c)).transpose();
    row[d] = scale * rng.normal();
    return row;
  };
  for (int j = 0; j < k1; ++j) model.beta.row(j) = draw_block();
  for (int l = 0; l < k2; ++l) model.alpha.row(l) = draw_block();
  return model;
}

DomaModel initialize(const Dataset& data, int k1, int k2,
                     const InitConfig& config) {
  if (k1 < 1 || k2 < 1) {
    throw std::invalid_argument("initialize: k1 and k2 must be >= 1");
  }
  if (data.n() < data.d()) {
    throw std::invalid_argument(
        "initialize: need at least d samples for moment estimation");
  }
  if (config.t_candidates < 1 || config.refine_sweeps < 0) {
    throw std::invalid_argument("initialize: bad candidate configuration");
  }

  MomentEstimates moments = estimate_moments(data);
  int r = std::min(k1 + k2 - 1, static_cast<int>(data.d()));
  SubspaceBasis basis = subspace(moments, r);

  double scale;
  if (config.scale) {
    scale = *config.scale;
  } else {
    // auto scale: sample standard deviation of the targets
    double mean = data.y.mean();
    double ss = (data.y.array() - mean).square().sum();
    scale = data.n() > 1
                ? std::sqrt(ss / static_cast<double>(data.n() - 1))
                : 0.0;
  }

  DomaModel best;
  double best_loss = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int t = 0; t < config.t_candidates; ++t) {
    // Each trial owns a stream derived from (seed, t): results do not depend
    // on evaluation order, and a shorter candidate list is a prefix of a
    // longer one under the same seed.
    Rng trial_rng(mix_seed(config.seed, static_cast<std::uint64_t>(t)));
    DomaModel cand = sample_candidate(basis, k1, k2, scale, trial_rng);
    bool ok = true;
    for (int s = 0; s < config.refine_sweeps; ++s) {
      cand = abgd_sweep(cand, data);
      if (!cand.beta.allFinite() || !cand.alpha.allFinite()) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    double l = loss(cand, data);
    if (!std::isfinite(l)) continue;
    if (l < best_loss) {
      best_loss = l;
      best = std::move(cand);
      found = true;
    }
  }
  if (!found) {
    throw init_failure("initialize: all candidates diverged");
  }
  return best;
}

namespace {

int numerical_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  double cutoff = 1e-8 * sv[0];
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff && sv[i] > 0.0) ++rank;
  }
  return rank;
}

}  // namespace

int pairwise_difference_rank(const DomaModel& model) {
  const int k1 = model.k1(), k2 = model.k2();
  Eigen::MatrixXd diffs(model.d + 1, k1 * k2);
  int col = 0;
  for (int j = 0; j < k1; ++j) {
    for (int l = 0; l < k2; ++l) {
      diffs.col(col++) = (model.beta.row(j) - model.alpha.row(l)).transpose();
    }
  }
  return numerical_rank(diffs);
}

int shifted_stack_rank(const DomaModel& model, int shift_index) {
  const int k1 = model.k1(), k2 = model.k2();
  if (shift_index < 0 || shift_index >= k1 + k2) {
    throw std::invalid_argument("shifted_stack_rank: index out of range");
  }
  Eigen::RowVectorXd v = shift_index < k1
                             ? model.beta.row(shift_index)
                             : model.alpha.row(shift_index - k1);
  Eigen::MatrixXd stacked(model.d + 1, k1 + k2);
  for (int j = 0; j < k1; ++j)
    stacked.col(j) = (model.beta.row(j) - v).transpose();
  for (int l = 0; l < k2; ++l)
    stacked.col(k1 + l) = (model.alpha.row(l) - v).transpose();
  return numerical_rank(stacked);
}

Eigen::VectorXd population_m1_oracle(const DomaModel& model,
                                     std::int64_t mc_samples, Rng& rng) {
  if (mc_samples < 1) {
    throw std::invalid_argument("population_m1_oracle: need mc_samples >= 1");
  }
  const int d = model.d;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (std::int64_t s = 0; s < mc_samples; ++s) {
    Eigen::VectorXd x = rng.normal_vector(d);
    auto [j, l] = argmax_pair(model, x);
    acc += (model.beta.row(j).head(d) - model.alpha.row(l).head(d)).transpose();
  }
  return acc / static_cast<double>(mc_samples);
}

}  // namespace doma
