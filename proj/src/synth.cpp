#include "doma/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "doma/metrics.hpp"

namespace doma {

namespace {

constexpr int kProbeSamples = 10000;
constexpr int kMaxRejections = 1000;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

CovariateDistribution CovariateDistribution::standard_normal() {
  return CovariateDistribution{};
}

CovariateDistribution CovariateDistribution::uniform_cube(double half_width) {
  if (!(half_width > 0.0)) {
    throw std::invalid_argument("uniform_cube: half_width must be positive");
  }
  CovariateDistribution dist;
  dist.kind = Kind::uniform_cube;
  dist.half_width = half_width;
  return dist;
}

CovariateDistribution CovariateDistribution::gaussian_mixture(
    Eigen::MatrixXd centers, Eigen::VectorXd weights) {
  if (centers.rows() < 1 || centers.rows() != weights.size()) {
    throw std::invalid_argument(
        "gaussian_mixture: need one weight per center");
  }
  if (weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "gaussian_mixture: weights must be non-negative and sum to 1");
  }
  CovariateDistribution dist;
  dist.kind = Kind::gaussian_mixture;
  dist.centers = std::move(centers);
  dist.weights = std::move(weights);
  return dist;
}

std::string init_kind_name(InitKind kind) {
  return kind == InitKind::oracle_perturbation ? "oracle_perturbation"
                                               : "spectral";
}

InitKind parse_init_kind(const std::string& name) {
  if (name == "oracle_perturbation") return InitKind::oracle_perturbation;
  if (name == "spectral") return InitKind::spectral;
  throw std::invalid_argument("unknown init kind: " + name);
}

namespace {

Eigen::MatrixXd sample_covariates(const CovariateDistribution& dist, int n,
                                  int d, Rng& rng) {
  Eigen::MatrixXd x(n, d);
  switch (dist.kind) {
    case CovariateDistribution::Kind::standard_normal:
      for (int i = 0; i < n; ++i) x.row(i) = rng.normal_vector(d).transpose();
      break;
    case CovariateDistribution::Kind::uniform_cube: {
      // Uniform on [-a, a] has variance a^2/3; the sqrt(3)/a factor restores
      // unit per-coordinate variance.
      const double s = std::sqrt(3.0);
      for (int i = 0; i < n; ++i) {
        for (int c = 0; c < d; ++c) {
          x(i, c) = s * (2.0 * rng.uniform01() - 1.0);
        }
      }
      break;
    }
    case CovariateDistribution::Kind::gaussian_mixture: {
      if (dist.centers.cols() != d) {
        throw std::invalid_argument(
            "sample_covariates: mixture centers have wrong dimension");
      }
      Eigen::VectorXd mean = dist.centers.transpose() * dist.weights;
      double var_sum = static_cast<double>(d);
      for (Eigen::Index m = 0; m < dist.centers.rows(); ++m) {
        var_sum += dist.weights[m] * dist.centers.row(m).squaredNorm();
      }
      var_sum -= mean.squaredNorm();
      const double s = std::sqrt(var_sum / static_cast<double>(d));
      for (int i = 0; i < n; ++i) {
        double u = rng.uniform01();
        Eigen::Index comp = dist.centers.rows() - 1;
        double acc = 0.0;
        for (Eigen::Index m = 0; m < dist.centers.rows(); ++m) {
          acc += dist.weights[m];
          if (u < acc) {
            comp = m;
            break;
          }
        }
        Eigen::VectorXd raw =
            dist.centers.row(comp).transpose() + rng.normal_vector(d);
        x.row(i) = ((raw - mean) / s).transpose();
      }
      break;
    }
  }
  return x;
}

double min_pairwise_slope_distance(const Eigen::MatrixXd& part, int d) {
  double best = kInf;
  for (Eigen::Index j = 0; j + 1 < part.rows(); ++j) {
    for (Eigen::Index j2 = j + 1; j2 < part.rows(); ++j2) {
      best = std::min(best, (part.row(j) - part.row(j2)).head(d).norm());
    }
  }
  return best;
}

}  // namespace

DomaModel sample_ground_truth(const GroundTruthSpec& spec, Rng& rng) {
  if (spec.d < 1 || spec.k1 < 1 || spec.k2 < 1) {
    throw std::invalid_argument("sample_ground_truth: bad dimensions");
  }
  if (spec.kappa_min < 0.0 || !(spec.param_scale > 0.0)) {
    throw std::invalid_argument("sample_ground_truth: bad scale parameters");
  }
  const int k = std::max(spec.k1, spec.k2);
  const double prob_floor = 1.0 / (4.0 * k);

  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    DomaModel model;
    model.d = spec.d;
    model.beta = spec.param_scale * rng.normal_matrix(spec.k1, spec.d + 1);
    model.alpha = spec.param_scale * rng.normal_matrix(spec.k2, spec.d + 1);

    if (min_pairwise_slope_distance(model.beta, spec.d) < spec.kappa_min ||
        min_pairwise_slope_distance(model.alpha, spec.d) < spec.kappa_min) {
      continue;
    }

    std::vector<int> beta_hits(static_cast<std::size_t>(spec.k1), 0);
    std::vector<int> alpha_hits(static_cast<std::size_t>(spec.k2), 0);
    for (int s = 0; s < kProbeSamples; ++s) {
      Eigen::VectorXd x = rng.normal_vector(spec.d);
      auto [j, l] = argmax_pair(model, x);
      ++beta_hits[static_cast<std::size_t>(j)];
      ++alpha_hits[static_cast<std::size_t>(l)];
    }
    auto occupied = [&](const std::vector<int>& hits) {
      for (int h : hits) {
        if (static_cast<double>(h) / kProbeSamples < prob_floor) return false;
      }
      return true;
    };
    if (occupied(beta_hits) && occupied(alpha_hits)) return model;
  }
  throw infeasible_spec(
      "sample_ground_truth: no acceptable model in 1000 attempts (separation "
      "or cell-probability requirement too strict for this scale)");
}

Dataset generate_dataset(const DomaModel& model, int n,
                         const CovariateDistribution& dist, double sigma_z,
                         Rng& rng) {
  if (n < 1) throw std::invalid_argument("generate_dataset: need n >= 1");
  if (sigma_z < 0.0) {
    throw std::invalid_argument("generate_dataset: sigma_z must be >= 0");
  }
  Dataset data;
  data.x = sample_covariates(dist, n, model.d, rng);
  data.y = evaluate_batch(model, data.x);
  for (int i = 0; i < n; ++i) {
    data.y[i] += sigma_z * rng.normal();
  }
  return data;
}

namespace {

void perturb_part(Eigen::MatrixXd& part, double radius, Rng& rng) {
  Eigen::VectorXd g = rng.normal_vector(part.size());
  double norm = g.norm();
  if (norm == 0.0) {
    g[0] = 1.0;
    norm = 1.0;
  }
  const Eigen::Index cols = part.cols();
  for (Eigen::Index j = 0; j < part.rows(); ++j) {
    part.row(j) += (radius / norm) * g.segment(j * cols, cols).transpose();
  }
}

}  // namespace

DomaModel perturbed_init(const DomaModel& truth, double radius, Rng& rng) {
  if (radius < 0.0) {
    throw std::invalid_argument("perturbed_init: radius must be >= 0");
  }
  DomaModel out = truth;
  perturb_part(out.beta, radius, rng);
  perturb_part(out.alpha, radius, rng);
  return out;
}

double model_kappa(const DomaModel& model) {
  return std::min(min_pairwise_slope_distance(model.beta, model.d),
                  min_pairwise_slope_distance(model.alpha, model.d));
}

double measure_intersection_r(const DomaModel& model, int probes, Rng& rng) {
  if (probes < 1) {
    throw std::invalid_argument("measure_intersection_r: need probes >= 1");
  }
  const int k1 = model.k1(), k2 = model.k2();
  Eigen::MatrixXi joint = Eigen::MatrixXi::Zero(k1, k2);
  for (int s = 0; s < probes; ++s) {
    Eigen::VectorXd x = rng.normal_vector(model.d);
    auto [j, l] = argmax_pair(model, x);
    ++joint(j, l);
  }
  Eigen::VectorXi beta_counts = joint.rowwise().sum();
  Eigen::VectorXi alpha_counts = joint.colwise().sum().transpose();

  double r = kInf;
  for (int j = 0; j < k1; ++j) {
    for (int l = 0; l < k2; ++l) {
      const double pjl = static_cast<double>(joint(j, l)) / probes;
      if (pjl == 0.0) continue;
      if (k1 > 1) {
        const double pj = static_cast<double>(beta_counts[j]) / probes;
        r = std::min(r, std::log(pj / pjl) / std::log(double(k1)));
      }
      if (k2 > 1) {
        const double pl = static_cast<double>(alpha_counts[l]) / probes;
        r = std::min(r, std::log(pl / pjl) / std::log(double(k2)));
      }
    }
  }
  return r;
}

namespace {

TrialRecord run_trial(const GridCell& cell, std::uint64_t seed,
                      InitKind init_kind, const GridOptions& options) {
  TrialRecord rec;
  rec.n = cell.n;
  rec.d = cell.d;
  rec.k1 = cell.k1;
  rec.k2 = cell.k2;
  rec.sigma_z = cell.sigma_z;
  rec.seed = seed;
  rec.init_kind = init_kind;
  rec.rel_error = kInf;
  rec.nmse = kInf;

  try {
    Rng rng(seed);
    GroundTruthSpec spec;
    spec.d = cell.d;
    spec.k1 = cell.k1;
    spec.k2 = cell.k2;
    spec.kappa_min = options.kappa_min;
    spec.param_scale = options.param_scale;
    spec.seed = seed;
    DomaModel truth = sample_ground_truth(spec, rng);
    Dataset train =
        generate_dataset(truth, cell.n, options.dist, cell.sigma_z, rng);
    Dataset test =
        generate_dataset(truth, options.test_samples, options.dist, 0.0, rng);

    DomaModel start;
    if (init_kind == InitKind::oracle_perturbation) {
      double kappa = model_kappa(truth);
      double radius = options.oracle_radius_factor *
                      (std::isfinite(kappa) ? kappa : options.param_scale);
      start = perturbed_init(truth, radius, rng);
    } else {
      InitConfig ic = options.init;
      ic.seed = mix_seed(seed, 1);
      start = initialize(train, cell.k1, cell.k2, ic);
    }

    FitReport report = fit(train, start, options.fit);
    double rel = relative_param_error(report.model, truth);
    double nmse = test_nmse(report.model, test);
    rec.iterations = report.iterations;
    rec.converged = report.converged;
    rec.rel_error = rel;
    rec.nmse = nmse;
  } catch (const divergence_error& e) {
    rec.iterations = e.partial_report.iterations;
  } catch (const std::exception&) {
    // infeasible spec or failed initialization; sentinel fields already set
  }
  return rec;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  if (m % 2 == 1) return values[m / 2];
  return 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

}  // namespace

std::vector<TrialRecord> run_grid(const std::vector<GridCell>& cells,
                                  int trials_per_cell, InitKind init_kind,
                                  std::uint64_t base_seed,
                                  const GridOptions& options) {
  if (trials_per_cell < 1) {
    throw std::invalid_argument("run_grid: need trials_per_cell >= 1");
  }
  std::vector<TrialRecord> records;
  records.reserve(cells.size() * static_cast<std::size_t>(trials_per_cell));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int t = 0; t < trials_per_cell; ++t) {
      std::uint64_t seed = mix_seed(base_seed, static_cast<std::uint64_t>(c),
                                    static_cast<std::uint64_t>(t));
      records.push_back(run_trial(cells[c], seed, init_kind, options));
    }
  }
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  struct Group {
    SummaryRow key;
    std::vector<double> rel, nmse, iters;
    int converged = 0;
  };
  std::vector<Group> groups;
  auto matches = [](const SummaryRow& k, const TrialRecord& r) {
    return k.n == r.n && k.d == r.d && k.k1 == r.k1 && k.k2 == r.k2 &&
           k.sigma_z == r.sigma_z && k.init_kind == r.init_kind;
  };
  for (const TrialRecord& r : records) {
    Group* g = nullptr;
    for (Group& cand : groups) {
      if (matches(cand.key, r)) {
        g = &cand;
        break;
      }
    }
    if (g == nullptr) {
      Group fresh;
      fresh.key.n = r.n;
      fresh.key.d = r.d;
      fresh.key.k1 = r.k1;
      fresh.key.k2 = r.k2;
      fresh.key.sigma_z = r.sigma_z;
      fresh.key.init_kind = r.init_kind;
      groups.push_back(std::move(fresh));
      g = &groups.back();
    }
    g->rel.push_back(r.rel_error);
    g->nmse.push_back(r.nmse);
    g->iters.push_back(static_cast<double>(r.iterations));
    if (r.converged) ++g->converged;
  }

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (Group& g : groups) {
    SummaryRow row = g.key;
    row.trials = static_cast<int>(g.rel.size());
    row.median_rel_error = median_of(std::move(g.rel));
    row.median_nmse = median_of(std::move(g.nmse));
    row.median_iterations = median_of(std::move(g.iters));
    row.converged_fraction =
        static_cast<double>(g.converged) / static_cast<double>(row.trials);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace doma
