#include "doma/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace doma {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw io_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string csv_version_header() {
  return std::string("# ") + kToolName + " " + kToolVersion;
}

namespace {

double parse_double(const std::string& token, const std::string& context) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw io_error("bad number '" + token + "' in " + context);
  }
  return v;
}

long long parse_int(const std::string& token, const std::string& context) {
  long long v = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw io_error("bad integer '" + token + "' in " + context);
  }
  return v;
}

std::uint64_t parse_u64(const std::string& token,
                        const std::string& context) {
  std::uint64_t v = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw io_error("bad unsigned integer '" + token + "' in " + context);
  }
  return v;
}

bool parse_bool(const std::string& token, const std::string& context) {
  if (token == "true" || token == "1") return true;
  if (token == "false" || token == "0") return false;
  throw io_error("bad boolean '" + token + "' in " + context);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

// All non-comment lines of a CSV file, header first.
std::vector<std::string> read_csv_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    if (line.empty() || line == "\r") continue;
    lines.push_back(line);
  }
  return lines;
}

std::ofstream open_for_writing(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path + " for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw io_error("write to " + path + " failed");
}

void expect_header(const std::vector<std::string>& fields,
                   const std::vector<std::string>& expected,
                   const std::string& path) {
  if (fields != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) want += ',';
      want += expected[i];
    }
    throw io_error("unexpected header in " + path + " (want '" + want + "')");
  }
}

std::vector<std::string> covariate_header(Eigen::Index d, bool with_y) {
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < d; ++c) {
    names.push_back("x" + std::to_string(c + 1));
  }
  if (with_y) names.push_back("y");
  return names;
}

// Header x1,...,xd[,y] where d is inferred; throws unless it matches the
// pattern exactly.
Eigen::Index parse_covariate_header(const std::vector<std::string>& fields,
                                    bool with_y, const std::string& path) {
  Eigen::Index d = static_cast<Eigen::Index>(fields.size()) - (with_y ? 1 : 0);
  if (d < 1) throw io_error("no covariate columns in " + path);
  expect_header(fields, covariate_header(d, with_y), path);
  return d;
}

}  // namespace

nlohmann::json model_to_json(const DomaModel& model) {
  auto part_rows = [](const Eigen::MatrixXd& part) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index j = 0; j < part.rows(); ++j) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < part.cols(); ++c) row.push_back(part(j, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  return nlohmann::json{{"d", model.d},
                        {"k1", model.k1()},
                        {"k2", model.k2()},
                        {"beta", part_rows(model.beta)},
                        {"alpha", part_rows(model.alpha)}};
}

namespace {

Eigen::MatrixXd part_from_json(const nlohmann::json& rows, int k, int d,
                               const std::string& name) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != k) {
    throw io_error("model field '" + name + "' must be an array of " +
                   std::to_string(k) + " rows");
  }
  Eigen::MatrixXd part(k, d + 1);
  for (int j = 0; j < k; ++j) {
    const auto& row = rows[static_cast<std::size_t>(j)];
    if (!row.is_array() || static_cast<int>(row.size()) != d + 1) {
      throw io_error("model field '" + name + "' row " + std::to_string(j) +
                     " must hold d+1 numbers");
    }
    for (int c = 0; c <= d; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw io_error("model field '" + name + "' has a non-numeric entry");
      }
      part(j, c) = v.get<double>();
    }
  }
  return part;
}

}  // namespace

DomaModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw io_error("model JSON must be an object");
  for (const char* key : {"d", "k1", "k2", "beta", "alpha"}) {
    if (!j.contains(key)) {
      throw io_error(std::string("model JSON lacks field '") + key + "'");
    }
  }
  if (!j["d"].is_number_integer() || !j["k1"].is_number_integer() ||
      !j["k2"].is_number_integer()) {
    throw io_error("model fields d, k1, k2 must be integers");
  }
  DomaModel model;
  model.d = j["d"].get<int>();
  int k1 = j["k1"].get<int>(), k2 = j["k2"].get<int>();
  if (model.d < 1 || k1 < 1 || k2 < 1) {
    throw io_error("model requires d >= 1, k1 >= 1, k2 >= 1");
  }
  model.beta = part_from_json(j["beta"], k1, model.d, "beta");
  model.alpha = part_from_json(j["alpha"], k2, model.d, "alpha");
  return model;
}

DomaModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("cannot parse " + path + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const io_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

void write_model(const std::string& path, const DomaModel& model) {
  auto problems = validate(model);
  if (!problems.empty()) {
    throw io_error("refusing to write invalid model to " + path + ": " +
                   problems.front());
  }
  auto out = open_for_writing(path);
  out << model_to_json(model).dump(2) << '\n';
  finish_write(out, path);
}

nlohmann::json report_to_json(const FitReport& report) {
  nlohmann::json j{{"model", model_to_json(report.model)},
                   {"iterations", report.iterations},
                   {"converged", report.converged}};
  if (!report.loss_trace.empty()) j["loss_trace"] = report.loss_trace;
  return j;
}

void write_report(const std::string& path, const FitReport& report) {
  auto out = open_for_writing(path);
  out << report_to_json(report).dump(2) << '\n';
  finish_write(out, path);
}

Dataset read_dataset(const std::string& path) {
  auto lines = read_csv_lines(path);
  if (lines.empty()) throw io_error("no header in " + path);
  Eigen::Index d =
      parse_covariate_header(split_csv_line(lines[0]), true, path);
  const Eigen::Index n = static_cast<Eigen::Index>(lines.size()) - 1;
  if (n < 1) throw io_error("no sample rows in " + path);

  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto fields = split_csv_line(lines[static_cast<std::size_t>(i) + 1]);
    if (static_cast<Eigen::Index>(fields.size()) != d + 1) {
      throw io_error("row " + std::to_string(i + 1) + " of " + path +
                     " has " + std::to_string(fields.size()) +
                     " fields, expected " + std::to_string(d + 1));
    }
    const std::string ctx = path + " row " + std::to_string(i + 1);
    for (Eigen::Index c = 0; c < d; ++c) {
      data.x(i, c) = parse_double(fields[static_cast<std::size_t>(c)], ctx);
    }
    data.y[i] = parse_double(fields[static_cast<std::size_t>(d)], ctx);
  }
  return data;
}

void write_dataset(const std::string& path, const Dataset& data) {
  auto out = open_for_writing(path);
  out << csv_version_header() << '\n';
  auto names = covariate_header(data.x.cols(), true);
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << (i ? "," : "") << names[i];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) {
      out << format_double(data.x(i, c)) << ',';
    }
    out << format_double(data.y[i]) << '\n';
  }
  finish_write(out, path);
}

Eigen::MatrixXd read_covariates(const std::string& path) {
  auto lines = read_csv_lines(path);
  if (lines.empty()) throw io_error("no header in " + path);
  Eigen::Index d =
      parse_covariate_header(split_csv_line(lines[0]), false, path);
  const Eigen::Index n = static_cast<Eigen::Index>(lines.size()) - 1;
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto fields = split_csv_line(lines[static_cast<std::size_t>(i) + 1]);
    if (static_cast<Eigen::Index>(fields.size()) != d) {
      throw io_error("row " + std::to_string(i + 1) + " of " + path +
                     " has " + std::to_string(fields.size()) +
                     " fields, expected " + std::to_string(d));
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      x(i, c) = parse_double(fields[static_cast<std::size_t>(c)],
                             path + " row " + std::to_string(i + 1));
    }
  }
  return x;
}

void write_predictions(const std::string& path,
                       const Eigen::VectorXd& y_hat) {
  auto out = open_for_writing(path);
  out << csv_version_header() << '\n' << "y_hat" << '\n';
  for (Eigen::Index i = 0; i < y_hat.size(); ++i) {
    out << format_double(y_hat[i]) << '\n';
  }
  finish_write(out, path);
}

namespace {

const std::vector<std::string> kRecordColumns = {
    "n",    "d",    "k1",        "k2",   "sigma_z",    "seed",
    "init_kind", "rel_error", "nmse", "iterations", "converged"};

}  // namespace

void write_records_csv(const std::string& path,
                       const std::vector<TrialRecord>& records) {
  auto out = open_for_writing(path);
  out << csv_version_header() << '\n';
  out << "n,d,k1,k2,sigma_z,seed,init_kind,rel_error,nmse,iterations,"
         "converged\n";
  for (const TrialRecord& r : records) {
    out << r.n << ',' << r.d << ',' << r.k1 << ',' << r.k2 << ','
        << format_double(r.sigma_z) << ',' << r.seed << ','
        << init_kind_name(r.init_kind) << ',' << format_double(r.rel_error)
        << ',' << format_double(r.nmse) << ',' << r.iterations << ','
        << (r.converged ? "true" : "false") << '\n';
  }
  finish_write(out, path);
}

std::vector<TrialRecord> read_records_csv(const std::string& path) {
  auto lines = read_csv_lines(path);
  if (lines.empty()) throw io_error("no header in " + path);
  expect_header(split_csv_line(lines[0]), kRecordColumns, path);
  std::vector<TrialRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_csv_line(lines[i]);
    if (f.size() != kRecordColumns.size()) {
      throw io_error("row " + std::to_string(i) + " of " + path + " has " +
                     std::to_string(f.size()) + " fields, expected " +
                     std::to_string(kRecordColumns.size()));
    }
    const std::string ctx = path + " row " + std::to_string(i);
    TrialRecord r;
    r.n = static_cast<int>(parse_int(f[0], ctx));
    r.d = static_cast<int>(parse_int(f[1], ctx));
    r.k1 = static_cast<int>(parse_int(f[2], ctx));
    r.k2 = static_cast<int>(parse_int(f[3], ctx));
    r.sigma_z = parse_double(f[4], ctx);
    r.seed = parse_u64(f[5], ctx);
    try {
      r.init_kind = parse_init_kind(f[6]);
    } catch (const std::invalid_argument& e) {
      throw io_error(ctx + ": " + e.what());
    }
    r.rel_error = parse_double(f[7], ctx);
    r.nmse = parse_double(f[8], ctx);
    r.iterations = static_cast<int>(parse_int(f[9], ctx));
    r.converged = parse_bool(f[10], ctx);
    records.push_back(r);
  }
  return records;
}

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows) {
  auto out = open_for_writing(path);
  out << csv_version_header() << '\n';
  out << "n,d,k1,k2,sigma_z,init_kind,trials,median_rel_error,median_nmse,"
         "median_iterations,converged_fraction\n";
  for (const SummaryRow& s : rows) {
    out << s.n << ',' << s.d << ',' << s.k1 << ',' << s.k2 << ','
        << format_double(s.sigma_z) << ',' << init_kind_name(s.init_kind)
        << ',' << s.trials << ',' << format_double(s.median_rel_error) << ','
        << format_double(s.median_nmse) << ','
        << format_double(s.median_iterations) << ','
        << format_double(s.converged_fraction) << '\n';
  }
  finish_write(out, path);
}

namespace {

CovariateDistribution covariates_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "standard_normal") {
      return CovariateDistribution::standard_normal();
    }
    throw io_error("unknown covariate distribution '" +
                   j.get<std::string>() + "'");
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw io_error("covariates must be a name or an object with 'kind'");
  }
  std::string kind = j["kind"].get<std::string>();
  if (kind == "standard_normal") {
    return CovariateDistribution::standard_normal();
  }
  if (kind == "uniform_cube") {
    if (!j.contains("half_width") || !j["half_width"].is_number()) {
      throw io_error("uniform_cube needs a numeric 'half_width'");
    }
    return CovariateDistribution::uniform_cube(j["half_width"].get<double>());
  }
  if (kind == "gaussian_mixture") {
    if (!j.contains("centers") || !j.contains("weights") ||
        !j["centers"].is_array() || !j["weights"].is_array() ||
        j["centers"].empty()) {
      throw io_error("gaussian_mixture needs 'centers' and 'weights' arrays");
    }
    const auto& jc = j["centers"];
    Eigen::Index m = static_cast<Eigen::Index>(jc.size());
    Eigen::Index d = static_cast<Eigen::Index>(jc[0].size());
    Eigen::MatrixXd centers(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& row = jc[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
        throw io_error("gaussian_mixture centers must be same-length rows");
      }
      for (Eigen::Index c = 0; c < d; ++c) {
        centers(i, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
    const auto& jw = j["weights"];
    if (static_cast<Eigen::Index>(jw.size()) != m) {
      throw io_error("gaussian_mixture needs one weight per center");
    }
    Eigen::VectorXd weights(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      weights[i] = jw[static_cast<std::size_t>(i)].get<double>();
    }
    try {
      return CovariateDistribution::gaussian_mixture(std::move(centers),
                                                     std::move(weights));
    } catch (const std::invalid_argument& e) {
      throw io_error(e.what());
    }
  }
  throw io_error("unknown covariate distribution kind '" + kind + "'");
}

int json_int(const nlohmann::json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) {
    throw io_error(std::string("grid config field '") + key +
                   "' must be an integer");
  }
  return j[key].get<int>();
}

double json_num(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    throw io_error(std::string("grid config field '") + key +
                   "' must be a number");
  }
  return j[key].get<double>();
}

std::vector<double> json_num_list(const nlohmann::json& j, const char* key) {
  std::vector<double> values;
  if (!j.contains(key)) return values;
  if (j[key].is_number()) {
    values.push_back(j[key].get<double>());
    return values;
  }
  if (!j[key].is_array() || j[key].empty()) {
    throw io_error(std::string("grid config field '") + key +
                   "' must be a number or a non-empty array");
  }
  for (const auto& v : j[key]) {
    if (!v.is_number()) {
      throw io_error(std::string("grid config field '") + key +
                     "' has a non-numeric entry");
    }
    values.push_back(v.get<double>());
  }
  return values;
}

}  // namespace

GridConfig read_grid_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("cannot parse " + path + ": " + e.what());
  }
  if (!j.is_object()) throw io_error(path + ": grid config must be an object");

  GridConfig config;
  config.trials = json_int(j, "trials", config.trials);
  if (config.trials < 1) throw io_error(path + ": trials must be >= 1");

  GridOptions& opt = config.options;
  opt.kappa_min = json_num(j, "kappa_min", opt.kappa_min);
  opt.param_scale = json_num(j, "param_scale", opt.param_scale);
  opt.oracle_radius_factor =
      json_num(j, "oracle_radius_factor", opt.oracle_radius_factor);
  opt.test_samples = json_int(j, "test_samples", opt.test_samples);
  opt.fit.gamma = json_num(j, "gamma", opt.fit.gamma);
  opt.fit.max_iters = json_int(j, "max_iters", opt.fit.max_iters);
  opt.init.t_candidates = json_int(j, "t_candidates", opt.init.t_candidates);
  opt.init.refine_sweeps =
      json_int(j, "refine_sweeps", opt.init.refine_sweeps);
  if (j.contains("covariates")) {
    opt.dist = covariates_from_json(j["covariates"]);
  }

  if (j.contains("cells")) {
    if (!j["cells"].is_array() || j["cells"].empty()) {
      throw io_error(path + ": 'cells' must be a non-empty array");
    }
    for (const auto& jc : j["cells"]) {
      if (!jc.is_object()) {
        throw io_error(path + ": each cell must be an object");
      }
      GridCell cell;
      cell.n = json_int(jc, "n", 0);
      cell.d = json_int(jc, "d", 0);
      cell.k1 = json_int(jc, "k1", 2);
      cell.k2 = json_int(jc, "k2", 2);
      cell.sigma_z = json_num(jc, "sigma_z", 0.0);
      if (cell.n < 1 || cell.d < 1 || cell.k1 < 1 || cell.k2 < 1 ||
          cell.sigma_z < 0.0) {
        throw io_error(path + ": cell needs n >= 1, d >= 1, k >= 1, "
                       "sigma_z >= 0");
      }
      config.cells.push_back(cell);
    }
    return config;
  }

  // Product form: d x (n or n_over_d) x sigma_z.
  auto ds = json_num_list(j, "d");
  auto ratios = json_num_list(j, "n_over_d");
  auto ns = json_num_list(j, "n");
  auto sigmas = json_num_list(j, "sigma_z");
  if (sigmas.empty()) sigmas.push_back(0.0);
  if (ds.empty() || (ratios.empty() && ns.empty())) {
    throw io_error(path + ": need 'cells', or 'd' with 'n' or 'n_over_d'");
  }
  if (!ratios.empty() && !ns.empty()) {
    throw io_error(path + ": give 'n' or 'n_over_d', not both");
  }
  int k1 = json_int(j, "k1", 2);
  int k2 = json_int(j, "k2", 2);
  if (k1 < 1 || k2 < 1) throw io_error(path + ": k1 and k2 must be >= 1");

  for (double dv : ds) {
    int d = static_cast<int>(dv);
    if (d < 1 || dv != d) throw io_error(path + ": d must be integral >= 1");
    const auto& counts = ratios.empty() ? ns : ratios;
    for (double cv : counts) {
      int n = ratios.empty() ? static_cast<int>(cv)
                             : static_cast<int>(cv * d);
      if (n < 1) throw io_error(path + ": derived n must be >= 1");
      for (double sigma : sigmas) {
        if (sigma < 0.0) throw io_error(path + ": sigma_z must be >= 0");
        GridCell cell;
        cell.n = n;
        cell.d = d;
        cell.k1 = k1;
        cell.k2 = k2;
        cell.sigma_z = sigma;
        config.cells.push_back(cell);
      }
    }
  }
  return config;
}

}  // namespace doma
