#include "hiercal/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hiercal::io {

using nlohmann::json;

namespace {

constexpr const char* kEol = "\r\n";  // RFC 4180

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::vector<double> split_csv_row(const std::string& line) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
  return row;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd json_to_vector(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (int i = 0; i < m.rows(); ++i) arr.push_back(vector_to_json(m.row(i)));
  return arr;
}

Eigen::MatrixXd json_to_matrix(const json& arr) {
  if (arr.empty()) return {};
  Eigen::MatrixXd m(arr.size(), arr[0].size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    for (std::size_t j = 0; j < arr[i].size(); ++j) {
      m(static_cast<int>(i), static_cast<int>(j)) = arr[i][j].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_observations(const std::filesystem::path& csv_path, const ObservationSet& obs) {
  auto out = open_out(csv_path);
  const int s = static_cast<int>(obs.design.points.cols());
  const int n_out = static_cast<int>(obs.truth.cols());
  for (int d = 0; d < s; ++d) out << "x" << (d + 1) << ",";
  out << "y_obs";
  for (int t = 0; t < n_out; ++t) out << ",y_true_" << (t + 1);
  out << kEol;
  for (int j = 0; j < obs.size(); ++j) {
    for (int d = 0; d < s; ++d) out << format_double(obs.design.points(j, d)) << ",";
    out << format_double(obs.values[j]);
    for (int t = 0; t < n_out; ++t) out << "," << format_double(obs.truth(j, t));
    out << kEol;
  }
  out.close();

  json meta;
  meta["seed"] = obs.noise_seed;
  meta["design_seed"] = obs.design.seed;
  meta["sigma_eps"] = obs.sigma_eps;
  meta["delta_v"] = obs.truth_cfg.delta_v;
  meta["lambda0"] = vector_to_json(obs.truth_cfg.lambda0);
  meta["t_obs"] = obs.observed_index + 1;
  meta["omega_clamped"] = obs.omega_clamped;
  auto side = open_out(std::filesystem::path(csv_path).replace_extension(".json"));
  side << meta.dump(2) << "\n";
}

ObservationSet read_observations(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open: " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty observation file");
  // header: x1..xs, y_obs, y_true_1..y_true_T
  int s = 0, n_out = 0;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      if (field.rfind("x", 0) == 0 && field != "y_obs") ++s;
      if (field.rfind("y_true_", 0) == 0) ++n_out;
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_row(line));
  }

  ObservationSet obs;
  const int n = static_cast<int>(rows.size());
  obs.design.points.resize(n, s);
  obs.values.resize(n);
  obs.truth.resize(n, n_out);
  for (int j = 0; j < n; ++j) {
    for (int d = 0; d < s; ++d) obs.design.points(j, d) = rows[j][d];
    obs.values[j] = rows[j][s];
    for (int t = 0; t < n_out; ++t) obs.truth(j, t) = rows[j][s + 1 + t];
  }

  std::ifstream side(std::filesystem::path(csv_path).replace_extension(".json"));
  if (side) {
    json meta = json::parse(side);
    obs.noise_seed = meta.value("seed", 0ULL);
    obs.design.seed = meta.value("design_seed", 0ULL);
    obs.sigma_eps = meta.value("sigma_eps", 0.0);
    obs.truth_cfg.delta_v = meta.value("delta_v", 0.0);
    if (meta.contains("lambda0")) obs.truth_cfg.lambda0 = json_to_vector(meta["lambda0"]);
    obs.observed_index = meta.value("t_obs", 1) - 1;
    obs.omega_clamped = meta.value("omega_clamped", false);
  }
  return obs;
}

void write_chain_csv(const std::filesystem::path& path, const Chain& chain) {
  auto out = open_out(path);
  const int d = static_cast<int>(chain.samples.cols());
  for (int i = 0; i < d; ++i) out << "dim" << (i + 1) << ",";
  out << "log_density" << kEol;
  for (int k = 0; k < chain.size(); ++k) {
    for (int i = 0; i < d; ++i) out << format_double(chain.samples(k, i)) << ",";
    out << format_double(chain.log_densities[k]) << kEol;
  }
}

void write_surrogates(const std::filesystem::path& path, const SurrogateSet& set) {
  json doc = json::array();
  for (const auto& [key, gp] : set.all()) {
    json entry;
    entry["t"] = key.first;
    entry["point"] = key.second;
    entry["inputs"] = matrix_to_json(gp.train_inputs());
    entry["targets"] = vector_to_json(gp.train_targets());
    entry["variance"] = gp.kernel().variance;
    entry["lengthscales"] = vector_to_json(gp.kernel().lengthscales);
    entry["nugget"] = gp.kernel().nugget;
    entry["prior_mean"] = gp.prior_mean();
    doc.push_back(entry);
  }
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

SurrogateSet read_surrogates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  json doc = json::parse(in);
  SurrogateSet set;
  for (const auto& entry : doc) {
    KernelParams params;
    params.variance = entry["variance"].get<double>();
    params.lengthscales = json_to_vector(entry["lengthscales"]);
    params.nugget = entry["nugget"].get<double>();
    set.insert(entry["t"].get<int>(), entry["point"].get<int>(),
               GpSurrogate::from_params(json_to_matrix(entry["inputs"]),
                                        json_to_vector(entry["targets"]), params,
                                        entry["prior_mean"].get<double>()));
  }
  return set;
}

void write_loo_report_csv(const std::filesystem::path& path, const LooReport& report) {
  auto out = open_out(path);
  out << "method,j,t,mean,std,truth,p_hat" << kEol;
  for (const auto& row : report.per_point) {
    out << method_name(report.method) << "," << (row.point + 1) << "," << (row.output + 1) << ","
        << format_double(row.mean) << "," << format_double(row.sd) << ","
        << format_double(row.truth) << "," << format_double(row.p_hat) << kEol;
  }
}

void write_loo_summary_json(const std::filesystem::path& path, const LooReport& report) {
  json doc;
  doc["method"] = method_name(report.method);
  doc["rmsre"] = vector_to_json(report.rmsre);
  doc["p_quantile_09"] = vector_to_json(report.p_quantile);
  doc["failed_folds"] = report.failed_folds;
  doc["complete"] = report.complete();
  json alphas = json::array();
  for (const auto& a : report.fold_alpha_star) alphas.push_back(vector_to_json(a));
  doc["fold_alpha_star"] = alphas;
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

LooReport read_loo_summary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  json doc = json::parse(in);
  LooReport report;
  report.method = method_from_name(doc["method"].get<std::string>());
  report.rmsre = json_to_vector(doc["rmsre"]);
  report.p_quantile = json_to_vector(doc["p_quantile_09"]);
  report.failed_folds = doc["failed_folds"].get<std::vector<int>>();
  for (const auto& a : doc["fold_alpha_star"]) {
    report.fold_alpha_star.push_back(json_to_vector(a));
  }
  return report;
}

void write_map_trace_json(const std::filesystem::path& path, const MapResult& map) {
  json doc;
  doc["alpha_star"] = vector_to_json(map.alpha_star);
  doc["converged"] = map.converged;
  doc["tau"] = map.tau;
  json iters = json::array();
  for (const auto& it : map.iterates) {
    json entry;
    entry["alpha"] = vector_to_json(it.alpha);
    entry["nu"] = it.nu;
    entry["objective"] = it.objective;
    iters.push_back(entry);
  }
  doc["iterates"] = iters;
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

Eigen::VectorXd read_map_alpha_star(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing MAP artifacts: " + path.string());
  json doc = json::parse(in);
  return json_to_vector(doc["alpha_star"]);
}

void write_ensemble_weights_csv(const std::filesystem::path& path, const PosteriorEnsemble& ens) {
  auto out = open_out(path);
  for (int i = 0; i < ens.weights.rows(); ++i) {
    for (int k = 0; k < ens.weights.cols(); ++k) {
      if (k > 0) out << ",";
      out << format_double(ens.weights(i, k));
    }
    out << kEol;
  }
}

}  // namespace hiercal::io
