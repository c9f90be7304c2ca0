#include "hiercal/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "hiercal/io.hpp"
#include "hiercal/testbed.hpp"

namespace hiercal {

double TestbedConfig::sigma_for(int t_obs_1based) const {
  if (sigma_eps.empty()) throw ConfigError("testbed.sigma_eps is empty");
  if (sigma_eps.size() == 1) return sigma_eps[0];
  const auto idx = static_cast<std::size_t>(t_obs_1based - 1);
  if (idx >= sigma_eps.size()) {
    throw ConfigError("testbed.sigma_eps has no entry for t_obs " + std::to_string(t_obs_1based));
  }
  return sigma_eps[idx];
}

std::vector<std::uint64_t> TestbedConfig::effective_design_seeds() const {
  return design_seeds.empty() ? std::vector<std::uint64_t>{design_seed} : design_seeds;
}

GpFitConfig SurrogateConfig::fit_config() const {
  GpFitConfig cfg;
  cfg.multistarts = multistarts;
  cfg.seed = fit_seed;
  return cfg;
}

void ExperimentConfig::validate() const {
  if (testbed.n < 2) throw ConfigError("testbed.n must be >= 2");
  for (int t : testbed.t_obs) {
    if (t < 1 || t > 3) throw ConfigError("testbed.t_obs entries must be in 1..3");
  }
  for (double s : testbed.sigma_eps) {
    if (!(s > 0.0)) throw ConfigError("testbed.sigma_eps must be > 0");
  }
  if (testbed.lambda0.size() != 0 && testbed.lambda0.size() != 6) {
    throw ConfigError("testbed.lambda0 must have 6 entries");
  }
  if (testbed.lambda0.size() == 6) {
    for (int i = 0; i < 6; ++i) {
      if (testbed.lambda0[i] < 0.0 || testbed.lambda0[i] > 1.0) {
        throw ConfigError("testbed.lambda0 must lie in [0,1]^6");
      }
    }
  }
  if (surrogate.n_train < 2) throw ConfigError("surrogate.n_train must be >= 2");
  if (methods.empty()) throw ConfigError("method.methods is empty");
  if (method.bank_size < 1) throw ConfigError("method.L must be >= 1");
  if (method.lambda_samples < 1) throw ConfigError("method.M must be >= 1");
  if (method.alpha_samples < 1) throw ConfigError("method.N must be >= 1");
  if (method.confidence_bank_size < 2) throw ConfigError("method.L_prime must be >= 2");
  if (method.beta < 1.0) throw ConfigError("method.beta must be >= 1");
  if (!(method.kappa > 0.0)) throw ConfigError("method.kappa must be > 0");
  if (!(method.tau > 0.0)) throw ConfigError("method.tau must be > 0");
  if (method.stochastic_samples < 2) throw ConfigError("method.R must be >= 2");
  if (zeta <= 0.0 || zeta >= 1.0) throw ConfigError("run.zeta must be in (0,1)");
  if (confidence_grid < 2) throw ConfigError("run.confidence_grid must be >= 2");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct KvStore {
  std::map<std::string, std::string> entries;  // "section.key" -> value
  mutable std::map<std::string, bool> consumed;

  void set(const std::string& key, const std::string& value) { entries[key] = value; }
  bool has(const std::string& key) const { return entries.count(key) > 0; }

  template <typename F>
  void apply(const std::string& key, F&& f) const {
    const auto it = entries.find(key);
    if (it == entries.end()) return;
    consumed[key] = true;
    try {
      f(it->second);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
  }

  void check_all_consumed() const {
    for (const auto& [key, value] : entries) {
      if (!consumed.count(key)) throw ConfigError("unknown config key: " + key);
    }
  }
};

KvStore parse_kv(const std::string& text) {
  KvStore store;
  std::stringstream ss(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
    }
    store.set(section + "." + key, trim(line.substr(eq + 1)));
  }
  return store;
}

std::uint64_t parse_u64(const std::string& s) { return std::stoull(s); }

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected boolean, got '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  const KvStore kv = parse_kv(text);
  ExperimentConfig cfg;

  kv.apply("testbed.n", [&](const std::string& v) { cfg.testbed.n = std::stoi(v); });
  kv.apply("testbed.sigma_eps", [&](const std::string& v) {
    cfg.testbed.sigma_eps.clear();
    for (const auto& item : split_list(v)) cfg.testbed.sigma_eps.push_back(std::stod(item));
  });
  kv.apply("testbed.delta_v", [&](const std::string& v) { cfg.testbed.delta_v = std::stod(v); });
  kv.apply("testbed.lambda0", [&](const std::string& v) {
    const auto items = split_list(v);
    cfg.testbed.lambda0.resize(static_cast<int>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
      cfg.testbed.lambda0[static_cast<int>(i)] = std::stod(items[i]);
    }
  });
  kv.apply("testbed.t_obs", [&](const std::string& v) {
    cfg.testbed.t_obs.clear();
    for (const auto& item : split_list(v)) cfg.testbed.t_obs.push_back(std::stoi(item));
  });
  kv.apply("testbed.design_seed",
           [&](const std::string& v) { cfg.testbed.design_seed = parse_u64(v); });
  kv.apply("testbed.noise_seed",
           [&](const std::string& v) { cfg.testbed.noise_seed = parse_u64(v); });
  kv.apply("testbed.design_seeds", [&](const std::string& v) {
    cfg.testbed.design_seeds.clear();
    for (const auto& item : split_list(v)) cfg.testbed.design_seeds.push_back(parse_u64(item));
  });

  kv.apply("surrogate.n_train",
           [&](const std::string& v) { cfg.surrogate.n_train = std::stoi(v); });
  kv.apply("surrogate.multistarts",
           [&](const std::string& v) { cfg.surrogate.multistarts = std::stoi(v); });
  kv.apply("surrogate.train_seed",
           [&](const std::string& v) { cfg.surrogate.train_seed = parse_u64(v); });
  kv.apply("surrogate.fit_seed",
           [&](const std::string& v) { cfg.surrogate.fit_seed = parse_u64(v); });

  kv.apply("method.methods", [&](const std::string& v) {
    cfg.methods.clear();
    for (const auto& item : split_list(v)) cfg.methods.push_back(method_from_name(item));
  });
  kv.apply("method.L", [&](const std::string& v) { cfg.method.bank_size = std::stoi(v); });
  kv.apply("method.M", [&](const std::string& v) { cfg.method.lambda_samples = std::stoi(v); });
  kv.apply("method.N", [&](const std::string& v) { cfg.method.alpha_samples = std::stoi(v); });
  kv.apply("method.L_prime",
           [&](const std::string& v) { cfg.method.confidence_bank_size = std::stoi(v); });
  kv.apply("method.beta", [&](const std::string& v) { cfg.method.beta = std::stod(v); });
  kv.apply("method.kappa", [&](const std::string& v) { cfg.method.kappa = std::stod(v); });
  kv.apply("method.tau", [&](const std::string& v) { cfg.method.tau = std::stod(v); });
  kv.apply("method.R",
           [&](const std::string& v) { cfg.method.stochastic_samples = std::stoi(v); });
  kv.apply("method.map_max_iters",
           [&](const std::string& v) { cfg.method.map_max_iters = std::stoi(v); });
  kv.apply("method.map_multistarts",
           [&](const std::string& v) { cfg.method.map_multistarts = std::stoi(v); });
  kv.apply("method.nominal_error",
           [&](const std::string& v) { cfg.method.nominal_error_value = std::stod(v); });
  kv.apply("method.lambda_thin",
           [&](const std::string& v) { cfg.method.lambda_chain.thin = std::stoi(v); });
  kv.apply("method.lambda_burn",
           [&](const std::string& v) { cfg.method.lambda_chain.burn_in = std::stoi(v); });
  kv.apply("method.alpha_thin",
           [&](const std::string& v) { cfg.method.alpha_chain.thin = std::stoi(v); });
  kv.apply("method.alpha_burn",
           [&](const std::string& v) { cfg.method.alpha_chain.burn_in = std::stoi(v); });
  kv.apply("method.rebuild_bank",
           [&](const std::string& v) { cfg.method.rebuild_bank = parse_bool(v); });

  kv.apply("output.dir", [&](const std::string& v) { cfg.output.dir = v; });
  kv.apply("output.write_weights",
           [&](const std::string& v) { cfg.output.write_weights = parse_bool(v); });

  kv.apply("run.threads", [&](const std::string& v) { cfg.threads = std::stoi(v); });
  kv.apply("run.seed", [&](const std::string& v) { cfg.base_seed = parse_u64(v); });
  kv.apply("run.zeta", [&](const std::string& v) { cfg.zeta = std::stod(v); });
  kv.apply("run.confidence_grid",
           [&](const std::string& v) { cfg.confidence_grid = std::stoi(v); });

  kv.check_all_consumed();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[testbed]\n";
  out << "n = " << cfg.testbed.n << "\n";
  out << "sigma_eps = ";
  for (std::size_t i = 0; i < cfg.testbed.sigma_eps.size(); ++i) {
    out << (i ? "," : "") << io::format_double(cfg.testbed.sigma_eps[i]);
  }
  out << "\n";
  out << "delta_v = " << io::format_double(cfg.testbed.delta_v) << "\n";
  const Eigen::VectorXd lambda0 =
      cfg.testbed.lambda0.size() > 0 ? cfg.testbed.lambda0 : default_lambda0();
  out << "lambda0 = ";
  for (int i = 0; i < lambda0.size(); ++i) out << (i ? "," : "") << io::format_double(lambda0[i]);
  out << "\n";
  out << "t_obs = ";
  for (std::size_t i = 0; i < cfg.testbed.t_obs.size(); ++i) {
    out << (i ? "," : "") << cfg.testbed.t_obs[i];
  }
  out << "\n";
  out << "design_seed = " << cfg.testbed.design_seed << "\n";
  out << "noise_seed = " << cfg.testbed.noise_seed << "\n";
  const auto seeds = cfg.testbed.effective_design_seeds();
  out << "design_seeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
  out << "\n";

  out << "\n[surrogate]\n";
  out << "n_train = " << cfg.surrogate.n_train << "\n";
  out << "multistarts = " << cfg.surrogate.multistarts << "\n";
  out << "train_seed = " << cfg.surrogate.train_seed << "\n";
  out << "fit_seed = " << cfg.surrogate.fit_seed << "\n";

  out << "\n[method]\n";
  out << "methods = ";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    out << (i ? "," : "") << method_name(cfg.methods[i]);
  }
  out << "\n";
  out << "L = " << cfg.method.bank_size << "\n";
  out << "M = " << cfg.method.lambda_samples << "\n";
  out << "N = " << cfg.method.alpha_samples << "\n";
  out << "L_prime = " << cfg.method.confidence_bank_size << "\n";
  out << "beta = " << io::format_double(cfg.method.beta) << "\n";
  out << "kappa = " << io::format_double(cfg.method.kappa) << "\n";
  out << "tau = " << io::format_double(cfg.method.tau) << "\n";
  out << "R = " << cfg.method.stochastic_samples << "\n";
  out << "map_max_iters = " << cfg.method.map_max_iters << "\n";
  out << "map_multistarts = " << cfg.method.map_multistarts << "\n";
  out << "nominal_error = " << io::format_double(cfg.method.nominal_error_value) << "\n";
  out << "lambda_thin = " << cfg.method.lambda_chain.thin << "\n";
  out << "lambda_burn = " << cfg.method.lambda_chain.burn_in << "\n";
  out << "alpha_thin = " << cfg.method.alpha_chain.thin << "\n";
  out << "alpha_burn = " << cfg.method.alpha_chain.burn_in << "\n";
  out << "rebuild_bank = " << (cfg.method.rebuild_bank ? "true" : "false") << "\n";

  out << "\n[output]\n";
  out << "dir = " << cfg.output.dir << "\n";
  out << "write_weights = " << (cfg.output.write_weights ? "true" : "false") << "\n";

  out << "\n[run]\n";
  out << "threads = " << cfg.threads << "\n";
  out << "seed = " << cfg.base_seed << "\n";
  out << "zeta = " << io::format_double(cfg.zeta) << "\n";
  out << "confidence_grid = " << cfg.confidence_grid << "\n";
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_text(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace hiercal
