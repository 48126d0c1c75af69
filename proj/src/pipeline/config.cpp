#include "marsmc/pipeline/config.hpp"

#include <fstream>

#include "marsmc/errors.hpp"

namespace marsmc::pipeline {
namespace {

const char* kDefaults = R"({
  "input": "",
  "output_dir": "marsmc_out",
  "preprocess_detrend_degree": -1,
  "dump_cloud": false,
  "checkpoint": false,
  "model": {"r": 1, "s": 1, "dist": "student_t"},
  "smc": {
    "particles": 2000, "stages": 50, "lambda": 2.0, "mutation_steps": 1,
    "ess_fraction": 0.5, "target_accept": 0.25, "initial_scale": 0.3, "seed": 1
  },
  "prior": {
    "causal_var_scale": 2.0, "noncausal_var_scale": 2.0, "wishart_scale": 5.0,
    "wishart_df": 3.0, "nu_mean": 5.0, "nu_max": 100.0, "skew_var": 3.0, "log_scale_var": 10.0
  },
  "simulate": {
    "dgp": "table2", "dist": "cauchy", "T": 150, "burn": 0, "seed": 1,
    "custom": {"n": 1, "r": 1, "s": 0, "dist": "student_t",
               "psi": [], "phi": [], "sigma": [], "nu": null, "alpha": null}
  },
  "select": {
    "orders": [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2], [2, 1], [1, 2]],
    "dists": ["cauchy", "student_t", "skewed_t"]
  },
  "mc": {"mode": "estimate", "replications": 20},
  "detrend": {"degree": 3}
})";

void merge_into(Json& base, const Json& overlay, const std::string& path) {
  if (!overlay.is_object()) throw ConfigError("configuration " + (path.empty() ? "root" : "'" + path + "'") + " must be an object");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown configuration key '" + key + "'");
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_into(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

template <typename T>
T get(const Json& j, const char* section, const char* key) {
  const Json& node = section[0] == '\0' ? j.at(key) : j.at(section).at(key);
  const std::string name = section[0] == '\0' ? std::string(key) : std::string(section) + "." + key;
  try {
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!node.is_number_integer() && !node.is_number_unsigned())
        throw ConfigError("'" + name + "' must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (node.is_number_integer() && node.get<long long>() < 0) throw ConfigError("'" + name + "' must be >= 0");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!node.is_number()) throw ConfigError("'" + name + "' must be a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!node.is_boolean()) throw ConfigError("'" + name + "' must be true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!node.is_string()) throw ConfigError("'" + name + "' must be a string");
    }
    return node.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + name + "': " + e.what());
  }
}

Eigen::MatrixXd matrix_from(const Json& node, int n, const std::string& what) {
  if (!node.is_array() || static_cast<int>(node.size()) != n)
    throw ConfigError("'" + what + "' must be an array of " + std::to_string(n) + " rows");
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    const Json& row = node[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ConfigError("'" + what + "' rows must have " + std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j) {
      if (!row[static_cast<std::size_t>(j)].is_number()) throw ConfigError("'" + what + "' entries must be numbers");
      m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

}  // namespace

const Json& default_config() {
  static const Json defaults = Json::parse(kDefaults);
  return defaults;
}

RunConfig::RunConfig() : json_(default_config()) {}

RunConfig::RunConfig(Json resolved) : json_(default_config()) { merge(resolved); }

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("tool") && j.contains("config") && j["tool"] == "marsmc") j = j["config"];
  RunConfig cfg;
  cfg.merge(j);
  return cfg;
}

void RunConfig::merge(const Json& overlay) { merge_into(json_, overlay, ""); }

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }
  Json overlay = value;
  std::size_t end = key.size();
  while (true) {
    const auto dot = key.rfind('.', end - 1);
    const std::string part = key.substr(dot == std::string::npos ? 0 : dot + 1,
                                        end - (dot == std::string::npos ? 0 : dot + 1));
    if (part.empty()) throw ConfigError("malformed --set key '" + key + "'");
    overlay = Json{{part, overlay}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  merge(overlay);
}

SmcConfig RunConfig::smc() const {
  SmcConfig c;
  c.particles = get<std::size_t>(json_, "smc", "particles");
  c.stages = get<std::size_t>(json_, "smc", "stages");
  c.lambda = get<double>(json_, "smc", "lambda");
  c.mutation_steps = get<std::size_t>(json_, "smc", "mutation_steps");
  c.ess_fraction = get<double>(json_, "smc", "ess_fraction");
  c.target_accept = get<double>(json_, "smc", "target_accept");
  c.initial_scale = get<double>(json_, "smc", "initial_scale");
  c.seed = get<std::uint64_t>(json_, "smc", "seed");
  c.validate();
  return c;
}

PriorConfig RunConfig::prior() const {
  PriorConfig p;
  p.causal_var_scale = get<double>(json_, "prior", "causal_var_scale");
  p.noncausal_var_scale = get<double>(json_, "prior", "noncausal_var_scale");
  p.wishart_scale = get<double>(json_, "prior", "wishart_scale");
  p.wishart_df = get<double>(json_, "prior", "wishart_df");
  p.nu_mean = get<double>(json_, "prior", "nu_mean");
  p.nu_max = get<double>(json_, "prior", "nu_max");
  p.skew_var = get<double>(json_, "prior", "skew_var");
  p.log_scale_var = get<double>(json_, "prior", "log_scale_var");
  return p;
}

ModelSpec RunConfig::model(int n) const {
  ModelSpec spec;
  spec.n = n;
  spec.r = get<int>(json_, "model", "r");
  spec.s = get<int>(json_, "model", "s");
  try {
    spec.dist = parse_error_dist(get<std::string>(json_, "model", "dist"));
    spec.validate();
  } catch (const ModelError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return spec;
}

CandidateGrid RunConfig::grid() const {
  CandidateGrid g;
  const Json& orders = json_.at("select").at("orders");
  const Json& dists = json_.at("select").at("dists");
  if (!orders.is_array() || !dists.is_array()) throw ConfigError("select.orders and select.dists must be arrays");
  for (const auto& o : orders) {
    if (!o.is_array() || o.size() != 2 || !o[0].is_number_integer() || !o[1].is_number_integer())
      throw ConfigError("select.orders entries must be [r, s] integer pairs");
    g.orders.emplace_back(o[0].get<int>(), o[1].get<int>());
  }
  for (const auto& d : dists) {
    if (!d.is_string()) throw ConfigError("select.dists entries must be strings");
    try {
      g.dists.push_back(parse_error_dist(d.get<std::string>()));
    } catch (const ModelError& e) {
      throw ConfigError(std::string("select.dists: ") + e.what());
    }
  }
  g.validate();
  return g;
}

DgpSpec RunConfig::dgp() const {
  const std::string kind = get<std::string>(json_, "simulate", "dgp");
  DgpSpec dgp;
  try {
    if (kind == "table2") {
      dgp = table2_dgp(parse_error_dist(get<std::string>(json_, "simulate", "dist")));
    } else if (kind == "custom") {
      const Json& c = json_.at("simulate").at("custom");
      ModelSpec spec;
      spec.n = get<int>(c, "", "n");
      spec.r = get<int>(c, "", "r");
      spec.s = get<int>(c, "", "s");
      spec.dist = parse_error_dist(get<std::string>(c, "", "dist"));
      spec.validate();
      ModelParams p;
      auto blocks = [&](const char* key, int count, std::vector<Eigen::MatrixXd>& out) {
        const Json& arr = c.at(key);
        if (!arr.is_array() || static_cast<int>(arr.size()) != count)
          throw ConfigError(std::string("simulate.custom.") + key + " must hold " + std::to_string(count) + " matrices");
        for (const auto& m : arr) out.push_back(matrix_from(m, spec.n, std::string("simulate.custom.") + key));
      };
      blocks("psi", spec.r, p.psi);
      blocks("phi", spec.s, p.phi);
      p.sigma = matrix_from(c.at("sigma"), spec.n, "simulate.custom.sigma");
      if (!c.at("nu").is_null()) p.nu = get<double>(c, "", "nu");
      if (!c.at("alpha").is_null()) {
        const Json& a = c.at("alpha");
        if (!a.is_array() || static_cast<int>(a.size()) != spec.n)
          throw ConfigError("simulate.custom.alpha must have n entries");
        Eigen::VectorXd alpha(spec.n);
        for (int i = 0; i < spec.n; ++i) alpha(i) = a[static_cast<std::size_t>(i)].get<double>();
        p.alpha = alpha;
      }
      dgp.model = spec;
      dgp.params = encode_params(p, spec);
      dgp.burn = spec.dist == ErrorDist::Cauchy ? 500 : 200;
    } else {
      throw ConfigError("simulate.dgp must be 'table2' or 'custom'");
    }
  } catch (const ModelError& e) {
    throw ConfigError(std::string("simulate: ") + e.what());
  }
  dgp.T = get<std::size_t>(json_, "simulate", "T");
  const auto burn = get<std::size_t>(json_, "simulate", "burn");
  if (burn != 0) dgp.burn = burn;
  dgp.seed = get<std::uint64_t>(json_, "simulate", "seed");
  try {
    dgp.validate();
  } catch (const ModelError& e) {
    throw ConfigError(std::string("simulate: ") + e.what());
  }
  return dgp;
}

int RunConfig::detrend_degree() const {
  const int d = get<int>(json_, "detrend", "degree");
  if (d < 0) throw ConfigError("detrend.degree must be >= 0");
  return d;
}

int RunConfig::preprocess_detrend_degree() const { return get<int>(json_, "", "preprocess_detrend_degree"); }

std::string RunConfig::input() const { return get<std::string>(json_, "", "input"); }

std::filesystem::path RunConfig::output_dir() const {
  const auto dir = get<std::string>(json_, "", "output_dir");
  if (dir.empty()) throw ConfigError("output_dir must not be empty");
  return dir;
}

std::string RunConfig::mc_mode() const {
  const auto mode = get<std::string>(json_, "mc", "mode");
  if (mode != "estimate" && mode != "identify") throw ConfigError("mc.mode must be 'estimate' or 'identify'");
  return mode;
}

std::size_t RunConfig::mc_replications() const {
  const auto b = get<std::size_t>(json_, "mc", "replications");
  if (b < 1) throw ConfigError("mc.replications must be >= 1");
  return b;
}

bool RunConfig::dump_cloud() const { return get<bool>(json_, "", "dump_cloud"); }
bool RunConfig::checkpoint() const { return get<bool>(json_, "", "checkpoint"); }

void RunConfig::validate(const std::string& command) const {
  output_dir();
  dump_cloud();
  checkpoint();
  const int pre = preprocess_detrend_degree();
  if (pre < -1) throw ConfigError("preprocess_detrend_degree must be >= -1");
  if (command == "simulate") {
    dgp();
  } else if (command == "detrend") {
    detrend_degree();
    if (input().empty()) throw ConfigError("'input' is required for detrend");
  } else if (command == "estimate" || command == "select") {
    smc();
    prior().validate(1);
    if (command == "estimate") model(1);
    if (command == "select") grid();
    if (input().empty()) throw ConfigError("'input' is required for " + command);
  } else if (command == "mc") {
    smc();
    dgp();
    mc_replications();
    if (mc_mode() == "identify") grid();
  }
}

}  // namespace marsmc::pipeline
