#include <cmath>
#include <fstream>
#include <set>

#include "geomc/errors.hpp"
#include "geomc/harness.hpp"

namespace geomc {

using nlohmann::json;

namespace {

const std::set<std::string> kKernels{"ehmc", "rmhmc", "lmc", "mala", "mmala", "smala", "lmrmhmc", "lmlmc"};
const std::set<std::string> kTargets{"banana", "funnel", "student_t", "gaussian", "logistic"};

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ValidationError(field + " " + what); }

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) fail(field, "is out of range");
  return static_cast<int>(v);
}

std::uint64_t get_seed(const json& j, const std::string& field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) fail(field, "must be non-negative");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail(field, "must be a non-negative integer");
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "must be a string");
  return j.get<std::string>();
}

std::vector<double> get_vector(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) fail(prefix + key, "is not a recognized field");
  }
}

TargetConfig parse_target(const json& j) {
  if (!j.is_object()) fail("target", "must be an object");
  TargetConfig t;
  if (!j.contains("id")) fail("target.id", "is required");
  t.id = get_string(j.at("id"), "target.id");
  if (!kTargets.count(t.id)) fail("target.id", "must be one of banana, funnel, student_t, gaussian, logistic");

  auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = get_number(j.at(key), std::string("target.") + key);
  };
  auto integer = [&](const char* key, int& dst) {
    if (j.contains(key)) dst = get_int(j.at(key), std::string("target.") + key);
  };
  auto seed = [&](const char* key, std::uint64_t& dst) {
    if (j.contains(key)) dst = get_seed(j.at(key), std::string("target.") + key);
  };

  if (t.id == "banana") {
    check_keys(j, {"id", "n_obs", "sigma_y", "sigma_theta", "y", "data_seed"}, "target.");
    integer("n_obs", t.n_obs);
    num("sigma_y", t.sigma_y);
    num("sigma_theta", t.sigma_theta);
    if (j.contains("y")) t.y = get_vector(j.at("y"), "target.y");
    seed("data_seed", t.data_seed);
  } else if (t.id == "funnel") {
    check_keys(j, {"id", "n"}, "target.");
    integer("n", t.funnel_n);
  } else if (t.id == "student_t") {
    check_keys(j, {"id", "m", "nu", "sigma_diag", "sigma_last"}, "target.");
    integer("m", t.m);
    num("nu", t.nu);
    if (j.contains("sigma_diag")) t.sigma_diag = get_vector(j.at("sigma_diag"), "target.sigma_diag");
    num("sigma_last", t.sigma_last);
  } else if (t.id == "gaussian") {
    check_keys(j, {"id", "mean", "cov", "metric", "kappa"}, "target.");
    if (j.contains("mean")) t.mean = get_vector(j.at("mean"), "target.mean");
    if (j.contains("cov")) {
      const json& c = j.at("cov");
      if (!c.is_array()) fail("target.cov", "must be an array of rows");
      t.cov.clear();
      for (std::size_t i = 0; i < c.size(); ++i) t.cov.push_back(get_vector(c[i], "target.cov[" + std::to_string(i) + "]"));
    } else {
      t.cov.assign(t.mean.size(), std::vector<double>(t.mean.size(), 0.0));
      for (std::size_t i = 0; i < t.mean.size(); ++i) t.cov[i][i] = 1.0;
    }
    if (j.contains("metric")) t.gaussian_metric = get_string(j.at("metric"), "target.metric");
    num("kappa", t.kappa);
  } else {
    check_keys(j, {"id", "data", "n_obs", "m", "data_seed", "omega", "theta", "initial_alpha"}, "target.");
    if (j.contains("data")) t.data_path = get_string(j.at("data"), "target.data");
    integer("n_obs", t.logistic_n_obs);
    integer("m", t.logistic_m);
    seed("data_seed", t.logistic_data_seed);
    num("omega", t.omega);
    num("theta", t.theta);
    if (j.contains("initial_alpha")) t.initial_alpha = get_number(j.at("initial_alpha"), "target.initial_alpha");
  }
  return t;
}

json target_to_json(const TargetConfig& t) {
  json j{{"id", t.id}};
  if (t.id == "banana") {
    j["n_obs"] = t.n_obs;
    j["sigma_y"] = t.sigma_y;
    j["sigma_theta"] = t.sigma_theta;
    if (!t.y.empty()) j["y"] = t.y;
    j["data_seed"] = t.data_seed;
  } else if (t.id == "funnel") {
    j["n"] = t.funnel_n;
  } else if (t.id == "student_t") {
    j["m"] = t.m;
    j["nu"] = t.nu;
    if (!t.sigma_diag.empty()) j["sigma_diag"] = t.sigma_diag;
    j["sigma_last"] = t.sigma_last;
  } else if (t.id == "gaussian") {
    j["mean"] = t.mean;
    j["cov"] = t.cov;
    j["metric"] = t.gaussian_metric;
    j["kappa"] = t.kappa;
  } else if (t.id == "logistic") {
    if (!t.data_path.empty()) j["data"] = t.data_path;
    j["n_obs"] = t.logistic_n_obs;
    j["m"] = t.logistic_m;
    j["data_seed"] = t.logistic_data_seed;
    j["omega"] = t.omega;
    j["theta"] = t.theta;
    j["initial_alpha"] = t.initial_alpha.value_or(t.omega * t.theta);
  }
  return j;
}

void validate_target(const TargetConfig& t) {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string("target.") + field, "must be positive and finite");
  };
  if (t.id == "banana") {
    if (t.n_obs < 1) fail("target.n_obs", "must be ≥ 1");
    positive(t.sigma_y, "sigma_y");
    positive(t.sigma_theta, "sigma_theta");
    if (!t.y.empty() && static_cast<int>(t.y.size()) != t.n_obs) fail("target.y", "must have n_obs entries");
  } else if (t.id == "funnel") {
    if (t.funnel_n < 1) fail("target.n", "must be ≥ 1");
  } else if (t.id == "student_t") {
    if (t.m < 1) fail("target.m", "must be ≥ 1");
    if (!(t.nu > 2.0) || !std::isfinite(t.nu)) fail("target.nu", "must be > 2");
    if (!t.sigma_diag.empty()) {
      if (static_cast<int>(t.sigma_diag.size()) != t.m) fail("target.sigma_diag", "must have m entries");
      for (double s : t.sigma_diag) positive(s, "sigma_diag");
    } else {
      positive(t.sigma_last, "sigma_last");
    }
  } else if (t.id == "gaussian") {
    if (t.mean.empty()) fail("target.mean", "must be non-empty");
    if (t.cov.size() != t.mean.size()) fail("target.cov", "must be square with the dimension of mean");
    for (const auto& row : t.cov) {
      if (row.size() != t.mean.size()) fail("target.cov", "must be square with the dimension of mean");
    }
    if (t.gaussian_metric != "fisher" && t.gaussian_metric != "warped" && t.gaussian_metric != "identity")
      fail("target.metric", "must be one of fisher, warped, identity");
    if (!(t.kappa >= 0.0)) fail("target.kappa", "must be ≥ 0");
  } else if (t.id == "logistic") {
    if (t.data_path.empty()) {
      if (t.logistic_n_obs < 1) fail("target.n_obs", "must be ≥ 1");
      if (t.logistic_m < 1) fail("target.m", "must be ≥ 1");
    }
    positive(t.omega, "omega");
    positive(t.theta, "theta");
    if (t.initial_alpha) positive(*t.initial_alpha, "initial_alpha");
  }
}

}  // namespace

double ExperimentConfig::effective_alpha1() const {
  if (alpha1) return *alpha1;
  return (kernel == "lmrmhmc" || kernel == "lmlmc") ? 0.1 : 0.0;
}

std::string ExperimentConfig::effective_langevin_variant() const {
  if (kernel == "mala" || kernel == "mmala" || kernel == "smala") return kernel;
  if (langevin_variant) return *langevin_variant;
  if (kernel == "ehmc") return "mala";
  return target.id == "funnel" ? "smala" : "mmala";
}

int ExperimentConfig::chains_for(Command command) const {
  if (n_chains) return *n_chains;
  return command == Command::mmd_curve ? kDefaultCurveChains : 1;
}

bool ExperimentConfig::uses_identity_metric() const {
  if (metric == "identity") return true;
  if (metric == "target") return false;
  return kernel == "ehmc" || kernel == "mala";
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  check_keys(j,
             {"target", "kernel", "step_size", "langevin_step_size", "k_max", "alpha1", "langevin_variant", "metric",
              "softabs_alpha", "fp_tol", "fp_max_iters", "n_steps", "n_chains", "n_reference", "base_seed", "out_dir",
              "initial_point", "workers", "bandwidth_mode", "name"},
             "");
  ExperimentConfig cfg;
  if (!j.contains("target")) fail("target", "is required");
  cfg.target = parse_target(j.at("target"));
  if (j.contains("kernel")) cfg.kernel = get_string(j.at("kernel"), "kernel");
  if (j.contains("step_size")) cfg.step_size = get_number(j.at("step_size"), "step_size");
  if (j.contains("langevin_step_size") && !j.at("langevin_step_size").is_null())
    cfg.langevin_step_size = get_number(j.at("langevin_step_size"), "langevin_step_size");
  if (j.contains("k_max")) cfg.k_max = get_int(j.at("k_max"), "k_max");
  if (j.contains("alpha1") && !j.at("alpha1").is_null()) cfg.alpha1 = get_number(j.at("alpha1"), "alpha1");
  if (j.contains("langevin_variant") && !j.at("langevin_variant").is_null())
    cfg.langevin_variant = get_string(j.at("langevin_variant"), "langevin_variant");
  if (j.contains("metric")) cfg.metric = get_string(j.at("metric"), "metric");
  if (j.contains("softabs_alpha")) cfg.softabs_alpha = get_number(j.at("softabs_alpha"), "softabs_alpha");
  if (j.contains("fp_tol")) cfg.fp_tol = get_number(j.at("fp_tol"), "fp_tol");
  if (j.contains("fp_max_iters")) cfg.fp_max_iters = get_int(j.at("fp_max_iters"), "fp_max_iters");
  if (j.contains("n_steps")) cfg.n_steps = get_int(j.at("n_steps"), "n_steps");
  if (j.contains("n_chains") && !j.at("n_chains").is_null()) cfg.n_chains = get_int(j.at("n_chains"), "n_chains");
  if (j.contains("n_reference")) cfg.n_reference = get_int(j.at("n_reference"), "n_reference");
  if (j.contains("base_seed")) cfg.base_seed = get_seed(j.at("base_seed"), "base_seed");
  if (j.contains("out_dir")) cfg.out_dir = get_string(j.at("out_dir"), "out_dir");
  if (j.contains("initial_point") && !j.at("initial_point").is_null())
    cfg.initial_point = get_vector(j.at("initial_point"), "initial_point");
  if (j.contains("workers")) cfg.workers = get_int(j.at("workers"), "workers");
  if (j.contains("bandwidth_mode")) cfg.bandwidth_mode = get_string(j.at("bandwidth_mode"), "bandwidth_mode");
  if (j.contains("name")) cfg.name = get_string(j.at("name"), "name");
  validate(cfg, Command::diagnose);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

void validate(const ExperimentConfig& cfg, Command command) {
  validate_target(cfg.target);
  if (!kKernels.count(cfg.kernel))
    fail("kernel", "must be one of ehmc, rmhmc, lmc, mala, mmala, smala, lmrmhmc, lmlmc");
  if (!(cfg.step_size > 0.0) || !std::isfinite(cfg.step_size)) fail("step_size", "must be positive and finite");
  if (cfg.langevin_step_size && (!(*cfg.langevin_step_size > 0.0) || !std::isfinite(*cfg.langevin_step_size)))
    fail("langevin_step_size", "must be positive and finite");
  if (cfg.k_max < 2) fail("k_max", "must be ≥ 2");
  if (cfg.alpha1 && !(*cfg.alpha1 >= 0.0 && *cfg.alpha1 <= 1.0)) fail("alpha1", "must lie in [0, 1]");
  if (cfg.langevin_variant && *cfg.langevin_variant != "mala" && *cfg.langevin_variant != "mmala" &&
      *cfg.langevin_variant != "smala")
    fail("langevin_variant", "must be one of mala, mmala, smala");
  if (cfg.metric != "auto" && cfg.metric != "target" && cfg.metric != "identity")
    fail("metric", "must be one of auto, target, identity");
  if (!(cfg.softabs_alpha > 0.0) || !std::isfinite(cfg.softabs_alpha)) fail("softabs_alpha", "must be positive");
  if (!(cfg.fp_tol > 0.0)) fail("fp_tol", "must be positive");
  if (cfg.fp_max_iters < 1) fail("fp_max_iters", "must be ≥ 1");
  if (cfg.n_steps < 1) fail("n_steps", "must be ≥ 1");
  if (cfg.n_chains && *cfg.n_chains < 1) fail("n_chains", "must be ≥ 1");
  if (cfg.workers < 1) fail("workers", "must be ≥ 1");
  if (cfg.bandwidth_mode != "squared" && cfg.bandwidth_mode != "unsquared")
    fail("bandwidth_mode", "must be squared or unsquared");
  if (cfg.initial_point) {
    const int beta_dim = cfg.target.id == "logistic" ? state_dim(cfg) - 1 : state_dim(cfg);
    if (beta_dim > 0 && static_cast<int>(cfg.initial_point->size()) != beta_dim)
      fail("initial_point", "must have " + std::to_string(beta_dim) + " entries");
    for (double v : *cfg.initial_point) {
      if (!std::isfinite(v)) fail("initial_point", "must be finite");
    }
  }
  if (command == Command::mmd_curve) {
    if (cfg.chains_for(command) < 2) fail("n_chains", "must be ≥ 2 for mmd-curve");
    if (cfg.n_reference < 2) fail("n_reference", "must be ≥ 2 for mmd-curve");
  }
  if (command == Command::reference && cfg.n_reference < 1) fail("n_reference", "must be ≥ 1");
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["target"] = target_to_json(cfg.target);
  j["kernel"] = cfg.kernel;
  j["step_size"] = cfg.step_size;
  j["langevin_step_size"] = cfg.langevin_step_size ? json(*cfg.langevin_step_size) : json(nullptr);
  j["k_max"] = cfg.k_max;
  j["alpha1"] = cfg.effective_alpha1();
  j["langevin_variant"] = cfg.effective_langevin_variant();
  j["metric"] = cfg.metric;
  j["softabs_alpha"] = cfg.softabs_alpha;
  j["fp_tol"] = cfg.fp_tol;
  j["fp_max_iters"] = cfg.fp_max_iters;
  j["n_steps"] = cfg.n_steps;
  j["n_chains"] = cfg.n_chains ? json(*cfg.n_chains) : json(nullptr);
  j["n_reference"] = cfg.n_reference;
  j["base_seed"] = cfg.base_seed;
  j["out_dir"] = cfg.out_dir;
  j["initial_point"] = cfg.initial_point ? json(*cfg.initial_point) : json(nullptr);
  j["workers"] = cfg.workers;
  j["bandwidth_mode"] = cfg.bandwidth_mode;
  j["name"] = cfg.name;
  return j;
}

int state_dim(const ExperimentConfig& cfg) {
  const TargetConfig& t = cfg.target;
  if (t.id == "banana") return 2;
  if (t.id == "funnel") return t.funnel_n + 1;
  if (t.id == "student_t") return t.m;
  if (t.id == "gaussian") return static_cast<int>(t.mean.size());
  if (t.id == "logistic") {
    // the design file determines m; 0 signals "unknown until loaded"
    return t.data_path.empty() ? t.logistic_m + 1 : 0;
  }
  return 0;
}

}  // namespace geomc
