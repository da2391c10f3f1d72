#ifndef GEOMC_HARNESS_HPP
#define GEOMC_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geomc/diagnostics.hpp"
#include "geomc/kernels.hpp"
#include "geomc/targets.hpp"

namespace geomc {

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr int kDefaultCurveChains = 512;

struct TargetConfig {
  /// banana | funnel | student_t | gaussian | logistic
  std::string id = "banana";

  // banana
  int n_obs = 100;
  double sigma_y = 2.0;
  double sigma_theta = 1.0;
  std::vector<double> y;
  std::uint64_t data_seed = 20220101;

  // funnel
  int funnel_n = 10;

  // student_t
  int m = 5;
  double nu = 5.0;
  /// Explicit diagonal scale; when empty, diag(1, ..., 1, sigma_last).
  std::vector<double> sigma_diag;
  double sigma_last = 100.0;

  // gaussian
  std::vector<double> mean{0.0, 0.0};
  std::vector<std::vector<double>> cov{{1.0, 0.0}, {0.0, 1.0}};
  /// fisher | warped | identity
  std::string gaussian_metric = "fisher";
  double kappa = 0.5;

  // logistic; a synthetic n_obs x m design is generated when data_path is empty
  std::string data_path;
  int logistic_n_obs = 270;
  int logistic_m = 14;
  std::uint64_t logistic_data_seed = 20220101;
  double omega = 10.0;
  double theta = 2.0;
  std::optional<double> initial_alpha;
};

enum class Command { run, mmd_curve, reference, diagnose };

struct ExperimentConfig {
  TargetConfig target;
  /// ehmc | rmhmc | lmc | mala | mmala | smala | lmrmhmc | lmlmc
  std::string kernel = "lmrmhmc";
  double step_size = 0.1;
  std::optional<double> langevin_step_size;
  int k_max = 10;
  /// Defaults to 0.1 for lmrmhmc/lmlmc and 0 for ehmc/rmhmc/lmc.
  std::optional<double> alpha1;
  /// Defaults to mala for ehmc, smala on the funnel, mmala otherwise.
  std::optional<std::string> langevin_variant;
  /// auto | target | identity. auto: identity for ehmc and mala, the target's
  /// own metric for every other kernel.
  std::string metric = "auto";
  double softabs_alpha = SoftAbsMetric::kDefaultAlpha;
  double fp_tol = 1e-10;
  int fp_max_iters = 50;

  int n_steps = 1000;
  /// Unset: 1 chain for run, kDefaultCurveChains for mmd-curve.
  std::optional<int> n_chains;
  int n_reference = 2000;
  std::uint64_t base_seed = 0;
  std::string out_dir = ".";
  /// Shared starting point; the origin when unset (beta only for logistic).
  std::optional<std::vector<double>> initial_point;
  int workers = 1;
  std::string bandwidth_mode = "squared";
  /// Optional prefix for output file names.
  std::string name;

  double effective_alpha1() const;
  std::string effective_langevin_variant() const;
  bool uses_identity_metric() const;
  int chains_for(Command command) const;
};

/// Parses and validates a JSON config. Unknown keys and malformed values raise
/// ValidationError naming the field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Field-level checks; some depend on the command (mmd-curve needs >= 2 chains).
void validate(const ExperimentConfig& cfg, Command command = Command::run);

/// Echo with all defaults resolved; parse_config(to_json(cfg)) reproduces cfg.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Dimension of one trace row (the logistic trace carries beta and alpha).
int state_dim(const ExperimentConfig& cfg);

/// One Markov transition of the configured kernel on the configured target.
/// For the logistic target the state is (beta, alpha): beta moves by the
/// kernel conditional on alpha, then alpha is drawn from its full conditional.
class ChainSampler {
 public:
  explicit ChainSampler(const ExperimentConfig& cfg);

  int dim() const { return dim_; }
  Vector initial_state() const;
  KernelOutcome step(const Vector& state, Rng& rng) const;

  bool has_reference_sampler() const;
  Vector sample_reference(Rng& rng) const;

  const ExperimentConfig& config() const { return cfg_; }

 private:
  KernelOutcome transition(const TargetModel& target, const Vector& q, Rng& rng) const;

  ExperimentConfig cfg_;
  int dim_ = 0;
  std::optional<TargetModel> target_;
  std::optional<HierLogistic> logistic_;
  std::shared_ptr<const Metric> override_metric_;
  bool pure_langevin_ = false;
  LangevinVariant variant_ = LangevinVariant::mmala;
  MixtureSpec mixture_;
};

/// In-memory form of a trace CSV.
struct TraceData {
  std::optional<nlohmann::json> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> chain;
  std::vector<int> branch;
  std::vector<double> accept_prob;
  std::vector<int> accepted;
  std::vector<double> sq_jump;
  Matrix q;  // n_steps x dim

  int n_steps() const { return static_cast<int>(branch.size()); }
};

/// Runs one chain of cfg.n_steps transitions from the configured start with
/// rng stream `chain`.
TraceData sample_chain(const ChainSampler& sampler, int chain, double* wall_time_sec = nullptr);

void write_trace(const std::string& path, const TraceData& trace);
/// Throws SchemaError on an empty file, a bad header or a malformed row.
TraceData read_trace(const std::string& path);

/// Metrics computed from a trace alone (everything except wall time).
nlohmann::json trace_metrics(const TraceData& trace);

struct RunOutputs {
  std::vector<std::string> trace_files;
  std::vector<std::string> metrics_files;
};

/// Runs cfg.n_chains independent replicates (stream = chain index), writing
/// one trace CSV and one metrics JSON per chain.
RunOutputs run_chain(const ExperimentConfig& cfg);

struct MmdCurve {
  std::vector<int> step;
  std::vector<double> mmd_u2_abs;
  double bandwidth = 0.0;
  /// least-squares fit of log |MMD^2_u| against step (zero values skipped)
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Reference draws from stream streams::kReference of cfg.base_seed.
Matrix draw_reference(const ChainSampler& sampler, int n_reference, std::uint64_t base_seed);

/// n_chains chains from the shared initial point; after every step the
/// chains' current states are compared with the reference set.
MmdCurve compute_mmd_curve(const ExperimentConfig& cfg);

/// Writes the curve CSV and a summary JSON; returns the curve file path.
std::string mmd_curve(const ExperimentConfig& cfg);

/// Writes the reference CSV; returns its path.
std::string reference(const ExperimentConfig& cfg);

void write_samples_csv(const std::string& path, const Matrix& samples);
Matrix read_samples_csv(const std::string& path);

/// Per-trace metrics and, with a reference file, random-projection KS
/// statistics of the pooled trace states against it.
nlohmann::json diagnose(const std::vector<std::string>& trace_files, const std::optional<std::string>& reference_file,
                        int n_projections = 100, std::uint64_t seed = 0);

std::string format_double(double x);

}  // namespace geomc

#endif  // GEOMC_HARNESS_HPP
