#include <chrono>

#include "geomc/errors.hpp"
#include "geomc/harness.hpp"

namespace geomc {

namespace {

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

TargetModel build_target(const ExperimentConfig& cfg) {
  const TargetConfig& t = cfg.target;
  if (t.id == "banana") {
    BananaConfig b;
    b.n_obs = t.n_obs;
    b.sigma_y = t.sigma_y;
    b.sigma_theta = t.sigma_theta;
    b.y = t.y;
    b.data_seed = t.data_seed;
    return make_banana(b);
  }
  if (t.id == "funnel") return make_funnel(t.funnel_n, cfg.softabs_alpha);
  if (t.id == "student_t") {
    const Vector sigma = t.sigma_diag.empty() ? multiscale_diag(t.m, t.sigma_last) : to_vector(t.sigma_diag);
    return make_student_t(t.m, t.nu, sigma);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(t.mean.size());
  Matrix cov(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) cov(i, j) = t.cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (!cov.isApprox(cov.transpose())) throw ValidationError("target.cov must be symmetric");
  const GaussianMetric metric = t.gaussian_metric == "warped"     ? GaussianMetric::warped
                                : t.gaussian_metric == "identity" ? GaussianMetric::identity
                                                                  : GaussianMetric::fisher;
  try {
    return make_gaussian(to_vector(t.mean), cov, metric, t.kappa);
  } catch (const NotPositiveDefinite&) {
    throw ValidationError("target.cov must be positive definite");
  }
}

}  // namespace

ChainSampler::ChainSampler(const ExperimentConfig& cfg) : cfg_(cfg) {
  validate(cfg_, Command::diagnose);
  if (cfg_.target.id == "logistic") {
    LogisticData data = cfg_.target.data_path.empty()
                            ? synthesize_logistic_data(cfg_.target.logistic_n_obs, cfg_.target.logistic_m,
                                                       cfg_.target.logistic_data_seed)
                            : load_design_csv(cfg_.target.data_path);
    logistic_.emplace(std::move(data), cfg_.target.omega, cfg_.target.theta);
    dim_ = logistic_->dim() + 1;
    if (cfg_.initial_point && static_cast<int>(cfg_.initial_point->size()) != logistic_->dim())
      throw ValidationError("initial_point must have " + std::to_string(logistic_->dim()) + " entries");
  } else {
    target_.emplace(build_target(cfg_));
    dim_ = target_->dim();
  }

  const int metric_dim = logistic_ ? logistic_->dim() : dim_;
  const bool identity = cfg_.uses_identity_metric();
  if (identity) override_metric_ = ConstantMetric::identity(metric_dim);
  const bool constant = identity || (target_ && target_->metric().is_constant());

  const std::string& k = cfg_.kernel;
  variant_ = langevin_variant_from_string(cfg_.effective_langevin_variant());
  pure_langevin_ = (k == "mala" || k == "mmala" || k == "smala");

  mixture_.alpha1 = cfg_.effective_alpha1();
  mixture_.k_max = cfg_.k_max;
  mixture_.step_size = cfg_.step_size;
  mixture_.langevin_variant = variant_;
  mixture_.langevin_step_size = cfg_.langevin_step_size;
  mixture_.fp_tol = cfg_.fp_tol;
  mixture_.fp_max_iters = cfg_.fp_max_iters;
  if (k == "ehmc") {
    mixture_.scheme = Scheme::euclidean;
  } else if (k == "lmc" || k == "lmlmc") {
    mixture_.scheme = Scheme::lagrangian;
  } else {
    mixture_.scheme = Scheme::generalized;
  }
  mixture_.validate();

  if (!constant && mixture_.scheme == Scheme::euclidean && !pure_langevin_)
    throw ValidationError("metric must be constant for kernel ehmc (use \"identity\")");
  const bool langevin_used = pure_langevin_ || mixture_.alpha1 > 0.0;
  if (!constant && langevin_used && variant_ == LangevinVariant::mala)
    throw ValidationError("langevin_variant mala requires a constant metric");
}

Vector ChainSampler::initial_state() const {
  Vector q = Vector::Zero(dim_);
  if (cfg_.initial_point) q.head(static_cast<Eigen::Index>(cfg_.initial_point->size())) = to_vector(*cfg_.initial_point);
  if (logistic_) q[dim_ - 1] = cfg_.target.initial_alpha.value_or(cfg_.target.omega * cfg_.target.theta);
  return q;
}

KernelOutcome ChainSampler::transition(const TargetModel& target, const Vector& q, Rng& rng) const {
  const TargetModel model = override_metric_ ? target.with_metric(override_metric_) : target;
  if (pure_langevin_) {
    return langevin_transition(model, q, variant_, cfg_.langevin_step_size.value_or(cfg_.step_size), rng);
  }
  return mixture_transition(model, q, mixture_, rng);
}

KernelOutcome ChainSampler::step(const Vector& state, Rng& rng) const {
  if (!logistic_) return transition(*target_, state, rng);

  const Eigen::Index m = dim_ - 1;
  const double alpha = state[m];
  KernelOutcome inner = transition(logistic_->conditional(alpha), state.head(m), rng);
  LogisticGibbsState gibbs{inner.next, alpha};
  const double new_alpha = logistic_->gibbs_alpha_update(gibbs, rng);

  KernelOutcome out = inner;
  out.next.resize(dim_);
  out.next << inner.next, new_alpha;
  out.proposal.resize(dim_);
  out.proposal << inner.proposal, alpha;
  return out;
}

bool ChainSampler::has_reference_sampler() const { return target_ && target_->has_reference_sampler(); }

Vector ChainSampler::sample_reference(Rng& rng) const {
  if (!has_reference_sampler())
    throw MissingReferenceSampler("target '" + cfg_.target.id + "' has no reference sampler");
  return target_->sample_reference(rng);
}

TraceData sample_chain(const ChainSampler& sampler, int chain, double* wall_time_sec) {
  const ExperimentConfig& cfg = sampler.config();
  const int n = cfg.n_steps;
  TraceData trace;
  // output location and worker count do not affect the draws
  trace.config = to_json(cfg);
  trace.config->erase("out_dir");
  trace.config->erase("workers");
  trace.seed = cfg.base_seed;
  trace.chain = chain;
  trace.branch.resize(static_cast<std::size_t>(n));
  trace.accept_prob.resize(static_cast<std::size_t>(n));
  trace.accepted.resize(static_cast<std::size_t>(n));
  trace.sq_jump.resize(static_cast<std::size_t>(n));
  trace.q.resize(n, sampler.dim());

  Rng rng(cfg.base_seed, static_cast<std::uint64_t>(chain));
  Vector state = sampler.initial_state();
  const auto start = std::chrono::steady_clock::now();
  for (int s = 0; s < n; ++s) {
    KernelOutcome out = sampler.step(state, rng);
    const auto i = static_cast<std::size_t>(s);
    trace.branch[i] = out.branch;
    trace.accept_prob[i] = out.accept_prob;
    trace.accepted[i] = out.accepted ? 1 : 0;
    trace.sq_jump[i] = out.sq_jump;
    trace.q.row(s) = out.next.transpose();
    state = std::move(out.next);
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  if (wall_time_sec) *wall_time_sec = elapsed.count();
  return trace;
}

}  // namespace geomc
