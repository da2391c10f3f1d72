#include "geomc/kernels.hpp"

#include <cmath>

#include "geomc/errors.hpp"

namespace geomc {

namespace {

KernelOutcome rejected(const Vector& q, Vector proposal, int branch) {
  KernelOutcome out;
  out.next = q;
  out.proposal = std::move(proposal);
  out.branch = branch;
  out.failed = true;
  return out;
}

KernelOutcome finish(const Vector& q, Vector proposal, AcceptDecision decision, int branch) {
  KernelOutcome out;
  out.accept_prob = decision.accept_prob;
  out.accepted = decision.accepted;
  out.sq_jump = decision.accept_prob * (proposal - q).squaredNorm();
  out.next = decision.accepted ? proposal : q;
  out.proposal = std::move(proposal);
  out.branch = branch;
  return out;
}

/// log N(x; mean, eps^2 G^{-1}) up to the -m log(eps) - m/2 log(2 pi) constant.
double log_proposal_density(const PointGeometry& base, const Vector& x, const Vector& mean, double step_size) {
  const double quad = base.metric.factor.quadratic_form(x - mean);
  return -0.5 * quad / (step_size * step_size) + 0.5 * base.metric.logdet();
}

Vector langevin_mean(const PointGeometry& point, const Vector& q, LangevinVariant variant, double step_size) {
  const double half_eps2 = 0.5 * step_size * step_size;
  Vector drift = point.metric.factor.solve(point.grad_log_pi);
  if (variant == LangevinVariant::mmala) drift += divergence_drift(point.metric);
  return q + half_eps2 * drift;
}

}  // namespace

AcceptDecision metropolis_accept(double log_ratio, Rng& rng) {
  const double u = rng.uniform();
  double prob = 0.0;
  if (std::isnan(log_ratio) || log_ratio == -INFINITY) {
    prob = 0.0;
  } else if (log_ratio >= 0.0) {
    prob = 1.0;
  } else {
    prob = std::exp(log_ratio);
  }
  return {prob, u < prob};
}

AcceptDecision imc_accept(double log_pi_current, double log_pi_proposed, double log_jacobian, Rng& rng) {
  return metropolis_accept(log_pi_proposed - log_pi_current + log_jacobian, rng);
}

KernelOutcome hmc_transition(const TargetModel& target, const Vector& q, const HmcSpec& spec, Rng& rng) {
  if (spec.k < 1) throw std::invalid_argument("hmc_transition requires k >= 1");
  const Eigen::Index m = q.size();
  std::optional<CachedPoint> start;
  try {
    start.emplace(cache_point(target, q, spec.scheme));
  } catch (const NumericalError&) {
    rng.normal_vector(m);
    rng.uniform();
    return rejected(q, q, spec.k);
  }

  const Vector p = sample_momentum(start->geometry.metric, rng);
  const double h_start = hamiltonian(start->geometry, p);
  Trajectory traj = integrate_from(target, std::move(*start), {q, p}, spec.integrator(), spec.k, spec.scheme);
  if (!traj.result.converged || !traj.end) {
    rng.uniform();
    return rejected(q, traj.result.state.q, spec.k);
  }
  const double h_end = hamiltonian(traj.end->geometry, traj.result.state.p);
  const AcceptDecision decision = imc_accept(-h_start, -h_end, traj.result.log_jacobian, rng);
  return finish(q, std::move(traj.result.state.q), decision, spec.k);
}

std::string to_string(LangevinVariant variant) {
  switch (variant) {
    case LangevinVariant::mala:
      return "mala";
    case LangevinVariant::mmala:
      return "mmala";
    case LangevinVariant::smala:
      return "smala";
  }
  return "unknown";
}

LangevinVariant langevin_variant_from_string(const std::string& name) {
  if (name == "mala") return LangevinVariant::mala;
  if (name == "mmala") return LangevinVariant::mmala;
  if (name == "smala") return LangevinVariant::smala;
  throw std::invalid_argument("unknown Langevin variant '" + name + "'");
}

KernelOutcome langevin_transition(const TargetModel& target, const Vector& q, LangevinVariant variant,
                                  double step_size, Rng& rng) {
  if (variant == LangevinVariant::mala && !target.metric().is_constant())
    throw std::invalid_argument("MALA requires a constant preconditioner");
  if (step_size == 0.0) throw std::invalid_argument("Langevin step size must be nonzero");
  const int order = variant == LangevinVariant::mmala ? 1 : 0;
  const Eigen::Index m = q.size();

  std::optional<PointGeometry> here;
  try {
    here.emplace(evaluate_point(target, q, order));
  } catch (const NumericalError&) {
    rng.normal_vector(m);
    rng.uniform();
    return rejected(q, q, 1);
  }

  const Vector mean_fwd = langevin_mean(*here, q, variant, step_size);
  const Vector z = rng.normal_vector(m);
  Vector proposal = mean_fwd + step_size * here->metric.factor.inverse_transpose_transform(z);

  std::optional<PointGeometry> there;
  try {
    there.emplace(evaluate_point(target, proposal, order));
  } catch (const NumericalError&) {
    rng.uniform();
    return rejected(q, std::move(proposal), 1);
  }
  const Vector mean_rev = langevin_mean(*there, proposal, variant, step_size);

  const double log_ratio = there->log_pi - here->log_pi + log_proposal_density(*there, q, mean_rev, step_size) -
                           log_proposal_density(*here, proposal, mean_fwd, step_size);
  return finish(q, std::move(proposal), metropolis_accept(log_ratio, rng), 1);
}

void MixtureSpec::validate() const {
  if (!(alpha1 >= 0.0 && alpha1 <= 1.0)) throw std::invalid_argument("alpha1 must lie in [0, 1]");
  if (k_max < 2) throw std::invalid_argument("k_max must be >= 2");
  if (step_size == 0.0 || !std::isfinite(step_size)) throw std::invalid_argument("step size must be finite and nonzero");
  if (langevin_step_size && (*langevin_step_size == 0.0 || !std::isfinite(*langevin_step_size)))
    throw std::invalid_argument("Langevin step size must be finite and nonzero");
  if (!(fp_tol > 0.0)) throw std::invalid_argument("fp_tol must be positive");
  if (fp_max_iters < 1) throw std::invalid_argument("fp_max_iters must be >= 1");
}

std::vector<double> MixtureSpec::weights() const {
  std::vector<double> w(static_cast<std::size_t>(k_max));
  if (alpha1 == 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / k_max);
  } else {
    w[0] = alpha1;
    for (int k = 2; k <= k_max; ++k) w[static_cast<std::size_t>(k - 1)] = (1.0 - alpha1) / (k_max - 1);
  }
  return w;
}

int draw_branch(const MixtureSpec& mix, Rng& rng) {
  const std::vector<double> w = mix.weights();
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k];
    if (u < acc) return static_cast<int>(k) + 1;
  }
  // u landed in the rounding gap above the last partial sum
  for (std::size_t k = w.size(); k-- > 0;) {
    if (w[k] > 0.0) return static_cast<int>(k) + 1;
  }
  return 1;
}

KernelOutcome mixture_transition(const TargetModel& target, const Vector& q, const MixtureSpec& mix, Rng& rng) {
  const int k = draw_branch(mix, rng);
  if (k == 1 && mix.alpha1 > 0.0) {
    return langevin_transition(target, q, mix.langevin_variant, mix.langevin_step_size.value_or(mix.step_size), rng);
  }
  return hmc_transition(target, q, {mix.scheme, mix.step_size, k, mix.fp_tol, mix.fp_max_iters}, rng);
}

}  // namespace geomc
