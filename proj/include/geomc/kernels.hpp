#ifndef GEOMC_KERNELS_HPP
#define GEOMC_KERNELS_HPP

#include <optional>
#include <string>
#include <vector>

#include "geomc/integrators.hpp"
#include "geomc/random.hpp"
#include "geomc/target.hpp"

namespace geomc {

/// Result of one marginal (position-only) transition.
struct KernelOutcome {
  Vector next;
  Vector proposal;
  double accept_prob = 0.0;
  bool accepted = false;
  /// number of integration steps used; 1 also marks the Langevin branch
  int branch = 1;
  /// accept_prob * |proposal - current|^2
  double sq_jump = 0.0;
  /// integration or metric evaluation failed and the move was rejected
  bool failed = false;
};

struct AcceptDecision {
  double accept_prob = 0.0;
  bool accepted = false;
};

/// Metropolis decision with log ratio `log_ratio`; consumes exactly one
/// uniform. NaN or -inf ratios give probability zero.
AcceptDecision metropolis_accept(double log_ratio, Rng& rng);

/// alpha = min{1, exp(log_pi_proposed - log_pi_current + log_jacobian)}.
AcceptDecision imc_accept(double log_pi_current, double log_pi_proposed, double log_jacobian, Rng& rng);

struct HmcSpec {
  Scheme scheme = Scheme::generalized;
  double step_size = 0.1;
  int k = 1;
  double fp_tol = 1e-10;
  int fp_max_iters = 50;

  IntegratorConfig integrator() const { return {step_size, fp_tol, fp_max_iters}; }
};

/// Gibbs momentum refresh p ~ N(0, G(q)), k steps of the chosen integrator
/// followed by the momentum flip, and an involutive accept/reject on
/// exp(-H) (plus the log-Jacobian for the Lagrangian scheme). The momentum is
/// discarded afterwards. Draws m normals and then one uniform, always.
KernelOutcome hmc_transition(const TargetModel& target, const Vector& q, const HmcSpec& spec, Rng& rng);

enum class LangevinVariant {
  /// constant preconditioner A = G^{-1}; requires a constant metric
  mala,
  /// drift (eps^2 / 2) (A grad log pi + Gamma) with Gamma_i = sum_j dA_ij / dq_j
  mmala,
  /// the MMALA drift without Gamma
  smala
};

std::string to_string(LangevinVariant variant);
LangevinVariant langevin_variant_from_string(const std::string& name);

/// Metropolis-adjusted Langevin step with proposal
///   q' ~ N(q + c(q), eps^2 G(q)^{-1}),
/// drawn as q' = q + c(q) + eps L^{-T} z with G = L L^T, and the full
/// asymmetric proposal-density correction. Draws m normals then one uniform.
KernelOutcome langevin_transition(const TargetModel& target, const Vector& q, LangevinVariant variant,
                                  double step_size, Rng& rng);

struct MixtureSpec {
  /// probability of the Langevin branch; 0 selects the unmodified mixture
  double alpha1 = 0.1;
  int k_max = 10;
  double step_size = 0.1;
  LangevinVariant langevin_variant = LangevinVariant::mmala;
  Scheme scheme = Scheme::generalized;
  /// step size of the Langevin branch when it differs from step_size
  std::optional<double> langevin_step_size;
  double fp_tol = 1e-10;
  int fp_max_iters = 50;

  void validate() const;
  /// (alpha_1, ..., alpha_kmax). For alpha1 > 0 the remaining mass is split
  /// equally over k = 2..k_max; alpha1 == 0 gives 1/k_max everywhere.
  std::vector<double> weights() const;
};

/// Draws k in {1, ..., k_max} with the mixture weights (one uniform).
int draw_branch(const MixtureSpec& mix, Rng& rng);

/// One step of the Langevin-mixture kernel. Branch 1 is the Langevin kernel
/// when alpha1 > 0 and a single integration step when alpha1 == 0; branch
/// k >= 2 is hmc_transition with k steps.
KernelOutcome mixture_transition(const TargetModel& target, const Vector& q, const MixtureSpec& mix, Rng& rng);

}  // namespace geomc

#endif  // GEOMC_KERNELS_HPP
