#ifndef GEOMC_INTEGRATORS_HPP
#define GEOMC_INTEGRATORS_HPP

#include <optional>
#include <string>

#include "geomc/hamiltonian.hpp"

namespace geomc {

enum class Scheme { euclidean, generalized, lagrangian };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct IntegratorConfig {
  double step_size = 0.1;
  /// sup-norm tolerance on successive fixed-point iterates
  double fp_tol = 1e-10;
  int fp_max_iters = 50;
};

struct StepResult {
  PhaseState state;
  /// log |det| of the map's Jacobian; zero for the symplectic schemes
  double log_jacobian = 0.0;
  bool converged = true;
  int fp_iters_used = 0;
};

/// Explicit leapfrog for a constant metric. Throws std::invalid_argument if
/// the target's metric is position dependent.
StepResult euclidean_leapfrog_step(const TargetModel& target, const PhaseState& s, const IntegratorConfig& cfg);

/// Implicit generalized leapfrog. Both implicit equations are solved by Picard
/// iteration started at the current value; failure to reach fp_tol within
/// fp_max_iters is reported through `converged`, never thrown.
StepResult generalized_leapfrog_step(const TargetModel& target, const PhaseState& s, const IntegratorConfig& cfg);

/// Explicit Lagrangian leapfrog in velocity coordinates (v = G^{-1} p on
/// entry, p = G v on exit) with the analytic log-Jacobian of the map.
/// Throws SingularUpdate if an (I + eps/2 Omega) system is singular.
StepResult lagrangian_leapfrog_step(const TargetModel& target, const PhaseState& s, const IntegratorConfig& cfg);

/// A point evaluated once and reused by consecutive integrator steps.
struct CachedPoint {
  PointGeometry geometry;
  std::optional<ChristoffelTensor> gamma;
};

CachedPoint cache_point(const TargetModel& target, const Vector& q, Scheme scheme);

struct Trajectory {
  StepResult result;
  /// geometry at the final position; empty when the trajectory failed
  std::optional<CachedPoint> end;
};

/// k steps of `scheme` followed by the momentum flip (q, p) -> (q, -p).
/// Numerical failures in any step abort the composition with converged = false.
Trajectory integrate_from(const TargetModel& target, CachedPoint start, const PhaseState& s,
                          const IntegratorConfig& cfg, int k, Scheme scheme);

StepResult integrate(const TargetModel& target, const PhaseState& s, const IntegratorConfig& cfg, int k,
                     Scheme scheme);

}  // namespace geomc

#endif  // GEOMC_INTEGRATORS_HPP
