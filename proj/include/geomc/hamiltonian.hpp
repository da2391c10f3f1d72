#ifndef GEOMC_HAMILTONIAN_HPP
#define GEOMC_HAMILTONIAN_HPP

#include <optional>

#include "geomc/geometry.hpp"
#include "geomc/random.hpp"
#include "geomc/target.hpp"

namespace geomc {

struct PhaseState {
  Vector q;
  Vector p;
};

struct HamiltonianEval {
  double energy = 0.0;
  std::optional<Vector> grad_q;
  std::optional<Vector> grad_p;
};

/// Everything about a position that the integrators reuse across the
/// momentum-dependent parts of H.
struct PointGeometry {
  MetricEval metric;
  double log_pi = 0.0;
  Vector grad_log_pi;
  /// 1/2 tr(G^{-1} dG_i); present for order >= 1.
  Vector half_trace;

  /// -log pi + 1/2 log det G
  double potential() const { return -log_pi + 0.5 * metric.logdet(); }
  /// gradient of potential(); order >= 1 only
  Vector grad_potential() const { return -grad_log_pi + half_trace; }
};

PointGeometry evaluate_point(const TargetModel& target, const Vector& q, int order);

/// H(q, p) = -log pi(q) + 1/2 log det G(q) + 1/2 p^T G(q)^{-1} p, with log pi
/// unnormalized.
double hamiltonian(const TargetModel& target, const PhaseState& s);
double hamiltonian(const PointGeometry& point, const Vector& p);

/// Component i: -d_i log pi + 1/2 tr(G^{-1} d_i G) - 1/2 p^T G^{-1} (d_i G) G^{-1} p.
Vector grad_q_hamiltonian(const TargetModel& target, const PhaseState& s);
Vector grad_q_hamiltonian(const PointGeometry& point, const Vector& p);

/// G^{-1}(q) p.
Vector grad_p_hamiltonian(const TargetModel& target, const PhaseState& s);

HamiltonianEval evaluate_hamiltonian(const TargetModel& target, const PhaseState& s, bool want_grad_q,
                                     bool want_grad_p);

struct PotentialEval {
  double value = 0.0;
  Vector gradient;
};

/// U(q) = -log pi(q) + 1/2 log det G(q) and its gradient.
PotentialEval lagrangian_potential(const TargetModel& target, const Vector& q);

/// p = L z with G(q) = L L^T and z drawn from rng, so p ~ N(0, G(q)).
Vector sample_momentum(const TargetModel& target, const Vector& q, Rng& rng);
Vector sample_momentum(const MetricEval& metric, Rng& rng);

}  // namespace geomc

#endif  // GEOMC_HAMILTONIAN_HPP
