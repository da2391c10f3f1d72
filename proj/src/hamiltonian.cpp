#include "geomc/hamiltonian.hpp"

#include <cmath>

#include "geomc/errors.hpp"

namespace geomc {

PointGeometry evaluate_point(const TargetModel& target, const Vector& q, int order) {
  PointGeometry out{metric_eval(target, q, order), target.log_density(q), target.grad_log_density(q), {}};
  if (!std::isfinite(out.log_pi)) throw NonFinite("log density is not finite");
  if (!out.grad_log_pi.allFinite()) throw NonFinite("log density gradient is not finite");
  if (order >= 1) {
    const Eigen::Index m = q.size();
    out.half_trace.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      out.half_trace[i] = 0.5 * out.metric.factor.solve(out.metric.dg[i].matrix()).trace();
    }
  }
  return out;
}

double hamiltonian(const PointGeometry& point, const Vector& p) {
  const Vector v = point.metric.factor.solve(p);
  return point.potential() + 0.5 * p.dot(v);
}

double hamiltonian(const TargetModel& target, const PhaseState& s) {
  if (s.p.size() != s.q.size()) throw DimensionMismatch("phase state q and p differ in size");
  return hamiltonian(evaluate_point(target, s.q, 0), s.p);
}

Vector grad_q_hamiltonian(const PointGeometry& point, const Vector& p) {
  const Vector v = point.metric.factor.solve(p);
  Vector out = point.grad_potential();
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] -= 0.5 * v.dot(point.metric.dg[i].matrix() * v);
  return out;
}

Vector grad_q_hamiltonian(const TargetModel& target, const PhaseState& s) {
  return grad_q_hamiltonian(evaluate_point(target, s.q, 1), s.p);
}

Vector grad_p_hamiltonian(const TargetModel& target, const PhaseState& s) {
  return metric_eval(target, s.q, 0).factor.solve(s.p);
}

HamiltonianEval evaluate_hamiltonian(const TargetModel& target, const PhaseState& s, bool want_grad_q,
                                     bool want_grad_p) {
  const PointGeometry point = evaluate_point(target, s.q, want_grad_q ? 1 : 0);
  HamiltonianEval out;
  out.energy = hamiltonian(point, s.p);
  if (want_grad_q) out.grad_q = grad_q_hamiltonian(point, s.p);
  if (want_grad_p) out.grad_p = point.metric.factor.solve(s.p);
  return out;
}

PotentialEval lagrangian_potential(const TargetModel& target, const Vector& q) {
  const PointGeometry point = evaluate_point(target, q, 1);
  return {point.potential(), point.grad_potential()};
}

Vector sample_momentum(const MetricEval& metric, Rng& rng) {
  return metric.factor.transform(rng.normal_vector(metric.g.dim()));
}

Vector sample_momentum(const TargetModel& target, const Vector& q, Rng& rng) {
  return sample_momentum(metric_eval(target, q, 0), rng);
}

}  // namespace geomc
