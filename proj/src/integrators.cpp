#include "geomc/integrators.hpp"

#include <cmath>

#include "geomc/errors.hpp"

namespace geomc {

namespace {

struct LinearUpdate {
  Eigen::PartialPivLU<Matrix> lu;
  double log_abs_det = 0.0;
};

double log_abs_det(const Eigen::PartialPivLU<Matrix>& lu) {
  return lu.matrixLU().diagonal().array().abs().log().sum();
}

LinearUpdate factor_update(const Matrix& a) {
  LinearUpdate out{Eigen::PartialPivLU<Matrix>(a), 0.0};
  out.log_abs_det = log_abs_det(out.lu);
  if (!std::isfinite(out.log_abs_det)) throw SingularUpdate("(I + eps/2 Omega) is singular; step size too large?");
  return out;
}

double log_abs_det_of(const Matrix& a) {
  const double v = log_abs_det(Eigen::PartialPivLU<Matrix>(a));
  if (!std::isfinite(v)) throw SingularUpdate("(I - eps/2 Omega) is singular");
  return v;
}

struct StepOutput {
  StepResult result;
  std::optional<CachedPoint> end;
};

void require_constant(const TargetModel& target) {
  if (!target.metric().is_constant())
    throw std::invalid_argument("euclidean leapfrog requires a constant metric");
}

StepOutput euclidean_step(const TargetModel& target, const CachedPoint& start, const PhaseState& s,
                          const IntegratorConfig& cfg) {
  const double h = 0.5 * cfg.step_size;
  const PdFactor& factor = start.geometry.metric.factor;
  const Vector p_half = s.p + h * start.geometry.grad_log_pi;
  const Vector q_new = s.q + cfg.step_size * factor.solve(p_half);
  CachedPoint end{evaluate_point(target, q_new, 0), std::nullopt};
  const Vector p_new = p_half + h * end.geometry.grad_log_pi;
  return {{{q_new, p_new}, 0.0, true, 0}, std::move(end)};
}

StepOutput generalized_step(const TargetModel& target, const CachedPoint& start, const PhaseState& s,
                            const IntegratorConfig& cfg) {
  const double h = 0.5 * cfg.step_size;
  const PointGeometry& here = start.geometry;
  StepOutput out{{s, 0.0, false, 0}, std::nullopt};

  Vector p_half = s.p;
  bool converged = false;
  for (int it = 0; it < cfg.fp_max_iters; ++it) {
    Vector next = s.p - h * grad_q_hamiltonian(here, p_half);
    const double diff = (next - p_half).lpNorm<Eigen::Infinity>();
    p_half = std::move(next);
    ++out.result.fp_iters_used;
    if (diff < cfg.fp_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) return out;

  const Vector v_here = here.metric.factor.solve(p_half);
  Vector q_new = s.q;
  converged = false;
  for (int it = 0; it < cfg.fp_max_iters; ++it) {
    const MetricEval there = metric_eval(target, q_new, 0);
    Vector next = s.q + h * (v_here + there.factor.solve(p_half));
    const double diff = (next - q_new).lpNorm<Eigen::Infinity>();
    q_new = std::move(next);
    ++out.result.fp_iters_used;
    if (diff < cfg.fp_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) return out;

  CachedPoint end{evaluate_point(target, q_new, 1), std::nullopt};
  const Vector p_new = p_half - h * grad_q_hamiltonian(end.geometry, p_half);
  out.result.state = {q_new, p_new};
  out.result.converged = q_new.allFinite() && p_new.allFinite();
  out.end = std::move(end);
  return out;
}

StepOutput lagrangian_step(const TargetModel& target, const CachedPoint& start, const PhaseState& s,
                           const IntegratorConfig& cfg) {
  const double h = 0.5 * cfg.step_size;
  const Eigen::Index m = s.q.size();
  const Matrix eye = Matrix::Identity(m, m);

  const PointGeometry& here = start.geometry;
  const ChristoffelTensor& gamma_here = *start.gamma;
  const Vector v = here.metric.factor.solve(s.p);

  const LinearUpdate first = factor_update(eye + h * omega(gamma_here, v));
  const Vector v_half = first.lu.solve(Vector(v - h * here.metric.factor.solve(here.grad_potential())));
  const Vector q_new = s.q + cfg.step_size * v_half;

  CachedPoint end{evaluate_point(target, q_new, 1), std::nullopt};
  end.gamma = christoffel(end.geometry.metric);
  const PointGeometry& there = end.geometry;

  const LinearUpdate second = factor_update(eye + h * omega(*end.gamma, v_half));
  const Vector v_new = second.lu.solve(Vector(v_half - h * there.metric.factor.solve(there.grad_potential())));
  const Vector p_new = there.metric.g.matrix() * v_new;

  // Chain rule through p -> v -> v_half -> v_new -> p over the sub-steps:
  // d v_half / d v = (I + h Omega(q, v))^{-1} (I - h Omega(q, v_half)), and
  // likewise at the new position; the position shear has unit determinant.
  const double log_jacobian = there.metric.logdet() - here.metric.logdet() +
                              log_abs_det_of(eye - h * omega(gamma_here, v_half)) +
                              log_abs_det_of(eye - h * omega(*end.gamma, v_new)) - first.log_abs_det -
                              second.log_abs_det;

  StepOutput out{{{q_new, p_new}, log_jacobian, true, 0}, std::move(end)};
  out.result.converged = q_new.allFinite() && p_new.allFinite() && std::isfinite(log_jacobian);
  return out;
}

StepOutput dispatch(const TargetModel& target, const CachedPoint& start, const PhaseState& s,
                    const IntegratorConfig& cfg, Scheme scheme) {
  switch (scheme) {
    case Scheme::euclidean:
      return euclidean_step(target, start, s, cfg);
    case Scheme::generalized:
      return generalized_step(target, start, s, cfg);
    case Scheme::lagrangian:
      return lagrangian_step(target, start, s, cfg);
  }
  throw std::invalid_argument("unknown integrator scheme");
}

}  // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::euclidean:
      return "euclidean";
    case Scheme::generalized:
      return "generalized";
    case Scheme::lagrangian:
      return "lagrangian";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "euclidean") return Scheme::euclidean;
  if (name == "generalized") return Scheme::generalized;
  if (name == "lagrangian") return Scheme::lagrangian;
  throw std::invalid_argument("unknown integrator scheme '" + name + "'");
}

CachedPoint cache_point(const TargetModel& target, const Vector& q, Scheme scheme) {
  if (scheme == Scheme::euclidean) {
    require_constant(target);
    return {evaluate_point(target, q, 0), std::nullopt};
  }
  CachedPoint out{evaluate_point(target, q, 1), std::nullopt};
  if (scheme == Scheme::lagrangian) out.gamma = christoffel(out.geometry.metric);
  return out;
}

StepResult euclidean_leapfrog_step(const TargetModel& target, const PhaseState& s, const IntegratorConfig& cfg) {
  return euclidean_step(target, cache_point(target, s.q, Scheme::euclidean), s, cfg).result;
}

StepResult generalized_leapfrog_step(const TargetModel& target, const PhaseState& s, const IntegratorConfig& cfg) {
  try {
    return generalized_step(target, cache_point(target, s.q, Scheme::generalized), s, cfg).result;
  } catch (const NumericalError&) {
    // a fixed-point iterate left the region where the metric is valid
    return {s, 0.0, false, 0};
  }
}

StepResult lagrangian_leapfrog_step(const TargetModel& target, const PhaseState& s, const IntegratorConfig& cfg) {
  return lagrangian_step(target, cache_point(target, s.q, Scheme::lagrangian), s, cfg).result;
}

Trajectory integrate_from(const TargetModel& target, CachedPoint start, const PhaseState& s,
                          const IntegratorConfig& cfg, int k, Scheme scheme) {
  if (k < 1) throw std::invalid_argument("integrate requires k >= 1");
  if (scheme == Scheme::euclidean) require_constant(target);
  Trajectory out{{s, 0.0, true, 0}, std::nullopt};
  CachedPoint current = std::move(start);
  try {
    for (int step = 0; step < k; ++step) {
      StepOutput next = dispatch(target, current, out.result.state, cfg, scheme);
      out.result.fp_iters_used += next.result.fp_iters_used;
      out.result.log_jacobian += next.result.log_jacobian;
      out.result.state = std::move(next.result.state);
      if (!next.result.converged || !next.end) {
        out.result.converged = false;
        return out;
      }
      current = std::move(*next.end);
    }
  } catch (const NumericalError&) {
    out.result.converged = false;
    return out;
  }
  out.result.state.p = -out.result.state.p;
  out.end = std::move(current);
  return out;
}

StepResult integrate(const TargetModel& target, const PhaseState& s, const IntegratorConfig& cfg, int k,
                     Scheme scheme) {
  std::optional<CachedPoint> start;
  try {
    start.emplace(cache_point(target, s.q, scheme));
  } catch (const NumericalError&) {
    return {s, 0.0, false, 0};
  }
  return integrate_from(target, std::move(*start), s, cfg, k, scheme).result;
}

}  // namespace geomc
