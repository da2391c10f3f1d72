#ifndef GEOMC_GEOMETRY_HPP
#define GEOMC_GEOMETRY_HPP

#include <memory>
#include <vector>

#include "geomc/pd_linalg.hpp"
#include "geomc/target.hpp"

namespace geomc {

/// The metric at a point together with its factorization and, for order >= 1,
/// its partial derivatives and explicit inverse.
struct MetricEval {
  Vector q;
  SymMatrix g;
  PdFactor factor;
  std::vector<SymMatrix> dg;  // empty when order == 0
  Matrix inverse;             // empty when order == 0
  int order = 0;

  double logdet() const { return factor.logdet(); }
};

/// Christoffel symbols of the second kind, gamma[i](k, j) = Gamma^i_{kj}.
struct ChristoffelTensor {
  std::vector<Matrix> gamma;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(gamma.size()); }
};

/// Evaluates the target's metric at q. Throws NonFinite for NaN/inf entries
/// and NotPositiveDefinite when the factorization fails.
MetricEval metric_eval(const TargetModel& target, const Vector& q, int order);

/// Standard convention:
///   Gamma^i_{kj} = 1/2 sum_l Ginv_il (d_k G_lj + d_j G_lk - d_l G_kj).
/// A variant with the derivative index and the inverse-metric index swapped
/// (d/dq_i G_lj with Ginv_kl) is not symmetric in the lower indices and is
/// deliberately not used.
ChristoffelTensor christoffel(const MetricEval& me);

/// Omega_ij(v) = sum_k Gamma^i_{kj} v_k.
Matrix omega(const ChristoffelTensor& gamma, const Vector& v);

/// Gamma_i = sum_j d(G^{-1})_ij / dq_j, with dA/dq_j = -A dG_j A.
Vector divergence_drift(const MetricEval& me);
Vector divergence_drift(const TargetModel& target, const Vector& q);

/// SoftAbs regularization of a symmetric matrix H = Q diag(lambda) Q^T:
/// G = Q diag(s(lambda)) Q^T with s(x) = x coth(alpha x), and the directional
/// derivatives dG[i] = Q (R o (Q^T dH[i] Q)) Q^T where R holds the divided
/// differences of s (s' on the diagonal and for near-equal eigenvalues).
MetricValue softabs_metric(const SymMatrix& hessian, const std::vector<SymMatrix>& d_hessian,
                           double alpha);

/// s(x) = x coth(alpha x), continuous at 0 with s(0) = 1/alpha.
double softabs_value(double lambda, double alpha);
/// s'(x).
double softabs_derivative(double lambda, double alpha);

/// G(q) == g for all q.
class ConstantMetric final : public Metric {
 public:
  explicit ConstantMetric(SymMatrix g) : g_(std::move(g)) {}
  static std::shared_ptr<const ConstantMetric> identity(int dim);

  MetricValue evaluate(const Vector& q, int order) const override;
  bool is_constant() const override { return true; }
  std::string name() const override { return "constant"; }

 private:
  SymMatrix g_;
};

/// Supplies -Hessian(log pi) and its partial derivatives for the SoftAbs metric.
class HessianSource {
 public:
  virtual ~HessianSource() = default;
  virtual SymMatrix neg_hessian(const Vector& q) const = 0;
  /// d/dq_i of neg_hessian, i = 0..m-1.
  virtual std::vector<SymMatrix> d_neg_hessian(const Vector& q) const = 0;
};

class SoftAbsMetric final : public Metric {
 public:
  static constexpr double kDefaultAlpha = 1e6;

  SoftAbsMetric(std::shared_ptr<const HessianSource> source, double alpha = kDefaultAlpha);

  MetricValue evaluate(const Vector& q, int order) const override;
  std::string name() const override { return "softabs"; }
  double alpha() const { return alpha_; }

 private:
  std::shared_ptr<const HessianSource> source_;
  double alpha_;
};

}  // namespace geomc

#endif  // GEOMC_GEOMETRY_HPP
