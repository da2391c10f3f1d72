#include "geomc/geometry.hpp"

#include <cmath>
#include <sstream>

#include "geomc/errors.hpp"

namespace geomc {

namespace {

constexpr double kDegenerateGap = 1e-8;
constexpr double kSeriesCutoff = 1e-3;

void require_finite(const SymMatrix& m, const char* what, const Vector& q) {
  if (!m.matrix().allFinite()) {
    std::ostringstream msg;
    msg << what << " is not finite at q = [" << q.transpose() << "]";
    throw NonFinite(msg.str());
  }
}

}  // namespace

Vector Density::sample_reference(Rng& /*rng*/) const {
  throw MissingReferenceSampler("target '" + name() + "' has no reference sampler");
}

TargetModel::TargetModel(std::shared_ptr<const Density> density, std::shared_ptr<const Metric> metric)
    : density_(std::move(density)), metric_(std::move(metric)) {
  if (!density_ || !metric_) throw std::invalid_argument("TargetModel requires a density and a metric");
}

TargetModel TargetModel::with_metric(std::shared_ptr<const Metric> metric) const {
  return TargetModel(density_, std::move(metric));
}

MetricEval metric_eval(const TargetModel& target, const Vector& q, int order) {
  if (q.size() != target.dim()) throw DimensionMismatch("metric_eval: position has wrong dimension");
  if (!q.allFinite()) throw NonFinite("metric_eval: position is not finite");
  MetricValue value = target.metric().evaluate(q, order);
  require_finite(value.g, "metric", q);
  for (const auto& d : value.dg) require_finite(d, "metric derivative", q);

  MetricEval me{q, value.g, factorize(value.g), {}, {}, order};
  if (order >= 1) {
    if (static_cast<int>(value.dg.size()) != target.dim())
      throw DimensionMismatch("metric did not supply one derivative per coordinate");
    me.dg = std::move(value.dg);
    me.inverse = me.factor.inverse();
  }
  return me;
}

ChristoffelTensor christoffel(const MetricEval& me) {
  if (me.order < 1) throw std::invalid_argument("christoffel requires an order-1 metric evaluation");
  const Eigen::Index m = me.g.dim();
  // first_kind[l](k, j) = d_k G_lj + d_j G_lk - d_l G_kj, symmetric in (k, j).
  std::vector<Matrix> first_kind(m, Matrix(m, m));
  for (Eigen::Index l = 0; l < m; ++l) {
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index j = 0; j < m; ++j) {
        first_kind[l](k, j) = me.dg[k](l, j) + me.dg[j](l, k) - me.dg[l](k, j);
      }
    }
  }
  ChristoffelTensor out{std::vector<Matrix>(m, Matrix::Zero(m, m))};
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index l = 0; l < m; ++l) {
      const double a = me.inverse(i, l);
      if (a != 0.0) out.gamma[i] += 0.5 * a * first_kind[l];
    }
  }
  return out;
}

Matrix omega(const ChristoffelTensor& gamma, const Vector& v) {
  const Eigen::Index m = gamma.dim();
  if (v.size() != m) throw DimensionMismatch("omega: velocity has wrong dimension");
  Matrix out(m, m);
  for (Eigen::Index i = 0; i < m; ++i) out.row(i) = v.transpose() * gamma.gamma[i];
  return out;
}

Vector divergence_drift(const MetricEval& me) {
  if (me.order < 1) throw std::invalid_argument("divergence_drift requires an order-1 metric evaluation");
  const Eigen::Index m = me.g.dim();
  Vector out = Vector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    // column j of dA_j = -A dG_j A
    const Vector col = -(me.inverse * (me.dg[j].matrix() * me.inverse.col(j)));
    out += col;
  }
  return out;
}

Vector divergence_drift(const TargetModel& target, const Vector& q) {
  return divergence_drift(metric_eval(target, q, 1));
}

double softabs_value(double lambda, double alpha) {
  const double x = alpha * lambda;
  if (std::abs(x) < kSeriesCutoff) {
    const double x2 = x * x;
    return (1.0 + x2 / 3.0 - x2 * x2 / 45.0) / alpha;
  }
  return lambda / std::tanh(x);
}

double softabs_derivative(double lambda, double alpha) {
  const double x = alpha * lambda;
  const double ax = std::abs(x);
  if (ax < kSeriesCutoff) return 2.0 * x / 3.0 - 4.0 * x * x * x / 45.0;
  if (ax > 20.0) return x > 0 ? 1.0 / std::tanh(x) : -1.0 / std::tanh(-x);
  const double sh = std::sinh(x);
  return 1.0 / std::tanh(x) - x / (sh * sh);
}

MetricValue softabs_metric(const SymMatrix& hessian, const std::vector<SymMatrix>& d_hessian, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("softabs alpha must be positive");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian.matrix());
  if (eig.info() != Eigen::Success) throw EigenFailure("symmetric eigensolver did not converge");
  const Vector& lambda = eig.eigenvalues();
  const Matrix& basis = eig.eigenvectors();
  const Eigen::Index m = lambda.size();

  Vector s(m);
  for (Eigen::Index i = 0; i < m; ++i) s[i] = softabs_value(lambda[i], alpha);
  MetricValue out{SymMatrix(Matrix(basis * s.asDiagonal() * basis.transpose())), {}};

  if (!d_hessian.empty()) {
    Matrix divided(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index k = 0; k < m; ++k) {
        const double gap = lambda[j] - lambda[k];
        divided(j, k) = std::abs(gap) < kDegenerateGap
                            ? softabs_derivative(0.5 * (lambda[j] + lambda[k]), alpha)
                            : (s[j] - s[k]) / gap;
      }
    }
    out.dg.reserve(d_hessian.size());
    for (const auto& dh : d_hessian) {
      const Matrix rotated = basis.transpose() * dh.matrix() * basis;
      out.dg.emplace_back(Matrix(basis * divided.cwiseProduct(rotated) * basis.transpose()));
    }
  }
  return out;
}

std::shared_ptr<const ConstantMetric> ConstantMetric::identity(int dim) {
  return std::make_shared<ConstantMetric>(SymMatrix::identity(dim));
}

MetricValue ConstantMetric::evaluate(const Vector& q, int order) const {
  if (q.size() != g_.dim()) throw DimensionMismatch("constant metric: position has wrong dimension");
  MetricValue out{g_, {}};
  if (order >= 1) out.dg.assign(static_cast<std::size_t>(g_.dim()), SymMatrix::zero(g_.dim()));
  return out;
}

SoftAbsMetric::SoftAbsMetric(std::shared_ptr<const HessianSource> source, double alpha)
    : source_(std::move(source)), alpha_(alpha) {
  if (!source_) throw std::invalid_argument("SoftAbsMetric requires a Hessian source");
  if (!(alpha_ > 0.0)) throw std::invalid_argument("softabs alpha must be positive");
}

MetricValue SoftAbsMetric::evaluate(const Vector& q, int order) const {
  const SymMatrix h = source_->neg_hessian(q);
  if (order >= 1) return softabs_metric(h, source_->d_neg_hessian(q), alpha_);
  return softabs_metric(h, {}, alpha_);
}

}  // namespace geomc
