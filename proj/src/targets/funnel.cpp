#include <cmath>

#include "geomc/targets.hpp"

namespace geomc {

FunnelDensity::FunnelDensity(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("funnel requires N >= 1");
}

double FunnelDensity::log_density(const Vector& q) const {
  const double v = q[0];
  const double sq = q.tail(n_).squaredNorm();
  return -v * v / 18.0 + 0.5 * n_ * v - 0.5 * std::exp(v) * sq;
}

Vector FunnelDensity::grad_log_density(const Vector& q) const {
  const double v = q[0];
  const double ev = std::exp(v);
  Vector g(dim());
  g[0] = -v / 9.0 + 0.5 * n_ - 0.5 * ev * q.tail(n_).squaredNorm();
  g.tail(n_) = -ev * q.tail(n_);
  return g;
}

Vector FunnelDensity::sample_reference(Rng& rng) const {
  Vector q(dim());
  q[0] = 3.0 * rng.normal();
  const double sd = std::exp(-0.5 * q[0]);
  for (int i = 1; i <= n_; ++i) q[i] = sd * rng.normal();
  return q;
}

SymMatrix FunnelDensity::neg_hessian(const Vector& q) const {
  const double ev = std::exp(q[0]);
  Matrix h = Matrix::Zero(dim(), dim());
  h(0, 0) = 1.0 / 9.0 + 0.5 * ev * q.tail(n_).squaredNorm();
  for (int i = 1; i <= n_; ++i) {
    h(i, 0) = h(0, i) = ev * q[i];
    h(i, i) = ev;
  }
  return SymMatrix(h);
}

std::vector<SymMatrix> FunnelDensity::d_neg_hessian(const Vector& q) const {
  const double ev = std::exp(q[0]);
  std::vector<SymMatrix> out;
  out.reserve(static_cast<std::size_t>(dim()));

  Matrix dv = Matrix::Zero(dim(), dim());
  dv(0, 0) = 0.5 * ev * q.tail(n_).squaredNorm();
  for (int i = 1; i <= n_; ++i) {
    dv(i, 0) = dv(0, i) = ev * q[i];
    dv(i, i) = ev;
  }
  out.emplace_back(dv);

  for (int k = 1; k <= n_; ++k) {
    Matrix dx = Matrix::Zero(dim(), dim());
    dx(0, 0) = ev * q[k];
    dx(k, 0) = dx(0, k) = ev;
    out.emplace_back(dx);
  }
  return out;
}

TargetModel make_funnel(int n, double softabs_alpha) {
  auto density = std::make_shared<FunnelDensity>(n);
  auto metric = std::make_shared<SoftAbsMetric>(density, softabs_alpha);
  return TargetModel(density, std::move(metric));
}

}  // namespace geomc
