#include "geomc/targets.hpp"

namespace geomc {

namespace {

class GaussianDensity final : public Density {
 public:
  GaussianDensity(Vector mean, const Matrix& cov)
      : mean_(std::move(mean)), cov_factor_(factorize(SymMatrix(cov))), precision_(cov_factor_.inverse()) {}

  int dim() const override { return static_cast<int>(mean_.size()); }
  double log_density(const Vector& q) const override {
    const Vector d = q - mean_;
    return -0.5 * d.dot(precision_ * d);
  }
  Vector grad_log_density(const Vector& q) const override { return -(precision_ * (q - mean_)); }
  bool has_reference_sampler() const override { return true; }
  Vector sample_reference(Rng& rng) const override {
    return mean_ + cov_factor_.transform(rng.normal_vector(dim()));
  }
  std::string name() const override { return "gaussian"; }

  const Vector& mean() const { return mean_; }
  const Matrix& precision() const { return precision_; }

 private:
  Vector mean_;
  PdFactor cov_factor_;
  Matrix precision_;
};

class WarpedMetric final : public Metric {
 public:
  WarpedMetric(std::shared_ptr<const GaussianDensity> density, double kappa)
      : density_(std::move(density)), kappa_(kappa) {}

  MetricValue evaluate(const Vector& q, int order) const override {
    const Vector d = q - density_->mean();
    MetricValue out{SymMatrix(Matrix(density_->precision() + kappa_ * d * d.transpose())), {}};
    if (order >= 1) {
      const Eigen::Index m = q.size();
      for (Eigen::Index i = 0; i < m; ++i) {
        Matrix di = Matrix::Zero(m, m);
        di.row(i) += kappa_ * d.transpose();
        di.col(i) += kappa_ * d;
        out.dg.emplace_back(di);
      }
    }
    return out;
  }

  std::string name() const override { return "warped"; }

 private:
  std::shared_ptr<const GaussianDensity> density_;
  double kappa_;
};

}  // namespace

TargetModel make_gaussian(const Vector& mean, const Matrix& cov, GaussianMetric metric, double kappa) {
  auto density = std::make_shared<GaussianDensity>(mean, cov);
  switch (metric) {
    case GaussianMetric::fisher:
      return TargetModel(density, std::make_shared<ConstantMetric>(SymMatrix(density->precision())));
    case GaussianMetric::warped:
      if (!(kappa >= 0.0)) throw std::invalid_argument("warped metric requires kappa >= 0");
      return TargetModel(density, std::make_shared<WarpedMetric>(density, kappa));
    case GaussianMetric::identity:
      return TargetModel(density, ConstantMetric::identity(density->dim()));
  }
  throw std::invalid_argument("unknown gaussian metric");
}

}  // namespace geomc
