#include <cmath>

#include "geomc/targets.hpp"

namespace geomc {

namespace {

class StudentTDensity final : public Density {
 public:
  StudentTDensity(int m, double nu, Vector sigma_diag)
      : m_(m), nu_(nu), scale_(std::move(sigma_diag)), precision_(scale_.cwiseInverse()) {}

  int dim() const override { return m_; }

  double log_density(const Vector& q) const override {
    return -0.5 * (m_ + nu_) * std::log1p(radius(q) / nu_);
  }

  Vector grad_log_density(const Vector& q) const override {
    return -(m_ + nu_) / (nu_ + radius(q)) * precision_.cwiseProduct(q);
  }

  bool has_reference_sampler() const override { return true; }

  Vector sample_reference(Rng& rng) const override {
    Vector z = rng.normal_vector(m_);
    const double w = rng.chi_squared(nu_);
    return std::sqrt(nu_ / w) * scale_.cwiseSqrt().cwiseProduct(z);
  }

  std::string name() const override { return "student_t"; }

  double radius(const Vector& q) const { return q.dot(precision_.cwiseProduct(q)); }
  double nu() const { return nu_; }
  const Vector& precision() const { return precision_; }

 private:
  int m_;
  double nu_;
  Vector scale_;
  Vector precision_;
};

/// Positive-definite term of the negative Hessian of log pi.
class StudentTMetric final : public Metric {
 public:
  explicit StudentTMetric(std::shared_ptr<const StudentTDensity> density) : density_(std::move(density)) {}

  MetricValue evaluate(const Vector& q, int order) const override {
    const double m = density_->dim();
    const double nu = density_->nu();
    const Vector& prec = density_->precision();
    const double denom = nu + density_->radius(q);
    MetricValue out{SymMatrix::diagonal((m + nu) / denom * prec), {}};
    if (order >= 1) {
      out.dg.reserve(static_cast<std::size_t>(q.size()));
      for (Eigen::Index i = 0; i < q.size(); ++i) {
        const double c = -(m + nu) * 2.0 * prec[i] * q[i] / (denom * denom);
        out.dg.push_back(SymMatrix::diagonal(c * prec));
      }
    }
    return out;
  }

  std::string name() const override { return "hessian-pd-term"; }

 private:
  std::shared_ptr<const StudentTDensity> density_;
};

}  // namespace

Vector multiscale_diag(int m, double last) {
  Vector d = Vector::Ones(m);
  d[m - 1] = last;
  return d;
}

TargetModel make_student_t(int m, double nu, const Vector& sigma_diag) {
  if (m < 1) throw std::invalid_argument("student-t requires m >= 1");
  if (!(nu > 2.0)) throw std::invalid_argument("student-t requires nu > 2");
  if (sigma_diag.size() != m || (sigma_diag.array() <= 0.0).any())
    throw std::invalid_argument("student-t scale must be m positive entries");
  auto density = std::make_shared<StudentTDensity>(m, nu, sigma_diag);
  auto metric = std::make_shared<StudentTMetric>(density);
  return TargetModel(density, std::move(metric));
}

}  // namespace geomc
