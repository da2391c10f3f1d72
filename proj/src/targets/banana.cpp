#include <algorithm>
#include <cmath>
#include <mutex>

#include "geomc/errors.hpp"
#include "geomc/targets.hpp"

namespace geomc {

namespace {

class BananaDensity final : public Density {
 public:
  BananaDensity(const BananaConfig& cfg, const std::vector<double>& y)
      : n_(static_cast<double>(y.size())),
        sigma_y2_(cfg.sigma_y * cfg.sigma_y),
        sigma_theta2_(cfg.sigma_theta * cfg.sigma_theta),
        sigma_theta_(cfg.sigma_theta),
        grid_size_(cfg.grid_size) {
    for (double v : y) {
      sum_y_ += v;
      sum_y2_ += v * v;
    }
  }

  int dim() const override { return 2; }

  double log_density(const Vector& q) const override { return eval(q[0], q[1]); }

  Vector grad_log_density(const Vector& q) const override {
    const double mu = q[0] + q[1] * q[1];
    const double resid = (sum_y_ - n_ * mu) / sigma_y2_;
    Vector g(2);
    g[0] = -q[0] / sigma_theta2_ + resid;
    g[1] = -q[1] / sigma_theta2_ + 2.0 * q[1] * resid;
    return g;
  }

  bool has_reference_sampler() const override { return true; }

  Vector sample_reference(Rng& rng) const override {
    std::call_once(grid_once_, [this] { build_grid(); });
    const double u = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto cell = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative_.begin(), static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
    const std::size_t i = cell / static_cast<std::size_t>(grid_size_);
    const std::size_t j = cell % static_cast<std::size_t>(grid_size_);
    Vector q(2);
    q[0] = lo() + (static_cast<double>(i) + rng.uniform()) * width();
    q[1] = lo() + (static_cast<double>(j) + rng.uniform()) * width();
    return q;
  }

  std::string name() const override { return "banana"; }

 private:
  double eval(double t1, double t2) const {
    const double mu = t1 + t2 * t2;
    const double ss = sum_y2_ - 2.0 * mu * sum_y_ + n_ * mu * mu;
    return -(t1 * t1 + t2 * t2) / (2.0 * sigma_theta2_) - ss / (2.0 * sigma_y2_);
  }

  double lo() const { return -6.0 * sigma_theta_; }
  double width() const { return 12.0 * sigma_theta_ / grid_size_; }

  void build_grid() const {
    const std::size_t n = static_cast<std::size_t>(grid_size_);
    std::vector<double> logp(n * n);
    double max_logp = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
      const double t1 = lo() + (static_cast<double>(i) + 0.5) * width();
      for (std::size_t j = 0; j < n; ++j) {
        const double t2 = lo() + (static_cast<double>(j) + 0.5) * width();
        const double v = eval(t1, t2);
        logp[i * n + j] = v;
        max_logp = std::max(max_logp, v);
      }
    }
    cumulative_.resize(n * n);
    double acc = 0.0;
    for (std::size_t c = 0; c < n * n; ++c) {
      acc += std::exp(logp[c] - max_logp);
      cumulative_[c] = acc;
    }
  }

  double n_;
  double sigma_y2_;
  double sigma_theta2_;
  double sigma_theta_;
  int grid_size_;
  double sum_y_ = 0.0;
  double sum_y2_ = 0.0;

  mutable std::once_flag grid_once_;
  mutable std::vector<double> cumulative_;
};

class BananaMetric final : public Metric {
 public:
  BananaMetric(double n, double sigma_y, double sigma_theta)
      : fisher_scale_(n / (sigma_y * sigma_y)), prior_precision_(1.0 / (sigma_theta * sigma_theta)) {}

  MetricValue evaluate(const Vector& q, int order) const override {
    const double t2 = q[1];
    Matrix g(2, 2);
    g << fisher_scale_ + prior_precision_, fisher_scale_ * 2.0 * t2,  //
        fisher_scale_ * 2.0 * t2, fisher_scale_ * 4.0 * t2 * t2 + prior_precision_;
    MetricValue out{SymMatrix(g), {}};
    if (order >= 1) {
      Matrix d2(2, 2);
      d2 << 0.0, 2.0 * fisher_scale_, 2.0 * fisher_scale_, 8.0 * fisher_scale_ * t2;
      out.dg = {SymMatrix::zero(2), SymMatrix(d2)};
    }
    return out;
  }

  std::string name() const override { return "fisher-plus-prior"; }

 private:
  double fisher_scale_;
  double prior_precision_;
};

}  // namespace

std::vector<double> simulate_banana_data(const BananaConfig& cfg) {
  Rng rng(cfg.data_seed, streams::kData);
  const double mean = cfg.theta1_true + cfg.theta2_true * cfg.theta2_true;
  std::vector<double> y(static_cast<std::size_t>(cfg.n_obs));
  for (auto& v : y) v = mean + cfg.sigma_y * rng.normal();
  return y;
}

TargetModel make_banana(const BananaConfig& cfg) {
  if (cfg.n_obs < 1 && cfg.y.empty()) throw std::invalid_argument("banana requires N >= 1");
  if (!(cfg.sigma_y > 0.0) || !(cfg.sigma_theta > 0.0))
    throw std::invalid_argument("banana scales must be positive");
  if (cfg.grid_size < 2) throw std::invalid_argument("banana grid_size must be >= 2");
  const std::vector<double> y = cfg.y.empty() ? simulate_banana_data(cfg) : cfg.y;
  auto density = std::make_shared<BananaDensity>(cfg, y);
  auto metric = std::make_shared<BananaMetric>(static_cast<double>(y.size()), cfg.sigma_y, cfg.sigma_theta);
  return TargetModel(std::move(density), std::move(metric));
}

}  // namespace geomc
