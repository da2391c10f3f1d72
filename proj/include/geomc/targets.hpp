#ifndef GEOMC_TARGETS_HPP
#define GEOMC_TARGETS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geomc/geometry.hpp"
#include "geomc/random.hpp"
#include "geomc/target.hpp"

namespace geomc {

// ---------------------------------------------------------------------------
// Banana-shaped posterior: y_i ~ N(theta_1 + theta_2^2, sigma_y^2),
// theta ~ N(0, sigma_theta^2 I). Metric: Fisher information plus prior
// precision, (N / sigma_y^2) J^T J + sigma_theta^{-2} I with J = [1, 2 theta_2].
// ---------------------------------------------------------------------------

struct BananaConfig {
  int n_obs = 100;
  double sigma_y = 2.0;
  double sigma_theta = 1.0;
  /// Observations; when empty they are simulated from `data_seed`.
  std::vector<double> y;
  std::uint64_t data_seed = 20220101;
  /// Generating parameter for simulated data.
  double theta1_true = 0.5;
  double theta2_true = 0.70710678118654752;
  /// Resolution of the grid used by the reference sampler (per axis).
  int grid_size = 2048;
};

TargetModel make_banana(const BananaConfig& cfg);

/// Simulated observations for the banana model.
std::vector<double> simulate_banana_data(const BananaConfig& cfg);

// ---------------------------------------------------------------------------
// Neal's funnel: v ~ N(0, 9), x_i | v ~ N(0, exp(-v)); q = (v, x_1..x_N).
// Metric: SoftAbs of the Hessian of -log pi.
// ---------------------------------------------------------------------------

class FunnelDensity final : public Density, public HessianSource {
 public:
  explicit FunnelDensity(int n);

  int dim() const override { return n_ + 1; }
  double log_density(const Vector& q) const override;
  Vector grad_log_density(const Vector& q) const override;
  bool has_reference_sampler() const override { return true; }
  Vector sample_reference(Rng& rng) const override;
  std::string name() const override { return "funnel"; }

  SymMatrix neg_hessian(const Vector& q) const override;
  std::vector<SymMatrix> d_neg_hessian(const Vector& q) const override;

 private:
  int n_;
};

TargetModel make_funnel(int n, double softabs_alpha = SoftAbsMetric::kDefaultAlpha);

// ---------------------------------------------------------------------------
// Multiscale Student-t with diagonal scale; metric is the positive-definite
// term of the negative Hessian, G(q) = (m + nu) / (nu + q^T S^{-1} q) S^{-1}.
// ---------------------------------------------------------------------------

TargetModel make_student_t(int m, double nu, const Vector& sigma_diag);

/// Desk-scale multiscale scale vector diag(1, ..., 1, last).
Vector multiscale_diag(int m, double last);

// ---------------------------------------------------------------------------
// Gaussian N(mean, cov). Used as a reference target with known moments.
// ---------------------------------------------------------------------------

enum class GaussianMetric {
  /// constant cov^{-1} (the Fisher information of the location)
  fisher,
  /// cov^{-1} + kappa (q - mean)(q - mean)^T, position dependent
  warped,
  identity
};

TargetModel make_gaussian(const Vector& mean, const Matrix& cov, GaussianMetric metric = GaussianMetric::fisher,
                          double kappa = 0.5);

// ---------------------------------------------------------------------------
// Hierarchical Bayesian logistic regression:
//   alpha ~ Gamma(omega, theta)  (shape / scale)
//   beta | alpha ~ N(0, alpha^{-1} I)
//   y_i | x_i, beta ~ Bernoulli(logistic(x_i^T beta))
// beta is sampled by a Markov kernel conditional on alpha; alpha | beta is
// drawn exactly.
// ---------------------------------------------------------------------------

struct LogisticData {
  Matrix x;  // N x m design
  Vector y;  // labels in {0, 1}
};

struct LogisticGibbsState {
  Vector beta;
  double alpha = 1.0;
};

/// Reads a CSV with a header row; the label column must be named "y" and every
/// other column is a covariate. Throws SchemaError on malformed input.
LogisticData load_design_csv(const std::string& path);
void write_design_csv(const std::string& path, const LogisticData& data);

/// Synthetic design: an intercept column plus (m - 1) standard normal
/// covariates, labels drawn from a fixed coefficient vector.
LogisticData synthesize_logistic_data(int n_obs, int m, std::uint64_t seed);

class HierLogistic {
 public:
  HierLogistic(LogisticData data, double omega, double theta);

  int dim() const { return static_cast<int>(data_->x.cols()); }
  double omega() const { return omega_; }
  double theta() const { return theta_; }

  /// Target over beta for a fixed precision alpha; metric X^T Lambda X + alpha I.
  TargetModel conditional(double alpha) const;

  /// alpha | beta ~ Gamma(shape = omega + m/2, rate = 1/theta + |beta|^2 / 2).
  double gibbs_alpha_update(const LogisticGibbsState& state, Rng& rng) const;

 private:
  std::shared_ptr<const LogisticData> data_;
  double omega_;
  double theta_;
};

HierLogistic make_hier_logistic(LogisticData data, double omega, double theta);

double gibbs_alpha_update(const LogisticGibbsState& state, double omega, double theta, Rng& rng);

/// Shape and rate of the conditional alpha | beta.
struct GammaParams {
  double shape;
  double rate;
};
GammaParams alpha_conditional(const LogisticGibbsState& state, double omega, double theta);

}  // namespace geomc

#endif  // GEOMC_TARGETS_HPP
