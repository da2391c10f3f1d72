#ifndef GEOMC_TARGET_HPP
#define GEOMC_TARGET_HPP

#include <memory>
#include <string>
#include <vector>

#include "geomc/pd_linalg.hpp"
#include "geomc/random.hpp"

namespace geomc {

/// G(q) and, when requested, its partials dG[i] = dG/dq_i.
struct MetricValue {
  SymMatrix g;
  std::vector<SymMatrix> dg;
};

/// Position-dependent Riemannian metric.
class Metric {
 public:
  virtual ~Metric() = default;
  /// order 0: G only; order 1: G and all m partial derivatives.
  virtual MetricValue evaluate(const Vector& q, int order) const = 0;
  virtual bool is_constant() const { return false; }
  virtual std::string name() const = 0;
};

/// Unnormalized log posterior with its gradient.
class Density {
 public:
  virtual ~Density() = default;
  virtual int dim() const = 0;
  virtual double log_density(const Vector& q) const = 0;
  virtual Vector grad_log_density(const Vector& q) const = 0;
  virtual bool has_reference_sampler() const { return false; }
  /// One i.i.d. draw from the normalized target. Throws
  /// MissingReferenceSampler unless has_reference_sampler().
  virtual Vector sample_reference(Rng& rng) const;
  virtual std::string name() const = 0;
};

/// A density paired with the metric the geometric kernels should use.
/// Immutable; copies share the underlying density and metric.
class TargetModel {
 public:
  TargetModel(std::shared_ptr<const Density> density, std::shared_ptr<const Metric> metric);

  int dim() const { return density_->dim(); }
  double log_density(const Vector& q) const { return density_->log_density(q); }
  Vector grad_log_density(const Vector& q) const { return density_->grad_log_density(q); }
  bool has_reference_sampler() const { return density_->has_reference_sampler(); }
  Vector sample_reference(Rng& rng) const { return density_->sample_reference(rng); }

  const Density& density() const { return *density_; }
  const Metric& metric() const { return *metric_; }
  std::shared_ptr<const Density> density_ptr() const { return density_; }
  std::shared_ptr<const Metric> metric_ptr() const { return metric_; }

  /// Same density, different metric (e.g. an identity mass matrix for EHMC).
  TargetModel with_metric(std::shared_ptr<const Metric> metric) const;

  std::string name() const { return density_->name(); }

 private:
  std::shared_ptr<const Density> density_;
  std::shared_ptr<const Metric> metric_;
};

}  // namespace geomc

#endif  // GEOMC_TARGET_HPP
