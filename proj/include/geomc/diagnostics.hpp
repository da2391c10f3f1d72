#ifndef GEOMC_DIAGNOSTICS_HPP
#define GEOMC_DIAGNOSTICS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geomc/kernels.hpp"
#include "geomc/pd_linalg.hpp"
#include "geomc/random.hpp"

namespace geomc {

/// n x m, one sample per row.
using SampleSet = Matrix;

enum class BandwidthMode {
  /// h = median of pairwise squared distances
  squared,
  /// h = median of pairwise distances
  unsquared
};

std::string to_string(BandwidthMode mode);
BandwidthMode bandwidth_mode_from_string(const std::string& name);

/// Sets above this size are subsampled (seeded) before taking the median.
inline constexpr Eigen::Index kBandwidthExactLimit = 4096;

/// Lower median of the pairwise (squared) distances. Throws DegenerateSet
/// when the result is zero.
double median_bandwidth(const SampleSet& x, BandwidthMode mode = BandwidthMode::squared,
                        std::uint64_t subsample_seed = 0);

/// Unbiased MMD^2 estimate with k(a, b) = exp(-|a - b|^2 / (2 h)). Diagonal
/// terms are excluded from the within-set sums, so the value may be negative.
double mmd_unbiased(const SampleSet& x, const SampleSet& y, double h);

/// Caches the within-reference term for repeated comparisons against one
/// fixed reference set.
class MmdAgainstReference {
 public:
  MmdAgainstReference(SampleSet reference, double h);
  double operator()(const SampleSet& y) const;
  double bandwidth() const { return h_; }

 private:
  SampleSet reference_;
  double h_;
  double within_reference_ = 0.0;
};

/// Mean of accept_prob * |proposal - current|^2.
double esjd(std::span<const KernelOutcome> outcomes);
double esjd(std::span<const double> sq_jumps);
/// Lower median (order statistic ceil(n/2)) of the same per-step values.
double msjd(std::span<const KernelOutcome> outcomes);
double msjd(std::span<const double> sq_jumps);

struct EssReport {
  Vector per_parameter_ess;
  double min_ess = 0.0;
  Vector tau_hat;
  std::vector<int> truncation_lag;
};

/// Multi-chain ESS: each entry of `chains` is n x m (equal shapes, p >= 2,
/// n >= 8). Autocorrelations pool the within-chain autocovariances against
/// var+ = ((n - 1) W + B) / n, truncated at the first non-positive pair sum.
/// Throws ZeroVariance for a constant parameter.
EssReport ess(const std::vector<Matrix>& chains);

/// Splits one chain into two halves (dropping the middle row of an odd-length
/// chain) and returns ess() of the halves.
EssReport ess_split(const Matrix& chain);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// KS statistics of u^T x vs u^T y for n_proj random unit vectors u.
std::vector<double> ks_random_projections(const SampleSet& x, const SampleSet& y, int n_proj, Rng& rng);

}  // namespace geomc

#endif  // GEOMC_DIAGNOSTICS_HPP
