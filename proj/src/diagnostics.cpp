#include "geomc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "geomc/errors.hpp"

namespace geomc {

namespace {

double lower_median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t idx = (values.size() + 1) / 2 - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx), values.end());
  return values[idx];
}

double sum_within(const SampleSet& x, double inv_two_h) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      acc += std::exp(-(x.row(i) - x.row(j)).squaredNorm() * inv_two_h);
    }
  }
  return 2.0 * acc;
}

double sum_across(const SampleSet& x, const SampleSet& y, double inv_two_h) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      acc += std::exp(-(x.row(i) - y.row(j)).squaredNorm() * inv_two_h);
    }
  }
  return acc;
}

void require_two_sample(const SampleSet& x, const SampleSet& y) {
  if (x.rows() < 2 || y.rows() < 2) throw std::invalid_argument("two-sample statistics need at least 2 rows each");
  if (x.cols() != y.cols()) throw DimensionMismatch("sample sets differ in dimension");
}

/// Biased (1/n) autocovariance of x at lags 0..n-1, via zero-padded FFT.
std::vector<double> autocovariance(const Vector& x) {
  const std::size_t n = static_cast<std::size_t>(x.size());
  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  const double mean = x.mean();
  std::vector<double> padded(len, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[i] = x[static_cast<Eigen::Index>(i)] - mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, padded);
  for (auto& c : freq) c = std::complex<double>(std::norm(c), 0.0);
  std::vector<double> back;
  fft.inv(back, freq);

  std::vector<double> acov(n);
  for (std::size_t t = 0; t < n; ++t) acov[t] = back[t] / static_cast<double>(n);
  return acov;
}

struct ParamEss {
  double ess;
  double tau;
  int lag;
};

ParamEss ess_one_parameter(const std::vector<Vector>& draws) {
  const std::size_t p = draws.size();
  const auto n = static_cast<std::size_t>(draws.front().size());
  const double nd = static_cast<double>(n);

  std::vector<std::vector<double>> acov(p);
  Vector chain_mean(static_cast<Eigen::Index>(p));
  Vector chain_var(static_cast<Eigen::Index>(p));
  for (std::size_t c = 0; c < p; ++c) {
    acov[c] = autocovariance(draws[c]);
    chain_mean[static_cast<Eigen::Index>(c)] = draws[c].mean();
    chain_var[static_cast<Eigen::Index>(c)] = acov[c][0] * nd / (nd - 1.0);
  }
  const double within = chain_var.mean();
  const double between_over_n =
      (chain_mean.array() - chain_mean.mean()).square().sum() / static_cast<double>(p - 1);
  const double var_plus = within * (nd - 1.0) / nd + between_over_n;
  if (!(var_plus > 0.0)) throw ZeroVariance("parameter has zero variance across all chains");

  auto rho = [&](std::size_t t) {
    double mean_acov = 0.0;
    for (std::size_t c = 0; c < p; ++c) mean_acov += acov[c][t];
    mean_acov /= static_cast<double>(p);
    return 1.0 - (within - mean_acov) / var_plus;
  };

  // Initial positive sequence over pairs (rho_{2k}, rho_{2k+1}), rho_0 = 1.
  double tau = -1.0 + 2.0 * (1.0 + rho(1));
  std::size_t r = 0;
  while (2 * (r + 1) + 1 < n) {
    const double pair = rho(2 * (r + 1)) + rho(2 * (r + 1) + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
    ++r;
  }
  const double total = static_cast<double>(p) * nd;
  tau = std::max(tau, 1.0 / std::log10(total));
  return {total / tau, tau, static_cast<int>(r)};
}

}  // namespace

std::string to_string(BandwidthMode mode) { return mode == BandwidthMode::squared ? "squared" : "unsquared"; }

BandwidthMode bandwidth_mode_from_string(const std::string& name) {
  if (name == "squared") return BandwidthMode::squared;
  if (name == "unsquared") return BandwidthMode::unsquared;
  throw std::invalid_argument("unknown bandwidth mode '" + name + "'");
}

double median_bandwidth(const SampleSet& x, BandwidthMode mode, std::uint64_t subsample_seed) {
  if (x.rows() < 2) throw std::invalid_argument("median_bandwidth needs at least 2 rows");
  SampleSet pts;
  if (x.rows() > kBandwidthExactLimit) {
    Rng rng(subsample_seed, streams::kBandwidth);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    pts.resize(kBandwidthExactLimit, x.cols());
    for (Eigen::Index i = 0; i < kBandwidthExactLimit; ++i) pts.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
  } else {
    pts = x;
  }
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(pts.rows() * (pts.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pts.rows(); ++j) {
      const double sq = (pts.row(i) - pts.row(j)).squaredNorm();
      d.push_back(mode == BandwidthMode::squared ? sq : std::sqrt(sq));
    }
  }
  const double h = lower_median(std::move(d));
  if (!(h > 0.0)) throw DegenerateSet("median pairwise distance is zero");
  return h;
}

double mmd_unbiased(const SampleSet& x, const SampleSet& y, double h) {
  require_two_sample(x, y);
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  const double inv_two_h = 1.0 / (2.0 * h);
  const double r = static_cast<double>(x.rows());
  const double s = static_cast<double>(y.rows());
  return sum_within(x, inv_two_h) / (r * (r - 1.0)) + sum_within(y, inv_two_h) / (s * (s - 1.0)) -
         2.0 * sum_across(x, y, inv_two_h) / (r * s);
}

MmdAgainstReference::MmdAgainstReference(SampleSet reference, double h) : reference_(std::move(reference)), h_(h) {
  if (reference_.rows() < 2) throw std::invalid_argument("reference set needs at least 2 rows");
  if (!(h_ > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  const double r = static_cast<double>(reference_.rows());
  within_reference_ = sum_within(reference_, 1.0 / (2.0 * h_)) / (r * (r - 1.0));
}

double MmdAgainstReference::operator()(const SampleSet& y) const {
  require_two_sample(reference_, y);
  const double inv_two_h = 1.0 / (2.0 * h_);
  const double r = static_cast<double>(reference_.rows());
  const double s = static_cast<double>(y.rows());
  return within_reference_ + sum_within(y, inv_two_h) / (s * (s - 1.0)) -
         2.0 * sum_across(reference_, y, inv_two_h) / (r * s);
}

double esjd(std::span<const double> sq_jumps) {
  if (sq_jumps.empty()) throw std::invalid_argument("esjd of an empty sequence");
  return std::accumulate(sq_jumps.begin(), sq_jumps.end(), 0.0) / static_cast<double>(sq_jumps.size());
}

double msjd(std::span<const double> sq_jumps) {
  if (sq_jumps.empty()) throw std::invalid_argument("msjd of an empty sequence");
  return lower_median(std::vector<double>(sq_jumps.begin(), sq_jumps.end()));
}

namespace {
std::vector<double> jumps_of(std::span<const KernelOutcome> outcomes) {
  std::vector<double> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) out.push_back(o.sq_jump);
  return out;
}
}  // namespace

double esjd(std::span<const KernelOutcome> outcomes) { return esjd(std::span<const double>(jumps_of(outcomes))); }

double msjd(std::span<const KernelOutcome> outcomes) { return msjd(std::span<const double>(jumps_of(outcomes))); }

EssReport ess(const std::vector<Matrix>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("ess needs at least 2 chains");
  const Eigen::Index n = chains.front().rows();
  const Eigen::Index m = chains.front().cols();
  if (n < 8) throw std::invalid_argument("ess needs at least 8 draws per chain");
  for (const auto& c : chains) {
    if (c.rows() != n || c.cols() != m) throw DimensionMismatch("chains differ in shape");
  }
  EssReport report{Vector(m), 0.0, Vector(m), std::vector<int>(static_cast<std::size_t>(m))};
  for (Eigen::Index j = 0; j < m; ++j) {
    std::vector<Vector> draws;
    draws.reserve(chains.size());
    for (const auto& c : chains) draws.emplace_back(c.col(j));
    const ParamEss e = ess_one_parameter(draws);
    report.per_parameter_ess[j] = e.ess;
    report.tau_hat[j] = e.tau;
    report.truncation_lag[static_cast<std::size_t>(j)] = e.lag;
  }
  report.min_ess = report.per_parameter_ess.minCoeff();
  return report;
}

EssReport ess_split(const Matrix& chain) {
  const Eigen::Index half = chain.rows() / 2;
  std::vector<Matrix> halves{chain.topRows(half), chain.bottomRows(half)};
  return ess(halves);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return sup;
}

std::vector<double> ks_random_projections(const SampleSet& x, const SampleSet& y, int n_proj, Rng& rng) {
  if (n_proj < 1) throw std::invalid_argument("n_proj must be >= 1");
  if (x.cols() != y.cols()) throw DimensionMismatch("sample sets differ in dimension");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_proj));
  for (int k = 0; k < n_proj; ++k) {
    Vector u = rng.normal_vector(x.cols());
    u /= u.norm();
    const Vector px = x * u;
    const Vector py = y * u;
    out.push_back(ks_statistic(std::vector<double>(px.data(), px.data() + px.size()),
                               std::vector<double>(py.data(), py.data() + py.size())));
  }
  return out;
}

}  // namespace geomc
