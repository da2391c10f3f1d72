// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Optional arguments select criteria by name.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "geomc/diagnostics.hpp"
#include "geomc/errors.hpp"
#include "geomc/harness.hpp"
#include "geomc/kernels.hpp"
#include "test_support.hpp"

namespace geomc {
namespace {

using testing::stack;
using testing::unstack;

struct Verdict {
  bool pass = true;
  std::string detail;
};

/// Accumulates checks; the first failing check's message is kept.
class Checks {
 public:
  void require(bool ok, const std::string& what) {
    ++count_;
    if (!ok && pass_) {
      pass_ = false;
      first_failure_ = what;
    }
  }
  void note(const std::string& text) { notes_ += (notes_.empty() ? "" : "; ") + text; }
  Verdict verdict() const {
    std::string d = std::to_string(count_) + " checks";
    if (!notes_.empty()) d += "; " + notes_;
    if (!pass_) d += "; first failure: " + first_failure_;
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  int count_ = 0;
  std::string first_failure_;
  std::string notes_;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

PhaseState random_state(const TargetModel& t, Rng& rng, double radius) {
  const Vector q = testing::uniform_box(rng, t.dim(), radius);
  return {q, sample_momentum(t, q, rng)};
}

IntegratorConfig tight(double eps) { return {eps, 1e-13, 100}; }

TargetModel banana() { return make_banana(BananaConfig{}); }

TargetModel tilted_gaussian(GaussianMetric metric) {
  Vector mean(2);
  mean << 1.0, -0.5;
  Matrix cov(2, 2);
  cov << 1.0, 0.3, 0.3, 0.5;
  return make_gaussian(mean, cov, metric);
}

Verdict mala_coupling() {
  Checks c;
  Matrix a_inv(2, 2);
  a_inv << 3.0, 0.4, 0.4, 1.5;
  const TargetModel t = banana().with_metric(std::make_shared<ConstantMetric>(SymMatrix(a_inv)));
  Rng states(101);
  double worst_q = 0.0, worst_a = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector q = testing::uniform_box(states, 2, 1.5);
    Rng r1(1000 + i), r2(1000 + i);
    const KernelOutcome mala = langevin_transition(t, q, LangevinVariant::mala, 0.3, r1);
    const KernelOutcome hmc = hmc_transition(t, q, {Scheme::euclidean, 0.3, 1, 1e-10, 50}, r2);
    worst_q = std::max(worst_q, max_abs(mala.proposal - hmc.proposal));
    worst_a = std::max(worst_a, std::abs(mala.accept_prob - hmc.accept_prob));
    c.require(mala.accepted == hmc.accepted, "accept decisions differ at state " + std::to_string(i));
  }
  c.require(worst_q <= 1e-10, "proposal gap " + fmt(worst_q));
  c.require(worst_a <= 1e-10, "accept-prob gap " + fmt(worst_a));
  c.note("max proposal gap " + fmt(worst_q) + ", max accept-prob gap " + fmt(worst_a));
  return c.verdict();
}

Verdict constant_metric_reduction() {
  Checks c;
  Rng cov_rng(7);
  const TargetModel t = make_gaussian(Vector::Ones(3), testing::random_pd(cov_rng, 3, 0.5), GaussianMetric::fisher);
  const IntegratorConfig cfg{0.1, 1e-10, 50};
  Rng rng(11);
  double worst = 0.0;
  for (int start = 0; start < 20; ++start) {
    PhaseState e = random_state(t, rng, 2.0), g = e, l = e;
    for (int step = 0; step < 100; ++step) {
      e = euclidean_leapfrog_step(t, e, cfg).state;
      const StepResult gs = generalized_leapfrog_step(t, g, cfg);
      const StepResult ls = lagrangian_leapfrog_step(t, l, cfg);
      c.require(gs.converged, "generalized step did not converge");
      c.require(ls.log_jacobian == 0.0, "nonzero Lagrangian log-Jacobian");
      g = gs.state;
      l = ls.state;
      worst = std::max({worst, max_abs(stack(e) - stack(g)), max_abs(stack(e) - stack(l))});
    }
  }
  c.require(worst <= 1e-10, "trajectory gap " + fmt(worst));
  c.note("max gap over 20 x 100 steps " + fmt(worst));
  return c.verdict();
}

Verdict involution() {
  Checks c;
  struct Case {
    TargetModel target;
    Scheme scheme;
    double eps;
  };
  Rng cov_rng(3);
  const std::vector<Case> cases{
      {make_gaussian(Vector::Zero(3), testing::random_pd(cov_rng, 3, 0.5), GaussianMetric::fisher), Scheme::euclidean,
       0.2},
      {banana(), Scheme::generalized, 0.04},
      {testing::desk_student_t(3), Scheme::generalized, 0.2},
      {banana(), Scheme::lagrangian, 0.04},
      {testing::desk_student_t(3), Scheme::lagrangian, 0.2},
  };
  Rng rng(13);
  double worst = 0.0;
  int used = 0, skipped = 0;
  for (const auto& cs : cases) {
    for (int k : {1, 3, 7}) {
      for (int trial = 0; trial < 20; ++trial) {
        const PhaseState s = random_state(cs.target, rng, 1.0);
        const StepResult once = integrate(cs.target, s, tight(cs.eps), k, cs.scheme);
        const StepResult twice =
            once.converged ? integrate(cs.target, once.state, tight(cs.eps), k, cs.scheme) : once;
        if (!once.converged || !twice.converged) {
          ++skipped;
          continue;
        }
        ++used;
        const double gap = max_abs(stack(twice.state) - stack(s));
        worst = std::max(worst, gap);
        c.require(gap <= 1e-8, to_string(cs.scheme) + " k=" + std::to_string(k) + " gap " + fmt(gap));
      }
    }
  }
  c.require(used >= 250, "too few converged round trips: " + std::to_string(used));
  c.note(std::to_string(used) + " round trips, " + std::to_string(skipped) + " non-converged skipped, max gap " +
         fmt(worst));
  return c.verdict();
}

Verdict jacobians() {
  Checks c;
  Rng rng(17);
  double worst_det = 0.0, worst_rel = 0.0;
  const std::vector<std::pair<TargetModel, double>> targets{{banana(), 0.04}, {testing::desk_student_t(3), 0.1}};
  for (const auto& [t, eps] : targets) {
    const IntegratorConfig cfg = tight(eps);
    for (int i = 0; i < 50; ++i) {
      const PhaseState s = random_state(t, rng, 1.0);
      auto g_map = [&](const Vector& z) { return stack(generalized_leapfrog_step(t, unstack(z), cfg).state); };
      if (generalized_leapfrog_step(t, s, cfg).converged) {
        const double det = testing::fd_jacobian(g_map, stack(s), 1e-5).determinant();
        worst_det = std::max(worst_det, std::abs(det - 1.0));
      } else {
        c.require(false, "generalized step did not converge");
      }
      const StepResult l = lagrangian_leapfrog_step(t, s, cfg);
      auto l_map = [&](const Vector& z) { return stack(lagrangian_leapfrog_step(t, unstack(z), cfg).state); };
      const double fd_det = testing::fd_jacobian(l_map, stack(s), 1e-6).determinant();
      worst_rel = std::max(worst_rel, std::abs(std::exp(l.log_jacobian) / fd_det - 1.0));
    }
  }
  c.require(worst_det <= 1e-4, "generalized |det - 1| = " + fmt(worst_det));
  c.require(worst_rel <= 1e-4, "Lagrangian relative Jacobian error " + fmt(worst_rel));
  c.note("generalized max |det - 1| " + fmt(worst_det) + ", Lagrangian max rel error " + fmt(worst_rel));
  return c.verdict();
}

Verdict integrator_order() {
  Checks c;
  const double time = 0.5, eps = 0.02;
  const int k = static_cast<int>(std::lround(time / eps));
  Rng rng(19);
  std::vector<double> ratios;
  const std::vector<std::pair<TargetModel, Scheme>> cases{{banana(), Scheme::generalized},
                                                          {banana(), Scheme::lagrangian},
                                                          {testing::desk_student_t(5), Scheme::generalized},
                                                          {testing::desk_student_t(5), Scheme::lagrangian}};
  for (const auto& [t, scheme] : cases) {
    for (int trial = 0; trial < 5; ++trial) {
      const PhaseState s = random_state(t, rng, 0.5);
      const double h0 = hamiltonian(t, s);
      const StepResult coarse = integrate(t, s, tight(eps), k, scheme);
      const StepResult fine = integrate(t, s, tight(eps / 2), 2 * k, scheme);
      c.require(coarse.converged && fine.converged, "integration did not converge");
      const double ratio = std::abs(hamiltonian(t, coarse.state) - h0) / std::abs(hamiltonian(t, fine.state) - h0);
      ratios.push_back(ratio);
      c.require(ratio >= 3.0 && ratio <= 5.0, t.name() + " " + to_string(scheme) + " ratio " + fmt(ratio));
    }
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  c.note("ratios in [" + fmt(*lo) + ", " + fmt(*hi) + "]");
  return c.verdict();
}

struct MomentTruth {
  Vector mean;
  Vector var;
  /// Var((x_i - mu_i)^2)
  Vector var_of_sq;
};

Verdict stationarity_case(const TargetModel& t, const MomentTruth& truth, Scheme scheme, double alpha1,
                          double step_size, int k_max, std::uint64_t seed) {
  Checks c;
  MixtureSpec mix;
  mix.alpha1 = alpha1;
  mix.k_max = k_max;
  mix.step_size = step_size;
  mix.scheme = scheme;
  const int n = 100000;
  const Eigen::Index m = t.dim();
  Matrix draws(n, m);
  Rng rng(seed);
  Vector q = truth.mean;
  int accepted = 0;
  for (int i = 0; i < n; ++i) {
    const KernelOutcome o = mixture_transition(t, q, mix, rng);
    accepted += o.accepted;
    q = o.next;
    draws.row(i) = q.transpose();
  }
  Matrix centered_sq = (draws.rowwise() - truth.mean.transpose()).array().square().matrix();
  const EssReport ess_x = ess_split(draws);
  const EssReport ess_sq = ess_split(centered_sq);
  double worst_mean_z = 0.0, worst_var_z = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double se_mean = std::sqrt(truth.var[j] / ess_x.per_parameter_ess[j]);
    const double z_mean = std::abs(draws.col(j).mean() - truth.mean[j]) / se_mean;
    const double se_var = std::sqrt(truth.var_of_sq[j] / ess_sq.per_parameter_ess[j]);
    const double z_var = std::abs(centered_sq.col(j).mean() - truth.var[j]) / se_var;
    worst_mean_z = std::max(worst_mean_z, z_mean);
    worst_var_z = std::max(worst_var_z, z_var);
    c.require(z_mean <= 3.0, "mean of q" + std::to_string(j) + " off by " + fmt(z_mean) + " SE");
    c.require(z_var <= 5.0, "variance of q" + std::to_string(j) + " off by " + fmt(z_var) + " SE");
  }
  c.note("accept rate " + fmt(static_cast<double>(accepted) / n) + ", max |z| mean " + fmt(worst_mean_z) +
         ", variance " + fmt(worst_var_z) + ", min ESS " + fmt(ess_x.min_ess));
  return c.verdict();
}

std::vector<std::pair<std::string, std::function<Verdict()>>> stationarity_cases() {
  std::vector<std::pair<std::string, std::function<Verdict()>>> out;
  const TargetModel gauss = tilted_gaussian(GaussianMetric::warped);
  MomentTruth gauss_truth;
  gauss_truth.mean = Vector(2);
  gauss_truth.mean << 1.0, -0.5;
  gauss_truth.var = Vector(2);
  gauss_truth.var << 1.0, 0.5;
  gauss_truth.var_of_sq = 2.0 * gauss_truth.var.cwiseAbs2();

  const int m = 5;
  const double nu = 5.0;
  const Vector sigma = multiscale_diag(m, 100.0);
  const TargetModel student = make_student_t(m, nu, sigma);
  MomentTruth student_truth;
  student_truth.mean = Vector::Zero(m);
  student_truth.var = sigma * nu / (nu - 2.0);
  // E x^4 = 3 sigma^2 nu^2 / ((nu - 2)(nu - 4))
  student_truth.var_of_sq =
      (sigma.cwiseAbs2() * 3.0 * nu * nu / ((nu - 2.0) * (nu - 4.0))) - student_truth.var.cwiseAbs2();

  std::uint64_t seed = 500;
  for (Scheme scheme : {Scheme::generalized, Scheme::lagrangian}) {
    const std::string kernel = scheme == Scheme::generalized ? "lmrmhmc" : "lmlmc";
    for (double alpha1 : {0.1, 0.5}) {
      const std::string a = alpha1 == 0.1 ? "0.1" : "0.5";
      out.emplace_back("stationarity " + kernel + " alpha1=" + a + " gaussian-2d",
                       [=] { return stationarity_case(gauss, gauss_truth, scheme, alpha1, 0.5, 5, seed); });
      out.emplace_back("stationarity " + kernel + " alpha1=" + a + " student-t-5",
                       [=] { return stationarity_case(student, student_truth, scheme, alpha1, 0.5, 5, seed + 1); });
      seed += 2;
    }
  }
  return out;
}

Verdict fd_suite() {
  Checks c;
  const HierLogistic logistic(synthesize_logistic_data(270, 14, 20220101), 10.0, 2.0);
  const std::vector<std::pair<TargetModel, double>> targets{
      {banana(), 1.5},
      {make_funnel(10), 1.5},
      {testing::desk_student_t(5), 3.0},
      {tilted_gaussian(GaussianMetric::fisher), 3.0},
      {tilted_gaussian(GaussianMetric::warped), 3.0},
      {logistic.conditional(20.0), 0.5},
  };
  Rng rng(23);
  double worst_grad = 0.0, worst_dg = 0.0;
  for (const auto& [t, radius] : targets) {
    double target_grad = 0.0, target_dg = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector q = testing::uniform_box(rng, t.dim(), radius);
      const Vector fd = testing::fd_gradient([&](const Vector& x) { return t.log_density(x); }, q, 1e-6);
      target_grad = std::max(target_grad, testing::max_rel_error(t.grad_log_density(q), fd));
      const MetricValue g = t.metric().evaluate(q, 1);
      for (Eigen::Index k = 0; k < q.size(); ++k) {
        const double h = 1e-5;
        Vector qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        const Matrix fd_dg = (t.metric().evaluate(qp, 0).g.matrix() - t.metric().evaluate(qm, 0).g.matrix()) / (2 * h);
        target_dg = std::max(target_dg, (fd_dg - g.dg[static_cast<std::size_t>(k)].matrix()).cwiseAbs().maxCoeff());
      }
    }
    c.require(target_grad <= 1e-5, t.name() + " gradient rel error " + fmt(target_grad));
    c.require(target_dg <= 1e-6, t.name() + " metric derivative abs error " + fmt(target_dg));
    worst_grad = std::max(worst_grad, target_grad);
    worst_dg = std::max(worst_dg, target_dg);
  }
  c.note("max gradient rel error " + fmt(worst_grad) + ", max dG abs error " + fmt(worst_dg));
  return c.verdict();
}

Matrix gaussian_set(Rng& rng, Eigen::Index n, Eigen::Index m) {
  Matrix x(n, m);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = rng.normal_vector(m).transpose();
  return x;
}

Verdict diagnostics_oracles() {
  Checks c;
  Matrix two(2, 2);
  two << 0, 0, 1, 0;
  const double mmd = mmd_unbiased(two, two, 0.5);
  c.require(std::abs(mmd - (std::exp(-1.0) - 1.0)) <= 1e-12, "two-point MMD " + fmt(mmd));

  Rng rng(29);
  const EssReport iid = ess_split(gaussian_set(rng, 20000, 3));
  double lo = INFINITY, hi = 0.0;
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double ratio = iid.per_parameter_ess[j] / 20000.0;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  c.require(lo >= 0.8 && hi <= 1.2, "i.i.d. ESS ratio range [" + fmt(lo) + ", " + fmt(hi) + "]");

  const double phi = 0.9;
  const int n = 200000;
  Matrix chain(n, 1);
  double v = rng.normal() / std::sqrt(1 - phi * phi);
  for (int i = 0; i < n; ++i) {
    v = phi * v + rng.normal();
    chain(i, 0) = v;
  }
  const double expected = (1 - phi) / (1 + phi);
  const double ar = ess_split(chain).min_ess / n;
  c.require(std::abs(ar - expected) <= 0.2 * expected, "AR(1) ESS ratio " + fmt(ar));

  const Matrix x = gaussian_set(rng, 200, 4);
  double ks_max = 0.0;
  for (double s : ks_random_projections(x, x, 100, rng)) ks_max = std::max(ks_max, s);
  c.require(ks_max == 0.0, "identical-set KS " + fmt(ks_max));
  c.note("MMD " + fmt(mmd) + ", iid ESS ratio [" + fmt(lo) + ", " + fmt(hi) + "], AR(1) ratio " + fmt(ar) +
         " vs " + fmt(expected));
  return c.verdict();
}

Verdict mmd_ordering() {
  Checks c;
  auto config = [](const std::string& kernel, double eps, std::optional<double> alpha1) {
    nlohmann::json j{{"target", {{"id", "student_t"}, {"m", 5}}},
                     {"kernel", kernel},
                     {"step_size", eps},
                     {"k_max", 20},
                     {"n_steps", 100},
                     {"n_chains", 256},
                     {"n_reference", 2000},
                     {"base_seed", 4242}};
    if (alpha1) j["alpha1"] = *alpha1;
    ExperimentConfig cfg = parse_config(j);
    validate(cfg, Command::mmd_curve);
    return cfg;
  };
  const MmdCurve ehmc = compute_mmd_curve(config("ehmc", 0.8, std::nullopt));
  std::ostringstream notes;
  notes << "EHMC step-100 " << fmt(ehmc.mmd_u2_abs.back());
  for (double alpha1 : {0.1, 0.5}) {
    const MmdCurve rm = compute_mmd_curve(config("lmrmhmc", 0.7, alpha1));
    c.require(rm.slope < 0.0, "alpha1=" + fmt(alpha1) + " log-slope " + fmt(rm.slope));
    c.require(rm.mmd_u2_abs.back() < ehmc.mmd_u2_abs.back(),
              "alpha1=" + fmt(alpha1) + " step-100 " + fmt(rm.mmd_u2_abs.back()) + " not below EHMC");
    notes << ", RMHMC mixture alpha1=" << fmt(alpha1) << " slope " << fmt(rm.slope) << " step-100 "
          << fmt(rm.mmd_u2_abs.back());
  }
  c.note(notes.str());
  return c.verdict();
}

Verdict branch_frequencies() {
  Checks c;
  const int n = 100000;
  Rng rng(31);
  for (double alpha1 : {0.0, 0.1, 0.5}) {
    MixtureSpec mix;
    mix.alpha1 = alpha1;
    mix.k_max = 10;
    const std::vector<double> w = mix.weights();
    std::vector<int> counts(w.size(), 0);
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(draw_branch(mix, rng) - 1)];
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double sd = std::sqrt(n * w[k] * (1 - w[k]));
      const double expected = alpha1 == 0.0 ? 0.1 : (k == 0 ? alpha1 : (1 - alpha1) / 9.0);
      c.require(std::abs(w[k] - expected) < 1e-15, "weight mismatch");
      c.require(std::abs(counts[k] - n * w[k]) <= 3.0 * sd,
                "alpha1=" + fmt(alpha1) + " branch " + std::to_string(k + 1) + " count " + std::to_string(counts[k]));
    }
  }
  return c.verdict();
}

}  // namespace
}  // namespace geomc

int main(int argc, char** argv) {
  using namespace geomc;
  std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"mala-equals-one-step-ehmc", mala_coupling},
      {"constant-metric-reduction", constant_metric_reduction},
      {"involution", involution},
      {"jacobian", jacobians},
      {"integrator-order", integrator_order},
  };
  for (auto& s : stationarity_cases()) criteria.push_back(std::move(s));
  criteria.emplace_back("gradient-metric-fd", fd_suite);
  criteria.emplace_back("diagnostics-oracles", diagnostics_oracles);
  criteria.emplace_back("mmd-ordering-student-t", mmd_ordering);
  criteria.emplace_back("branch-frequencies", branch_frequencies);

  // runtime budgets in seconds
  auto budget = [](const std::string& name) {
    if (name == "mala-equals-one-step-ehmc") return 1.0;
    if (name == "jacobian") return 30.0;
    if (name.rfind("stationarity", 0) == 0) return 120.0;
    if (name == "mmd-ordering-student-t") return 600.0;
    return 0.0;
  };

  std::vector<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::none_of(only.begin(), only.end(), [&](const std::string& o) {
          return name.find(o) != std::string::npos;
        }))
      continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double limit = budget(name);
    if (limit > 0.0 && secs > limit) {
      v.pass = false;
      v.detail += "; exceeded runtime budget of " + std::to_string(static_cast<int>(limit)) + " s";
    }
    failures += !v.pass;
    std::printf("%s %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), secs, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
