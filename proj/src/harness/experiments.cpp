#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "geomc/errors.hpp"
#include "geomc/harness.hpp"

namespace geomc {

using nlohmann::json;

namespace {

/// Runs fn(0..n-1) on up to `workers` threads. Each index is handled by
/// exactly one thread, so per-index outputs do not depend on scheduling.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  const int threads = std::min(workers, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string output_path(const ExperimentConfig& cfg, const std::string& file) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::string name = cfg.name.empty() ? file : cfg.name + "_" + file;
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

json trace_metrics(const TraceData& trace) {
  const int n = trace.n_steps();
  if (n == 0) throw SchemaError("trace has no records");
  json j;
  j["n_steps"] = n;
  j["dim"] = trace.q.cols();

  double acc = 0.0;
  double prob = 0.0;
  std::map<int, int> hist;
  for (int s = 0; s < n; ++s) {
    const auto i = static_cast<std::size_t>(s);
    acc += trace.accepted[i];
    prob += trace.accept_prob[i];
    ++hist[trace.branch[i]];
  }
  j["acceptance_rate"] = acc / n;
  j["mean_accept_prob"] = prob / n;
  j["esjd"] = esjd(std::span<const double>(trace.sq_jump));
  j["msjd"] = msjd(std::span<const double>(trace.sq_jump));

  json h = json::object();
  for (const auto& [k, count] : hist) h[std::to_string(k)] = count;
  j["branch_histogram"] = h;

  // split halves need at least 8 draws each
  if (n >= 16) {
    json per = json::array();
    double min_ess = INFINITY;
    for (Eigen::Index col = 0; col < trace.q.cols(); ++col) {
      double value = 0.0;
      try {
        value = ess_split(trace.q.col(col)).min_ess;
      } catch (const ZeroVariance&) {
        value = 0.0;
      }
      per.push_back(value);
      min_ess = std::min(min_ess, value);
    }
    j["ess"] = per;
    j["min_ess"] = min_ess;
  } else {
    j["ess"] = nullptr;
    j["min_ess"] = nullptr;
  }

  j["seed"] = trace.seed ? json(*trace.seed) : json(nullptr);
  j["chain"] = trace.chain ? json(*trace.chain) : json(nullptr);
  if (trace.config) {
    const json& c = *trace.config;
    j["kernel"] = c.value("kernel", json(nullptr));
    j["target"] = c.contains("target") ? c["target"].value("id", json(nullptr)) : json(nullptr);
    j["alpha1"] = c.value("alpha1", json(nullptr));
    j["step_size"] = c.value("step_size", json(nullptr));
    j["bandwidth_mode"] = c.value("bandwidth_mode", json(nullptr));
  }
  return j;
}

RunOutputs run_chain(const ExperimentConfig& cfg) {
  validate(cfg, Command::run);
  const ChainSampler sampler(cfg);
  const int n_chains = cfg.chains_for(Command::run);
  std::vector<TraceData> traces(static_cast<std::size_t>(n_chains));
  std::vector<double> wall(static_cast<std::size_t>(n_chains), 0.0);
  parallel_for(n_chains, cfg.workers, [&](int c) {
    const auto i = static_cast<std::size_t>(c);
    traces[i] = sample_chain(sampler, c, &wall[i]);
  });

  RunOutputs out;
  for (int c = 0; c < n_chains; ++c) {
    const auto i = static_cast<std::size_t>(c);
    const std::string trace_path = output_path(cfg, "trace_chain" + std::to_string(c) + ".csv");
    write_trace(trace_path, traces[i]);

    json metrics = trace_metrics(traces[i]);
    metrics["wall_time_sec"] = wall[i];
    metrics["min_ess_per_sec"] =
        metrics["min_ess"].is_null() || wall[i] <= 0.0 ? json(nullptr) : json(metrics["min_ess"].get<double>() / wall[i]);
    metrics["config"] = to_json(cfg);
    metrics["code_version"] = kCodeVersion;
    const std::string metrics_path = output_path(cfg, "metrics_chain" + std::to_string(c) + ".json");
    write_json(metrics_path, metrics);

    out.trace_files.push_back(trace_path);
    out.metrics_files.push_back(metrics_path);
  }
  return out;
}

Matrix draw_reference(const ChainSampler& sampler, int n_reference, std::uint64_t base_seed) {
  if (!sampler.has_reference_sampler())
    throw MissingReferenceSampler("target '" + sampler.config().target.id + "' has no reference sampler");
  Rng rng(base_seed, streams::kReference);
  Matrix ref(n_reference, sampler.dim());
  for (int i = 0; i < n_reference; ++i) ref.row(i) = sampler.sample_reference(rng).transpose();
  return ref;
}

MmdCurve compute_mmd_curve(const ExperimentConfig& cfg) {
  validate(cfg, Command::mmd_curve);
  const ChainSampler sampler(cfg);
  const int n_chains = cfg.chains_for(Command::mmd_curve);
  const Matrix ref = draw_reference(sampler, cfg.n_reference, cfg.base_seed);
  const double h = median_bandwidth(ref, bandwidth_mode_from_string(cfg.bandwidth_mode), cfg.base_seed);
  const MmdAgainstReference mmd(ref, h);

  std::vector<Vector> states(static_cast<std::size_t>(n_chains), sampler.initial_state());
  std::vector<Rng> rngs;
  rngs.reserve(states.size());
  for (int c = 0; c < n_chains; ++c) rngs.emplace_back(cfg.base_seed, static_cast<std::uint64_t>(c));

  MmdCurve curve;
  curve.bandwidth = h;
  Matrix y(n_chains, sampler.dim());
  for (int s = 1; s <= cfg.n_steps; ++s) {
    parallel_for(n_chains, cfg.workers, [&](int c) {
      const auto i = static_cast<std::size_t>(c);
      states[i] = sampler.step(states[i], rngs[i]).next;
    });
    for (int c = 0; c < n_chains; ++c) y.row(c) = states[static_cast<std::size_t>(c)].transpose();
    curve.step.push_back(s);
    curve.mmd_u2_abs.push_back(std::abs(mmd(y)));
  }

  // log-linear least squares over the nonzero values
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  int k = 0;
  for (std::size_t i = 0; i < curve.step.size(); ++i) {
    if (!(curve.mmd_u2_abs[i] > 0.0)) continue;
    const double x = curve.step[i];
    const double v = std::log(curve.mmd_u2_abs[i]);
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
    syy += v * v;
    ++k;
  }
  if (k >= 2) {
    const double cxx = sxx - sx * sx / k;
    const double cxy = sxy - sx * sy / k;
    const double cyy = syy - sy * sy / k;
    curve.slope = cxy / cxx;
    curve.intercept = (sy - curve.slope * sx) / k;
    curve.r_squared = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
  }
  return curve;
}

std::string mmd_curve(const ExperimentConfig& cfg) {
  const MmdCurve curve = compute_mmd_curve(cfg);
  const std::string path = output_path(cfg, "mmd_curve.csv");
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "# bandwidth_mode: " << cfg.bandwidth_mode << '\n';
    out << "step,mmd_u2_abs\n";
    for (std::size_t i = 0; i < curve.step.size(); ++i) out << curve.step[i] << ',' << format_double(curve.mmd_u2_abs[i]) << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
  }
  json summary;
  summary["bandwidth"] = curve.bandwidth;
  summary["bandwidth_mode"] = cfg.bandwidth_mode;
  summary["slope"] = curve.slope;
  summary["intercept"] = curve.intercept;
  summary["r_squared"] = curve.r_squared;
  summary["final_mmd_u2_abs"] = curve.mmd_u2_abs.back();
  summary["n_chains"] = cfg.chains_for(Command::mmd_curve);
  summary["n_reference"] = cfg.n_reference;
  summary["seed"] = cfg.base_seed;
  summary["config"] = to_json(cfg);
  summary["code_version"] = kCodeVersion;
  write_json(output_path(cfg, "mmd_curve_summary.json"), summary);
  return path;
}

std::string reference(const ExperimentConfig& cfg) {
  validate(cfg, Command::reference);
  const ChainSampler sampler(cfg);
  const Matrix ref = draw_reference(sampler, cfg.n_reference, cfg.base_seed);
  const std::string path = output_path(cfg, "reference.csv");
  write_samples_csv(path, ref);
  return path;
}

json diagnose(const std::vector<std::string>& trace_files, const std::optional<std::string>& reference_file,
              int n_projections, std::uint64_t seed) {
  if (trace_files.empty()) throw std::invalid_argument("diagnose needs at least one trace file");
  json out;
  out["traces"] = json::array();
  std::vector<TraceData> traces;
  for (const auto& path : trace_files) {
    TraceData t = read_trace(path);
    if (!traces.empty() && t.q.cols() != traces.front().q.cols())
      throw SchemaError(path + ": trace dimension " + std::to_string(t.q.cols()) + " differs from " +
                        std::to_string(traces.front().q.cols()));
    out["traces"].push_back({{"file", path}, {"metrics", trace_metrics(t)}});
    traces.push_back(std::move(t));
  }
  if (reference_file) {
    const Matrix ref = read_samples_csv(*reference_file);
    const Eigen::Index m = traces.front().q.cols();
    if (ref.cols() != m) throw SchemaError(*reference_file + ": reference dimension differs from the traces");
    Eigen::Index rows = 0;
    for (const auto& t : traces) rows += t.q.rows();
    Matrix pooled(rows, m);
    Eigen::Index at = 0;
    for (const auto& t : traces) {
      pooled.middleRows(at, t.q.rows()) = t.q;
      at += t.q.rows();
    }
    Rng rng(seed, streams::kProjections);
    const std::vector<double> ks = ks_random_projections(pooled, ref, n_projections, rng);
    std::vector<double> sorted = ks;
    std::sort(sorted.begin(), sorted.end());
    out["ks"] = {{"reference", *reference_file},
                 {"n_projections", n_projections},
                 {"statistics", ks},
                 {"median", sorted[(sorted.size() + 1) / 2 - 1]}};
  }
  return out;
}

}  // namespace geomc
