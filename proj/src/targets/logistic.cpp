#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "geomc/errors.hpp"
#include "geomc/targets.hpp"

namespace geomc {

namespace {

double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

class LogisticDensity final : public Density {
 public:
  LogisticDensity(std::shared_ptr<const LogisticData> data, double alpha) : data_(std::move(data)), alpha_(alpha) {}

  int dim() const override { return static_cast<int>(data_->x.cols()); }

  double log_density(const Vector& beta) const override {
    const Vector eta = data_->x * beta;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) acc += data_->y[i] * eta[i] - softplus(eta[i]);
    return acc - 0.5 * alpha_ * beta.squaredNorm();
  }

  Vector grad_log_density(const Vector& beta) const override {
    const Vector eta = data_->x * beta;
    Vector resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = data_->y[i] - logistic(eta[i]);
    return data_->x.transpose() * resid - alpha_ * beta;
  }

  std::string name() const override { return "logistic"; }

  const LogisticData& data() const { return *data_; }
  double alpha() const { return alpha_; }

 private:
  std::shared_ptr<const LogisticData> data_;
  double alpha_;
};

/// X^T Lambda X + alpha I, the Fisher information plus the prior precision.
class LogisticMetric final : public Metric {
 public:
  explicit LogisticMetric(std::shared_ptr<const LogisticDensity> density) : density_(std::move(density)) {}

  MetricValue evaluate(const Vector& beta, int order) const override {
    const Matrix& x = density_->data().x;
    const Eigen::Index m = x.cols();
    const Vector eta = x * beta;
    Vector w(eta.size());
    Vector dw(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double s = logistic(eta[i]);
      w[i] = s * (1.0 - s);
      dw[i] = w[i] * (1.0 - 2.0 * s);
    }
    Matrix g = x.transpose() * w.asDiagonal() * x;
    g.diagonal().array() += density_->alpha();
    MetricValue out{SymMatrix(g), {}};
    if (order >= 1) {
      out.dg.reserve(static_cast<std::size_t>(m));
      for (Eigen::Index k = 0; k < m; ++k) {
        const Vector weights = dw.cwiseProduct(x.col(k));
        out.dg.emplace_back(Matrix(x.transpose() * weights.asDiagonal() * x));
      }
    }
    return out;
  }

  std::string name() const override { return "fisher-plus-prior"; }

 private:
  std::shared_ptr<const LogisticDensity> density_;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

}  // namespace

LogisticData load_design_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open design file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("design file '" + path + "' is empty");
  const auto header = split_csv_line(line);
  std::ptrdiff_t label_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") label_col = static_cast<std::ptrdiff_t>(c);
  }
  if (label_col < 0) throw SchemaError("design file '" + path + "' has no column named \"y\"");
  const std::size_t n_cols = header.size();
  if (n_cols < 2) throw SchemaError("design file '" + path + "' has no covariates");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != n_cols) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(n_cols) + " fields");
    }
    std::vector<double> row(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
      try {
        std::size_t used = 0;
        row[c] = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw SchemaError(path + ":" + std::to_string(line_no) + ": not a number: '" + cells[c] + "'");
      }
    }
    const double label = row[static_cast<std::size_t>(label_col)];
    if (label != 0.0 && label != 1.0)
      throw SchemaError(path + ":" + std::to_string(line_no) + ": label must be 0 or 1");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SchemaError("design file '" + path + "' has no observations");

  LogisticData data{Matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols - 1)),
                    Vector(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (static_cast<std::ptrdiff_t>(c) == label_col) {
        data.y[static_cast<Eigen::Index>(r)] = rows[r][c];
      } else {
        data.x(static_cast<Eigen::Index>(r), col++) = rows[r][c];
      }
    }
  }
  return data;
}

void write_design_csv(const std::string& path, const LogisticData& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write design file '" + path + "'");
  for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << 'x' << c << ',';
  out << "y\n";
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << data.x(r, c) << ',';
    out << static_cast<int>(data.y[r]) << '\n';
  }
}

LogisticData synthesize_logistic_data(int n_obs, int m, std::uint64_t seed) {
  if (n_obs < 1 || m < 1) throw std::invalid_argument("logistic data requires N >= 1 and m >= 1");
  Rng rng(seed, streams::kData);
  Vector beta_true(m);
  for (int j = 0; j < m; ++j) beta_true[j] = 0.5 * rng.normal();
  LogisticData data{Matrix(n_obs, m), Vector(n_obs)};
  for (int i = 0; i < n_obs; ++i) {
    data.x(i, 0) = 1.0;
    for (int j = 1; j < m; ++j) data.x(i, j) = rng.normal();
    const double p = logistic(data.x.row(i).dot(beta_true));
    data.y[i] = rng.uniform() < p ? 1.0 : 0.0;
  }
  return data;
}

HierLogistic::HierLogistic(LogisticData data, double omega, double theta)
    : data_(std::make_shared<const LogisticData>(std::move(data))), omega_(omega), theta_(theta) {
  if (data_->x.rows() != data_->y.size()) throw DimensionMismatch("design rows and labels differ");
  if (!(omega_ > 0.0) || !(theta_ > 0.0)) throw std::invalid_argument("Gamma prior parameters must be positive");
  for (Eigen::Index i = 0; i < data_->y.size(); ++i) {
    if (data_->y[i] != 0.0 && data_->y[i] != 1.0) throw std::invalid_argument("labels must be 0 or 1");
  }
}

TargetModel HierLogistic::conditional(double alpha) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  auto density = std::make_shared<LogisticDensity>(data_, alpha);
  auto metric = std::make_shared<LogisticMetric>(density);
  return TargetModel(density, std::move(metric));
}

double HierLogistic::gibbs_alpha_update(const LogisticGibbsState& state, Rng& rng) const {
  return geomc::gibbs_alpha_update(state, omega_, theta_, rng);
}

HierLogistic make_hier_logistic(LogisticData data, double omega, double theta) {
  return HierLogistic(std::move(data), omega, theta);
}

GammaParams alpha_conditional(const LogisticGibbsState& state, double omega, double theta) {
  return {omega + 0.5 * static_cast<double>(state.beta.size()), 1.0 / theta + 0.5 * state.beta.squaredNorm()};
}

double gibbs_alpha_update(const LogisticGibbsState& state, double omega, double theta, Rng& rng) {
  const GammaParams p = alpha_conditional(state, omega, theta);
  return rng.gamma(p.shape, p.rate);
}

}  // namespace geomc
