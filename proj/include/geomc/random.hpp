#ifndef GEOMC_RANDOM_HPP
#define GEOMC_RANDOM_HPP

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace geomc {

/// Per-chain random source.
///
/// The engine is seeded from (base_seed, stream) only, so a chain's draws do
/// not depend on how many other chains exist or in what order they run.
/// Normal draws keep a single distribution object so that two kernels that
/// request the same sequence of normals and uniforms see identical values.
class Rng {
 public:
  explicit Rng(std::uint64_t base_seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed),
                      static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

  /// Gamma draw in shape/rate form.
  double gamma(double shape, double rate) {
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(engine_);
  }

  double chi_squared(double dof) {
    std::chi_squared_distribution<double> dist(dof);
    return dist(engine_);
  }

  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Stream tags that keep auxiliary draws disjoint from chain streams.
namespace streams {
inline constexpr std::uint64_t kReference = 0xFFFF'0000'0000'0001ull;
inline constexpr std::uint64_t kProjections = 0xFFFF'0000'0000'0002ull;
inline constexpr std::uint64_t kBandwidth = 0xFFFF'0000'0000'0003ull;
inline constexpr std::uint64_t kData = 0xFFFF'0000'0000'0004ull;
}  // namespace streams

}  // namespace geomc

#endif  // GEOMC_RANDOM_HPP
