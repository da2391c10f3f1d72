#ifndef GEOMC_PD_LINALG_HPP
#define GEOMC_PD_LINALG_HPP

#include <Eigen/Dense>

namespace geomc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense symmetric matrix. Only the lower triangle of the source is read;
/// the upper triangle is mirrored from it, so entries(i, j) == entries(j, i)
/// holds bit-for-bit.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& source);

  static SymMatrix zero(Eigen::Index dim);
  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix diagonal(const Vector& diag);

  Eigen::Index dim() const { return entries_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  const Matrix& matrix() const { return entries_; }

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator*(double scale) const;

 private:
  Matrix entries_;
};

/// Cholesky factor L (lower, L * L^T == S) of a positive-definite matrix.
class PdFactor {
 public:
  /// Pivots at or below this value are rejected as not positive definite.
  static constexpr double kPivotTolerance = 1e-12;

  Eigen::Index dim() const { return lower_.rows(); }
  const Matrix& lower() const { return lower_; }

  /// x with S x = b.
  Vector solve(const Vector& b) const;
  /// X with S X = B.
  Matrix solve(const Matrix& b) const;
  /// S^{-1}, formed by solving against the identity.
  Matrix inverse() const;
  /// log det S = sum 2 log L_ii.
  double logdet() const;
  /// L z; maps standard normal z to N(0, S).
  Vector transform(const Vector& z) const;
  /// L^{-T} z; maps standard normal z to N(0, S^{-1}).
  Vector inverse_transpose_transform(const Vector& z) const;
  /// ||L^T x||^2 == x^T S x.
  double quadratic_form(const Vector& x) const;
  /// S reassembled from the factor.
  Matrix reconstruct() const { return lower_ * lower_.transpose(); }

 private:
  friend PdFactor factorize(const SymMatrix& s);
  explicit PdFactor(Matrix lower) : lower_(std::move(lower)) {}

  Matrix lower_;
};

/// Unpivoted Cholesky factorization. Throws NotPositiveDefinite when a pivot
/// is <= PdFactor::kPivotTolerance. No jitter is ever added.
PdFactor factorize(const SymMatrix& s);

Vector solve_pd(const PdFactor& factor, const Vector& b);
Matrix solve_pd(const PdFactor& factor, const Matrix& b);

}  // namespace geomc

#endif  // GEOMC_PD_LINALG_HPP
