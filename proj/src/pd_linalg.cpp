#include "geomc/pd_linalg.hpp"

#include <cmath>
#include <sstream>

#include "geomc/errors.hpp"

namespace geomc {

namespace {

void check_rows(const PdFactor& f, Eigen::Index rows) {
  if (rows != f.dim()) {
    std::ostringstream msg;
    msg << "right-hand side has " << rows << " rows, factor is " << f.dim() << "x" << f.dim();
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& source) {
  if (source.rows() != source.cols()) throw DimensionMismatch("SymMatrix requires a square source");
  entries_ = source.triangularView<Eigen::Lower>();
  entries_.triangularView<Eigen::StrictlyUpper>() = entries_.transpose().triangularView<Eigen::StrictlyUpper>();
}

SymMatrix SymMatrix::zero(Eigen::Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::identity(Eigen::Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  if (dim() != other.dim()) throw DimensionMismatch("SymMatrix sum of different sizes");
  return SymMatrix(Matrix(entries_ + other.entries_));
}

SymMatrix SymMatrix::operator*(double scale) const { return SymMatrix(Matrix(entries_ * scale)); }

PdFactor factorize(const SymMatrix& s) {
  const Eigen::Index n = s.dim();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > PdFactor::kPivotTolerance)) {
      std::ostringstream msg;
      msg << "pivot " << j << " = " << pivot << " is not above " << PdFactor::kPivotTolerance;
      throw NotPositiveDefinite(msg.str());
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return PdFactor(std::move(l));
}

Vector PdFactor::solve(const Vector& b) const {
  check_rows(*this, b.rows());
  Vector y = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix PdFactor::solve(const Matrix& b) const {
  check_rows(*this, b.rows());
  Matrix y = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix PdFactor::inverse() const { return solve(Matrix(Matrix::Identity(dim(), dim()))); }

double PdFactor::logdet() const { return 2.0 * lower_.diagonal().array().log().sum(); }

Vector PdFactor::transform(const Vector& z) const {
  check_rows(*this, z.rows());
  return lower_.triangularView<Eigen::Lower>() * z;
}

Vector PdFactor::inverse_transpose_transform(const Vector& z) const {
  check_rows(*this, z.rows());
  return lower_.transpose().triangularView<Eigen::Upper>().solve(z);
}

double PdFactor::quadratic_form(const Vector& x) const {
  check_rows(*this, x.rows());
  return (lower_.transpose().triangularView<Eigen::Upper>() * x).squaredNorm();
}

Vector solve_pd(const PdFactor& factor, const Vector& b) { return factor.solve(b); }

Matrix solve_pd(const PdFactor& factor, const Matrix& b) { return factor.solve(b); }

}  // namespace geomc
