#include "linsys/linalg.hpp"

#include <Eigen/SVD>

namespace linsys {

namespace {

Eigen::JacobiSVD<Matrix> svd_of(const Matrix& m, unsigned options = 0) {
  Eigen::JacobiSVD<Matrix> svd(m, options);
  if (svd.info() != Eigen::Success)
    throw numeric_error("SVD did not converge");
  return svd;
}

}  // namespace

Matrix pseudoinverse(const Matrix& m, double rank_tol) {
  require_finite(m, "pseudoinverse");
  require(rank_tol >= 0.0, "pseudoinverse: rank_tol must be >= 0");
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  const auto svd = svd_of(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax <= 0.0) return Matrix::Zero(m.cols(), m.rows());
  const double cut = rank_tol * smax;
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector singular_values(const Matrix& m) {
  require_finite(m, "singular_values");
  if (m.size() == 0) return Vector(0);
  return svd_of(m).singularValues();
}

Index matrix_rank(const Matrix& m, double rank_tol) {
  if (m.size() == 0) return 0;
  const Vector s = singular_values(m);
  const double smax = s(0);
  if (smax <= 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rank_tol * smax) ++r;
  return r;
}

Matrix annihilator(const std::optional<Matrix>& a0, Index p, double rank_tol) {
  require(p >= 1, "annihilator: p must be >= 1");
  if (!a0) return Matrix::Identity(p, p);
  require(a0->rows() == p, "annihilator: a0 must have p rows");
  return Matrix::Identity(p, p) - *a0 * pseudoinverse(*a0, rank_tol);
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace linsys
