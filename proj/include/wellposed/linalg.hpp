#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "wellposed/types.hpp"

namespace wellposed::linalg {

template <class Derived>
VectorXd singular_values(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  if (m.rows() == 0 || m.cols() == 0) return VectorXd();
  const Mat<S> dense = m;
  if (std::min(dense.rows(), dense.cols()) <= 16) {
    return Eigen::JacobiSVD<Mat<S>>(dense).singularValues();
  }
  return Eigen::BDCSVD<Mat<S>>(dense).singularValues();
}

/// Operator 2-norm. Zero for empty matrices.
template <class Derived>
double norm2(const Eigen::MatrixBase<Derived>& m) {
  const VectorXd s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

/// Smallest of the min(rows, cols) singular values.
template <class Derived>
double sigma_min(const Eigen::MatrixBase<Derived>& m) {
  const VectorXd s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

template <class Derived>
VectorXc eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() == 0) return VectorXc();
  const MatrixXc ac = a.template cast<Complex>();
  Eigen::ComplexEigenSolver<MatrixXc> es(ac, false);
  if (es.info() != Eigen::Success) throw InvalidInput("eigenvalue solver did not converge");
  return es.eigenvalues();
}

/// max Re(spec A); -inf for an empty matrix.
template <class Derived>
double spectral_abscissa(const Eigen::MatrixBase<Derived>& a) {
  const VectorXc ev = eigenvalues(a);
  double out = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ev.size(); ++i) out = std::max(out, ev(i).real());
  return out;
}

template <class Derived>
double spectral_radius(const Eigen::MatrixBase<Derived>& a) {
  const VectorXc ev = eigenvalues(a);
  double out = 0.0;
  for (Index i = 0; i < ev.size(); ++i) out = std::max(out, std::abs(ev(i)));
  return out;
}

/// ||lhs - rhs||_F / max(||lhs||_F, ||rhs||_F); zero when both vanish.
template <class D1, class D2>
double relative_deviation(const Eigen::MatrixBase<D1>& lhs, const Eigen::MatrixBase<D2>& rhs) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols())
    throw InvalidInput("relative_deviation: shape mismatch");
  const double scale = std::max(lhs.norm(), rhs.norm());
  if (scale == 0.0) return 0.0;
  return (lhs - rhs).norm() / scale;
}

/// e^M by scaling and squaring with a Pade approximant.
template <class Derived>
Mat<typename Derived::Scalar> expm(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  if (!m.allFinite()) throw InvalidInput("expm: non-finite entries");
  if (m.rows() == 0) return Mat<S>(0, 0);
  const Mat<S> dense = m;
  Mat<S> out = dense.exp();
  if (!out.allFinite()) throw InvalidInput("expm: result overflowed");
  return out;
}

/// Returns (e^{A h}, int_0^h e^{As} ds X) using one exponential of the
/// block matrix [[A, X], [0, 0]] h.
template <class S>
std::pair<Mat<S>, Mat<S>> exp_and_integral(const Mat<S>& a, const Mat<S>& x, double h) {
  const Index n = a.rows();
  const Index m = x.cols();
  Mat<S> aug = Mat<S>::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * S(h);
  aug.topRightCorner(n, m) = x * S(h);
  const Mat<S> e = expm(aug);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

/// Solves (lambda I - A) X = rhs, throwing SpectrumError when lambda is
/// numerically an eigenvalue of A.
template <class S, class Derived>
MatrixXc resolvent_solve(const Mat<S>& a, Complex lambda, const Eigen::MatrixBase<Derived>& rhs,
                         double rcond_floor = 1e-14) {
  const Index n = a.rows();
  MatrixXc shifted = -a.template cast<Complex>();
  shifted.diagonal().array() += lambda;
  Eigen::PartialPivLU<MatrixXc> lu(shifted);
  if (n > 0 && !(lu.rcond() > rcond_floor))
    throw SpectrumError(lambda, "lambda lies in the spectrum of A");
  return lu.solve(rhs.template cast<Complex>());
}

template <class S>
Mat<S> identity(Index n) {
  return Mat<S>::Identity(n, n);
}

/// Inverse of a square matrix, throwing FeedbackLoopError when singular.
template <class S>
Mat<S> checked_inverse(const Mat<S>& m, const char* what, double rcond_floor = 1e-13) {
  if (m.rows() != m.cols()) throw InvalidInput(std::string(what) + ": not square");
  if (m.rows() == 0) return m;
  Eigen::PartialPivLU<Mat<S>> lu(m);
  if (!(lu.rcond() > rcond_floor)) throw FeedbackLoopError(std::string(what) + " is singular");
  return lu.inverse();
}

}  // namespace wellposed::linalg
