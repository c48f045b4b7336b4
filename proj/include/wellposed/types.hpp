#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <utility>

#include <Eigen/Dense>

#include "wellposed/errors.hpp"

namespace wellposed {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Mat<double>;
using VectorXd = Vec<double>;
using MatrixXc = Mat<Complex>;
using VectorXc = Vec<Complex>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Supported scalar fields: real and complex double precision.
template <class T>
concept SystemScalar = std::is_same_v<T, double> || std::is_same_v<T, Complex>;

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Finite-dimensional surrogate of a regular system node (A, B, C, D):
///   x' = A x + B u,   y = C x + D u.
/// At finite dimension A_{-1} = A, C_Lambda = C and J^{A,A'} = I.
template <SystemScalar Scalar = double>
struct Realization {
  using scalar_type = Scalar;

  Mat<Scalar> A;
  Mat<Scalar> B;
  Mat<Scalar> C;
  Mat<Scalar> D;
  std::string state_label = "X";
  std::string input_label = "U";
  std::string output_label = "Y";

  Realization() = default;
  Realization(Mat<Scalar> a, Mat<Scalar> b, Mat<Scalar> c, Mat<Scalar> d)
      : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
    validate();
  }

  Index states() const { return A.rows(); }
  Index inputs() const { return B.cols(); }
  Index outputs() const { return C.rows(); }

  void validate() const {
    if (A.rows() != A.cols()) throw InvalidInput("Realization: A must be square");
    if (B.rows() != A.rows()) throw InvalidInput("Realization: B must have as many rows as A");
    if (C.cols() != A.rows()) throw InvalidInput("Realization: C must have as many columns as A");
    if (D.rows() != C.rows() || D.cols() != B.cols())
      throw InvalidInput("Realization: D must be outputs x inputs");
    if (!all_finite(A) || !all_finite(B) || !all_finite(C) || !all_finite(D))
      throw InvalidInput("Realization: non-finite entry");
  }

  template <class Other>
  Realization<Other> cast() const {
    Realization<Other> r(A.template cast<Other>(), B.template cast<Other>(),
                         C.template cast<Other>(), D.template cast<Other>());
    r.state_label = state_label;
    r.input_label = input_label;
    r.output_label = output_label;
    return r;
  }
};

/// Uniform grid t_k = k*dt on [0, t_end], k = 0..n_steps.
class TimeGrid {
 public:
  TimeGrid(double t_end, Index n_steps) : t_end_(t_end), n_steps_(n_steps) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidInput("TimeGrid: t_end must be positive and finite");
    if (n_steps < 1) throw InvalidInput("TimeGrid: n_steps must be >= 1");
  }

  double t_end() const { return t_end_; }
  Index n_steps() const { return n_steps_; }
  double dt() const { return t_end_ / static_cast<double>(n_steps_); }
  double time(Index k) const { return static_cast<double>(k) * dt(); }

  /// Number of steps that reach t0; throws unless t0 lies on the grid.
  Index steps_to(double t0) const {
    const double ratio = t0 / dt();
    const double k = std::round(ratio);
    if (!(t0 > 0.0) || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio) || k > static_cast<double>(n_steps_))
      throw InvalidInput("TimeGrid: t0 is not a positive grid point");
    return static_cast<Index>(k);
  }

  /// The first `steps` steps of this grid.
  TimeGrid prefix(Index steps) const { return TimeGrid(time(steps), steps); }

  bool operator==(const TimeGrid& o) const { return t_end_ == o.t_end_ && n_steps_ == o.n_steps_; }

 private:
  double t_end_;
  Index n_steps_;
};

/// Vector-valued samples on a TimeGrid. Column k holds the value at t_k.
/// Inputs are read as zero-order hold: column k acts on [t_k, t_{k+1}).
template <SystemScalar Scalar = double>
struct Signal {
  TimeGrid grid;
  Mat<Scalar> values;

  Signal(TimeGrid g, Mat<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.cols() != grid.n_steps() + 1)
      throw InvalidInput("Signal: sample count must be n_steps + 1");
  }

  static Signal zeros(TimeGrid g, Index dim) {
    return Signal(g, Mat<Scalar>::Zero(dim, g.n_steps() + 1));
  }
  static Signal constant(TimeGrid g, const Vec<Scalar>& value) {
    return Signal(g, value.replicate(1, g.n_steps() + 1));
  }

  Index dim() const { return values.rows(); }
  Vec<Scalar> at(Index k) const { return values.col(k); }

  /// Samples from index `first` onward, on a grid starting at zero.
  Signal shifted(Index first) const {
    const Index steps = grid.n_steps() - first;
    return Signal(TimeGrid(grid.time(steps), steps), values.rightCols(steps + 1));
  }

  /// L2 norm of the zero-order-hold signal on [0, t_end].
  double l2_norm() const {
    return std::sqrt(grid.dt()) * values.leftCols(grid.n_steps()).norm();
  }
};

}  // namespace wellposed
