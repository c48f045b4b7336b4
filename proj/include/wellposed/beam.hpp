#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "wellposed/boundary.hpp"
#include "wellposed/random.hpp"
#include "wellposed/linalg.hpp"
#include "wellposed/system_node.hpp"
#include "wellposed/types.hpp"

namespace wellposed::beam {

/// w_tt + w_xxxx = 0 on (0,1), w(0) = w_x(0) = w_xx(1) = 0, shear w_xxx(1) = u.
enum class BoundaryMode { homogeneous, shear_input, shear_feedback };

/// Boundary traces read from the displacement/velocity state.
enum class Trace { slope_tip, tip_velocity, curvature_root };

/// Energy-consistent finite differences on x_j = j h, h = 1/(N+1).
///
/// Unknowns are w_1..w_{N+1} (w_0 = 0 is eliminated). Curvature
/// kappa_0 = 2 w_1 / h^2 (ghost w_{-1} = w_1 from w_x(0) = 0), kappa_j the
/// centered second difference for j = 1..N, kappa_{N+1} = 0. Stiffness
/// K = h D^T diag(1/2, 1, ..., 1) D and trapezoid mass (h/2 at the tip), so
/// the discrete energy obeys dF/dt = -u v_tip. The shear enters as the
/// generalized tip force -u.
class BeamModel {
 public:
  BeamModel(int n_interior, BoundaryMode mode = BoundaryMode::homogeneous, double gain = 0.0)
      : n_(n_interior), mode_(mode), gain_(gain) {
    if (n_interior < 8) throw InvalidInput("BeamModel: N must be >= 8");
    if (!(gain >= 0.0) || !std::isfinite(gain)) throw InvalidInput("BeamModel: feedback gain must be >= 0");
    h_ = 1.0 / (n_ + 1);
    const Index d = dofs();
    const double ih2 = 1.0 / (h_ * h_);
    curvature_ = MatrixXd::Zero(n_ + 1, d);
    curvature_(0, 0) = 2.0 * ih2;
    for (Index j = 1; j <= n_; ++j) {
      curvature_(j, j) += ih2;  // w_{j+1}
      curvature_(j, j - 1) += -2.0 * ih2;
      if (j >= 2) curvature_(j, j - 2) += ih2;
    }
    VectorXd weights = VectorXd::Constant(n_ + 1, h_);
    weights(0) = 0.5 * h_;
    stiffness_ = curvature_.transpose() * weights.asDiagonal() * curvature_;
    mass_ = VectorXd::Constant(d, h_);
    mass_(d - 1) = 0.5 * h_;
    nodes_ = VectorXd::LinSpaced(d, h_, 1.0);

    // K = (W^{1/2} D)^T (W^{1/2} D); the singular values of W^{1/2} D M^{-1/2}
    // are the frequencies, with absolute error ~ eps * omega_max rather than
    // eps * omega_max^2 from an eigen-solve of M^{-1/2} K M^{-1/2}.
    const VectorXd inv_sqrt = mass_.cwiseSqrt().cwiseInverse();
    const MatrixXd root = weights.cwiseSqrt().asDiagonal() * curvature_ * inv_sqrt.asDiagonal();
    Eigen::BDCSVD<MatrixXd> svd(root, Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw InvalidInput("BeamModel: modal decomposition failed");
    omega_ = svd.singularValues().reverse();
    modes_ = inv_sqrt.asDiagonal() * svd.matrixV().rowwise().reverse();
  }

  int n_interior() const { return n_; }
  Index dofs() const { return n_ + 1; }
  double dx() const { return h_; }
  BoundaryMode mode() const { return mode_; }
  double gain() const { return gain_; }
  const MatrixXd& curvature_operator() const { return curvature_; }
  const MatrixXd& stiffness() const { return stiffness_; }
  const VectorXd& mass() const { return mass_; }
  const VectorXd& nodes() const { return nodes_; }
  const VectorXd& frequencies() const { return omega_; }
  const MatrixXd& mode_shapes() const { return modes_; }

  /// Row acting on w (dofs entries).
  Eigen::RowVectorXd displacement_trace(Trace t) const {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dofs());
    const Index e = dofs() - 1;
    if (t == Trace::slope_tip) {
      row(e) = 3.0 / (2.0 * h_);
      row(e - 1) = -4.0 / (2.0 * h_);
      row(e - 2) = 1.0 / (2.0 * h_);
    } else if (t == Trace::curvature_root) {
      row(0) = 2.0 / (h_ * h_);
    }
    return row;
  }

  /// Row acting on the state (w, v).
  Eigen::RowVectorXd state_trace(Trace t) const {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2 * dofs());
    if (t == Trace::tip_velocity)
      row(2 * dofs() - 1) = 1.0;
    else
      row.head(dofs()) = displacement_trace(t);
    return row;
  }

  /// Generator with the boundary condition of the mode (homogeneous and
  /// shear_input share the conservative generator).
  MatrixXd generator() const {
    const Index d = dofs();
    MatrixXd a = MatrixXd::Zero(2 * d, 2 * d);
    a.topRightCorner(d, d).setIdentity();
    a.bottomLeftCorner(d, d) = -(mass_.cwiseInverse().asDiagonal() * stiffness_);
    if (mode_ == BoundaryMode::shear_feedback) a(2 * d - 1, 2 * d - 1) -= gain_ / mass_(d - 1);
    return a;
  }

  /// Shear input column.
  VectorXd input_column() const {
    VectorXd b = VectorXd::Zero(2 * dofs());
    b(2 * dofs() - 1) = -1.0 / mass_(dofs() - 1);
    return b;
  }

  /// Input: shear. Outputs: w_x(1), w_t(1), w_xx(0).
  Realization<double> realization() const {
    MatrixXd c(3, 2 * dofs());
    c.row(0) = state_trace(Trace::slope_tip);
    c.row(1) = state_trace(Trace::tip_velocity);
    c.row(2) = state_trace(Trace::curvature_root);
    Realization<double> r(generator(), input_column(), c, MatrixXd::Zero(3, 1));
    r.state_label = "(w, w_t)";
    r.input_label = "w_xxx(1)";
    r.output_label = "(w_x(1), w_t(1), w_xx(0))";
    return r;
  }

  /// Extended coordinates z = (w, v, beta) with beta the shear value;
  /// G z = beta, K the observed trace.
  BoundaryTriple<double> triple(Trace observed = Trace::slope_tip) const {
    const Index s = 2 * dofs();
    MatrixXd l(s, s + 1);
    const BeamModel conservative(n_);
    l.leftCols(s) = conservative.generator();
    l.col(s) = input_column();
    MatrixXd g = MatrixXd::Zero(1, s + 1);
    g(0, s) = 1.0;
    MatrixXd k = MatrixXd::Zero(1, s + 1);
    k.leftCols(s) = state_trace(observed);
    return BoundaryTriple<double>(l, g, k);
  }

 private:
  int n_;
  BoundaryMode mode_;
  double gain_;
  double h_ = 0.0;
  MatrixXd curvature_, stiffness_, modes_;
  VectorXd mass_, nodes_, omega_;
};

inline BeamModel beam_discretize(int n_interior, BoundaryMode mode, double gain = 0.0) {
  return BeamModel(n_interior, mode, gain);
}

struct BeamState {
  VectorXd w;
  VectorXd v;
  double t = 0.0;
};

namespace detail {

inline void require_state(const BeamModel& m, const BeamState& s) {
  if (s.w.size() != m.dofs() || s.v.size() != m.dofs()) throw InvalidInput("BeamState: length does not match model");
  if (!s.w.allFinite() || !s.v.allFinite()) throw InvalidInput("BeamState: non-finite entry");
}

/// Centered w_x at the interior nodes x_1..x_N (w_0 = 0).
inline VectorXd interior_slope(const BeamModel& m, const VectorXd& w) {
  const int n = m.n_interior();
  VectorXd out(n);
  for (int j = 1; j <= n; ++j) {
    const double left = j >= 2 ? w(j - 2) : 0.0;
    out(j - 1) = (w(j) - left) / (2.0 * m.dx());
  }
  return out;
}

/// Trapezoid integrals over [0, 1] of f * v^2 and f * kappa^2 (v_0 = 0, kappa_{N+1} = 0).
inline double weighted_velocity_square(const BeamModel& m, const VectorXd& v, const std::function<double(double)>& f) {
  double sum = 0.0;
  for (Index j = 0; j < m.dofs(); ++j) {
    const double wt = j == m.dofs() - 1 ? 0.5 * m.dx() : m.dx();
    sum += wt * f(m.nodes()(j)) * v(j) * v(j);
  }
  return sum;
}

inline double weighted_curvature_square(const BeamModel& m, const VectorXd& w, const std::function<double(double)>& f) {
  const VectorXd kappa = m.curvature_operator() * w;
  double sum = 0.5 * m.dx() * f(0.0) * kappa(0) * kappa(0);
  for (Index j = 1; j < kappa.size(); ++j) sum += m.dx() * f(j * m.dx()) * kappa(j) * kappa(j);
  return sum;
}

}  // namespace detail

/// F = 1/2 int (w_t^2 + w_xx^2) dx, trapezoid with the dynamics' curvature stencil.
inline double energy(const BeamModel& m, const BeamState& s) {
  detail::require_state(m, s);
  const VectorXd kappa = m.curvature_operator() * s.w;
  const double bending = m.dx() * (kappa.squaredNorm() - 0.5 * kappa(0) * kappa(0));
  return 0.5 * (s.v.dot(m.mass().cwiseProduct(s.v)) + bending);
}

/// rho = int x(x-1) w_t w_x dx.
inline double multiplier_rho(const BeamModel& m, const BeamState& s) {
  detail::require_state(m, s);
  const VectorXd wx = detail::interior_slope(m, s.w);
  double sum = 0.0;
  for (int j = 0; j < m.n_interior(); ++j) {
    const double x = m.nodes()(j);
    sum += x * (x - 1.0) * s.v(j) * wx(j);
  }
  return m.dx() * sum;
}

/// rho1 = int (x-1) w_t w_x dx.
inline double multiplier_rho1(const BeamModel& m, const BeamState& s) {
  detail::require_state(m, s);
  const VectorXd wx = detail::interior_slope(m, s.w);
  double sum = 0.0;
  for (int j = 0; j < m.n_interior(); ++j) sum += (m.nodes()(j) - 1.0) * s.v(j) * wx(j);
  return m.dx() * sum;
}

inline double slope_tip(const BeamModel& m, const VectorXd& w) {
  return m.displacement_trace(Trace::slope_tip).dot(w);
}

inline double curvature_root(const BeamModel& m, const VectorXd& w) {
  return m.displacement_trace(Trace::curvature_root).dot(w);
}

/// Right-hand side of the rho identity: -1/2 int (2x-1)(w_t^2 + 3 w_xx^2) - w_x(1)^2.
inline double rho_identity_rhs(const BeamModel& m, const BeamState& s) {
  auto f = [](double x) { return 2.0 * x - 1.0; };
  const double sx = slope_tip(m, s.w);
  return -0.5 * (detail::weighted_velocity_square(m, s.v, f) + 3.0 * detail::weighted_curvature_square(m, s.w, f)) -
         sx * sx;
}

/// Right-hand side of the rho1 identity: 1/2 w_xx(0)^2 - 1/2 int (w_t^2 + 3 w_xx^2).
inline double rho1_identity_rhs(const BeamModel& m, const BeamState& s) {
  auto one = [](double) { return 1.0; };
  const double k0 = curvature_root(m, s.w);
  return 0.5 * k0 * k0 -
         0.5 * (detail::weighted_velocity_square(m, s.v, one) + 3.0 * detail::weighted_curvature_square(m, s.w, one));
}

struct FunctionalTrace {
  TimeGrid grid{1.0, 1};
  VectorXd F, rho, rho1, w_x_1, w_xx_0;
};

struct Trajectory {
  MatrixXd W;  // dofs x (n_steps + 1)
  MatrixXd V;
  FunctionalTrace trace;
};

/// Modal coordinates q = Phi^T M w, p = Phi^T M v.
struct ModalState {
  VectorXd q, p;
};

inline ModalState to_modal(const BeamModel& m, const BeamState& s) {
  detail::require_state(m, s);
  const MatrixXd pm = m.mode_shapes().transpose() * m.mass().asDiagonal();
  return {pm * s.w, pm * s.v};
}

namespace detail {

/// Exact held-input steps of q'' + w^2 q = beta u for the modes that carry
/// energy (all modes when forced).
class ModalPropagator {
 public:
  ModalPropagator(const BeamModel& m, const ModalState& ms, double dt, bool forced) {
    const Index d = m.dofs();
    double total = 0.0;
    VectorXd e(d);
    for (Index i = 0; i < d; ++i) {
      const double w = m.frequencies()(i);
      e(i) = w * w * ms.q(i) * ms.q(i) + ms.p(i) * ms.p(i);
      total += e(i);
    }
    for (Index i = 0; i < d; ++i)
      if (forced || e(i) > 1e-24 * total) active_.push_back(i);
    const Index a = static_cast<Index>(active_.size());
    q_.resize(a);
    p_.resize(a);
    c_.resize(a);
    s_.resize(a);
    omega_.resize(a);
    beta_.resize(a);
    for (Index k = 0; k < a; ++k) {
      const Index i = active_[static_cast<std::size_t>(k)];
      q_(k) = ms.q(i);
      p_(k) = ms.p(i);
      omega_(k) = m.frequencies()(i);
      c_(k) = std::cos(omega_(k) * dt);
      s_(k) = std::sin(omega_(k) * dt);
      beta_(k) = -m.mode_shapes()(d - 1, i);
    }
    dt_ = dt;
  }

  const std::vector<Index>& active() const { return active_; }
  const VectorXd& q() const { return q_; }
  const VectorXd& p() const { return p_; }

  /// Columns of `basis` restricted to the active modes.
  MatrixXd restrict(const MatrixXd& basis) const {
    MatrixXd out(basis.rows(), static_cast<Index>(active_.size()));
    for (std::size_t k = 0; k < active_.size(); ++k) out.col(static_cast<Index>(k)) = basis.col(active_[k]);
    return out;
  }

  void step(double u) {
    for (Index k = 0; k < q_.size(); ++k) {
      const double w = omega_(k), bu = beta_(k) * u;
      if (w == 0.0) {
        q_(k) += dt_ * p_(k) + 0.5 * dt_ * dt_ * bu;
        p_(k) += dt_ * bu;
        continue;
      }
      const double q1 = c_(k) * q_(k) + s_(k) / w * p_(k) + bu * (1.0 - c_(k)) / (w * w);
      const double p1 = -w * s_(k) * q_(k) + c_(k) * p_(k) + bu * s_(k) / w;
      q_(k) = q1;
      p_(k) = p1;
    }
  }

 private:
  std::vector<Index> active_;
  VectorXd q_, p_, c_, s_, omega_, beta_;
  double dt_ = 0.0;
};

inline FunctionalTrace functionals_of(const BeamModel& m, const TimeGrid& g, const MatrixXd& w, const MatrixXd& v) {
  FunctionalTrace tr;
  tr.grid = g;
  const Index cols = w.cols();
  tr.F.resize(cols);
  tr.rho.resize(cols);
  tr.rho1.resize(cols);
  tr.w_x_1.resize(cols);
  tr.w_xx_0.resize(cols);
  for (Index k = 0; k < cols; ++k) {
    const BeamState s{w.col(k), v.col(k), g.time(k)};
    tr.F(k) = energy(m, s);
    tr.rho(k) = multiplier_rho(m, s);
    tr.rho1(k) = multiplier_rho1(m, s);
    tr.w_x_1(k) = slope_tip(m, s.w);
    tr.w_xx_0(k) = curvature_root(m, s.w);
  }
  return tr;
}

}  // namespace detail

/// Exact-per-step integration. Conservative and shear-input modes use the
/// modal decomposition (exact for held inputs); feedback mode uses the
/// zero-order-hold exponential of the damped generator.
inline Trajectory simulate(const BeamModel& m, const TimeGrid& g, const BeamState& x0,
                           const Signal<double>* u = nullptr) {
  detail::require_state(m, x0);
  if (u && (u->dim() != 1 || !(u->grid == g))) throw InvalidInput("beam simulate: input must be scalar on the grid");
  if (u && m.mode() == BoundaryMode::homogeneous)
    throw InvalidInput("beam simulate: homogeneous mode takes no input");
  const Index d = m.dofs(), steps = g.n_steps();
  Trajectory out;
  out.W.resize(d, steps + 1);
  out.V.resize(d, steps + 1);

  if (m.mode() == BoundaryMode::shear_feedback) {
    const Realization<double> r = m.realization();
    const auto node = discretize_zoh(r, g.dt());
    VectorXd x(2 * d);
    x << x0.w, x0.v;
    for (Index k = 0; k <= steps; ++k) {
      out.W.col(k) = x.head(d);
      out.V.col(k) = x.tail(d);
      if (k < steps) x = node.Ad * x + node.Bd * (u ? u->values(0, k) : 0.0);
    }
  } else {
    detail::ModalPropagator prop(m, to_modal(m, x0), g.dt(), u != nullptr);
    const MatrixXd phi = prop.restrict(m.mode_shapes());
    for (Index k = 0; k <= steps; ++k) {
      out.W.col(k) = phi * prop.q();
      out.V.col(k) = phi * prop.p();
      if (k < steps) prop.step(u ? u->values(0, k) : 0.0);
    }
  }
  out.trace = detail::functionals_of(m, g, out.W, out.V);
  return out;
}

/// Time series of displacement traces, integrated in modal coordinates
/// without forming the full state.
inline MatrixXd trace_series(const BeamModel& m, const TimeGrid& g, const BeamState& x0, const std::vector<Trace>& traces,
                             const Signal<double>* u = nullptr) {
  detail::require_state(m, x0);
  if (m.mode() == BoundaryMode::shear_feedback) throw InvalidInput("trace_series: modal route needs a conservative mode");
  if (u && (u->dim() != 1 || !(u->grid == g))) throw InvalidInput("trace_series: input must be scalar on the grid");
  const Index d = m.dofs(), steps = g.n_steps();
  detail::ModalPropagator prop(m, to_modal(m, x0), g.dt(), u != nullptr);
  MatrixXd rows(static_cast<Index>(traces.size()), m.dofs());
  for (std::size_t t = 0; t < traces.size(); ++t) rows.row(static_cast<Index>(t)) = m.displacement_trace(traces[t]);
  const MatrixXd modal_rows = rows * prop.restrict(m.mode_shapes());
  MatrixXd out(modal_rows.rows(), steps + 1);
  for (Index k = 0; k <= steps; ++k) {
    out.col(k) = modal_rows * prop.q();
    if (k < steps) prop.step(u ? u->values(0, k) : 0.0);
  }
  return out;
}

/// Composite trapezoid rule for int_0^T f^2 dt on grid samples.
inline double time_integral_of_square(const VectorXd& f, double dt) {
  if (f.size() < 2) return 0.0;
  const double inner = f.segment(1, f.size() - 2).squaredNorm();
  return dt * (inner + 0.5 * (f(0) * f(0) + f(f.size() - 1) * f(f.size() - 1)));
}

struct DerivativeCheck {
  double max_residual = 0.0;
  double peak = 0.0;  // max |right-hand side| and trace term over the check times
  double relative() const { return peak > 0.0 ? max_residual / peak : 0.0; }
};

namespace detail {

template <class Rhs, class Peak>
DerivativeCheck derivative_check(const BeamModel& m, const Trajectory& tr, const VectorXd& series, Rhs rhs, Peak peak) {
  DerivativeCheck out;
  const double dt = tr.trace.grid.dt();
  for (Index k = 1; k + 1 < series.size(); ++k) {
    const BeamState s{tr.W.col(k), tr.V.col(k), tr.trace.grid.time(k)};
    const double r = rhs(m, s);
    const double fd = (series(k + 1) - series(k - 1)) / (2.0 * dt);
    out.max_residual = std::max(out.max_residual, std::abs(fd - r));
    out.peak = std::max({out.peak, std::abs(r), peak(m, s)});
  }
  return out;
}

}  // namespace detail

/// Centered time difference of rho against its identity at interior grid times.
inline DerivativeCheck rho_derivative_check(const BeamModel& m, const Trajectory& tr) {
  return detail::derivative_check(m, tr, tr.trace.rho, rho_identity_rhs, [](const BeamModel& mm, const BeamState& s) {
    const double sx = slope_tip(mm, s.w);
    return sx * sx;
  });
}

inline DerivativeCheck rho1_derivative_check(const BeamModel& m, const Trajectory& tr) {
  return detail::derivative_check(m, tr, tr.trace.rho1, rho1_identity_rhs, [](const BeamModel& mm, const BeamState& s) {
    const double k0 = curvature_root(mm, s.w);
    return 0.5 * k0 * k0;
  });
}

namespace detail {

inline double sech(double t) {
  const double e = std::exp(-t);
  return 2.0 * e / (1.0 + e * e);
}

}  // namespace detail

/// Shear-to-slope transfer w_x(1)/w_xxx(1) with t = sqrt(s/2):
/// H = (2 sh ch sin cos - (ch sin + sh cos)^2) / (2 t^2 (ch^2 + cos^2)).
/// Beyond t = 20 numerator and denominator are divided by ch^2.
inline double beam_transfer_H(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("beam_transfer_H: s must be positive and finite");
  const double t = std::sqrt(0.5 * s);
  const double sn = std::sin(t), cs = std::cos(t);
  if (t <= 20.0) {
    const double ch = std::cosh(t), sh = std::sinh(t);
    const double mix = ch * sn + sh * cs;
    return (2.0 * sh * ch * sn * cs - mix * mix) / (2.0 * t * t * (ch * ch + cs * cs));
  }
  const double th = std::tanh(t), se = detail::sech(t);
  const double mix = sn + th * cs;
  return (2.0 * th * sn * cs - mix * mix) / (2.0 * t * t * (1.0 + cs * cs * se * se));
}

/// Shear-to-root-curvature transfer w_xx(0)/w_xxx(1):
/// H1 = -(ch sin + sh cos) / (t (ch^2 + cos^2)).
inline double beam_transfer_H1(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("beam_transfer_H1: s must be positive and finite");
  const double t = std::sqrt(0.5 * s);
  const double sn = std::sin(t), cs = std::cos(t);
  if (t <= 20.0) {
    const double ch = std::cosh(t), sh = std::sinh(t);
    return -(ch * sn + sh * cs) / (t * (ch * ch + cs * cs));
  }
  const double th = std::tanh(t), se = detail::sech(t);
  return -(sn + th * cs) * se / (t * (1.0 + cs * cs * se * se));
}

/// t cosh(t) |H1(s)| without overflow.
inline double scaled_H1(double s) {
  const double t = std::sqrt(0.5 * s);
  if (t <= 20.0) return t * std::cosh(t) * std::abs(beam_transfer_H1(s));
  const double th = std::tanh(t), se = detail::sech(t), cs = std::cos(t);
  return std::abs(std::sin(t) + th * cs) / (1.0 + cs * cs * se * se);
}

/// Smooth random state: lowest `modes` discrete modes with N(0,1)
/// coefficients, displacement amplitudes scaled by 1/omega.
inline BeamState random_smooth_state(const BeamModel& m, Rng& rng, int modes = 8) {
  BeamState s{VectorXd::Zero(m.dofs()), VectorXd::Zero(m.dofs()), 0.0};
  for (int i = 0; i < std::min<Index>(modes, m.dofs()); ++i) {
    const double a = rnd::normal(rng), b = rnd::normal(rng);
    s.w += a / m.frequencies()(i) * m.mode_shapes().col(i);
    s.v += b * m.mode_shapes().col(i);
  }
  return s;
}

/// Sum of four sinusoids with frequencies in [0.2, 3] Hz, held per step.
inline Signal<double> random_smooth_input(const TimeGrid& g, Rng& rng) {
  double amp[4], f[4], ph[4];
  for (int i = 0; i < 4; ++i) {
    amp[i] = rnd::normal(rng);
    f[i] = rnd::uniform(rng, 0.2, 3.0);
    ph[i] = rnd::uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }
  MatrixXd v(1, g.n_steps() + 1);
  for (Index k = 0; k <= g.n_steps(); ++k) {
    double x = 0.0;
    for (int i = 0; i < 4; ++i) x += amp[i] * std::sin(2.0 * std::numbers::pi * f[i] * g.time(k) + ph[i]);
    v(0, k) = x;
  }
  return Signal<double>(g, std::move(v));
}

struct BoundReport {
  const char* bound = "";
  double constant = 0.0;     // multiplier of F(0) or of int u^2
  double worst_ratio = 0.0;  // measured / bound (max for upper bounds, min for the lower bound)
  std::vector<double> ratios;
  int trials = 0;
  int N = 0;
  double T = 0.0;
  double slack = 0.05;
  double dt = 0.0;
  bool passed = false;
};

namespace detail {

/// Time step resolving the squared traces of the active modes.
inline double resolving_dt(const BeamModel& m, int modes, double t_end) {
  const double omega = m.frequencies()(std::min<Index>(modes, m.dofs()) - 1);
  const double dt = std::min(1e-3, 0.02 / omega);
  return t_end / std::ceil(t_end / dt);
}

inline void require_mode(const BeamModel& m, BoundaryMode mode, const char* what) {
  if (m.mode() != mode) throw InvalidInput(std::string(what) + ": wrong boundary mode for this check");
}

}  // namespace detail

/// int_0^T w_x(1,t)^2 dt <= (3T+2) F(0) for random smooth initial states.
inline BoundReport verify_admissibility_bound(const BeamModel& m, double T, int trials, Rng& rng,
                                              double slack = 0.05, int modes = 8) {
  detail::require_mode(m, BoundaryMode::homogeneous, "verify_admissibility_bound");
  if (!(T > 0.0)) throw InvalidInput("verify_admissibility_bound: T must be positive");
  BoundReport rep{"(3T+2)F(0)", 3.0 * T + 2.0, 0.0, {}, trials, m.n_interior(), T, slack};
  const double dt = detail::resolving_dt(m, modes, T);
  const TimeGrid g(T, static_cast<Index>(std::llround(T / dt)));
  rep.dt = g.dt();
  for (int i = 0; i < trials; ++i) {
    const BeamState s = random_smooth_state(m, rng, modes);
    const double lhs = time_integral_of_square(trace_series(m, g, s, {Trace::slope_tip}).row(0).transpose(), g.dt());
    const double f0 = energy(m, s);
    const double ratio = f0 > 0.0 ? lhs / (rep.constant * f0) : 0.0;
    rep.ratios.push_back(ratio);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
  }
  rep.passed = rep.worst_ratio <= 1.0 + slack;
  return rep;
}

/// int_0^T w_xx(0,t)^2 dt >= (T-2) F(0); the bound is vacuous for T <= 2.
inline BoundReport verify_observability(const BeamModel& m, double T, int trials, Rng& rng,
                                        double slack = 0.05, int modes = 8) {
  detail::require_mode(m, BoundaryMode::homogeneous, "verify_observability");
  if (!(T > 2.0)) throw InvalidInput("verify_observability: T must exceed 2 (the lower bound (T-2)F(0) is vacuous)");
  BoundReport rep{"(T-2)F(0)", T - 2.0, std::numeric_limits<double>::infinity(), {}, trials, m.n_interior(), T, slack};
  const double dt = detail::resolving_dt(m, modes, T);
  const TimeGrid g(T, static_cast<Index>(std::llround(T / dt)));
  rep.dt = g.dt();
  for (int i = 0; i < trials; ++i) {
    const BeamState s = random_smooth_state(m, rng, modes);
    const double lhs =
        time_integral_of_square(trace_series(m, g, s, {Trace::curvature_root}).row(0).transpose(), g.dt());
    const double ratio = lhs / (rep.constant * energy(m, s));
    rep.ratios.push_back(ratio);
    rep.worst_ratio = std::min(rep.worst_ratio, ratio);
  }
  if (trials == 0) rep.worst_ratio = 1.0;
  rep.passed = rep.worst_ratio >= 1.0 - slack;
  return rep;
}

/// C_{delta,T} = (1 + delta + 4T) / (2 (1 - (1 + 4T) delta)) + 1 / (2 delta).
inline double wellposedness_constant(double delta, double T) {
  if (!(T > 0.0)) throw InvalidInput("wellposedness_constant: T must be positive");
  if (!(delta > 0.0 && delta < 1.0 / (1.0 + 4.0 * T)))
    throw InvalidInput("wellposedness_constant: delta must lie in (0, 1/(1+4T))");
  return (1.0 + delta + 4.0 * T) / (2.0 * (1.0 - (1.0 + 4.0 * T) * delta)) + 1.0 / (2.0 * delta);
}

/// Zero initial state, random shear inputs:
/// int_0^T w_x(1,t)^2 dt <= (1+3T) C_{delta,T} int_0^T u^2 dt.
inline BoundReport verify_wellposedness_bound(const BeamModel& m, double T, double delta, int trials,
                                              Rng& rng, double slack = 0.05, double dt = 1e-4) {
  detail::require_mode(m, BoundaryMode::shear_input, "verify_wellposedness_bound");
  const double c = wellposedness_constant(delta, T);
  BoundReport rep{"(1+3T)C_{delta,T}", (1.0 + 3.0 * T) * c, 0.0, {}, trials, m.n_interior(), T, slack};
  const TimeGrid g(T, static_cast<Index>(std::llround(T / dt)));
  rep.dt = g.dt();
  const BeamState zero{VectorXd::Zero(m.dofs()), VectorXd::Zero(m.dofs()), 0.0};
  for (int i = 0; i < trials; ++i) {
    const Signal<double> u = random_smooth_input(g, rng);
    const double lhs = time_integral_of_square(trace_series(m, g, zero, {Trace::slope_tip}, &u).row(0).transpose(), g.dt());
    const double u2 = u.l2_norm() * u.l2_norm();
    const double ratio = u2 > 0.0 ? lhs / (rep.constant * u2) : 0.0;
    rep.ratios.push_back(ratio);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
  }
  rep.passed = rep.worst_ratio <= 1.0 + slack;
  return rep;
}

struct OrderStudy {
  std::vector<int> levels;
  std::vector<double> rho_residuals;   // relative to the peak term
  std::vector<double> rho1_residuals;
  std::vector<double> rho_orders;      // log2 of successive ratios
  std::vector<double> rho1_orders;
  bool decreasing = false;
};

/// Multiplier identities along the first eigenmode over one period under
/// simultaneous refinement of N.
inline OrderStudy multiplier_order_study(const std::vector<int>& levels = {25, 50, 100}, Index steps = 2000) {
  OrderStudy out;
  out.levels = levels;
  for (int n : levels) {
    const BeamModel m(n);
    const double omega = m.frequencies()(0);
    const BeamState s{m.mode_shapes().col(0) / omega, VectorXd::Zero(m.dofs()), 0.0};
    const TimeGrid g(2.0 * std::numbers::pi / omega, steps);
    const Trajectory tr = simulate(m, g, s);
    out.rho_residuals.push_back(rho_derivative_check(m, tr).relative());
    out.rho1_residuals.push_back(rho1_derivative_check(m, tr).relative());
  }
  out.decreasing = true;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    out.rho_orders.push_back(std::log2(out.rho_residuals[i - 1] / out.rho_residuals[i]));
    out.rho1_orders.push_back(std::log2(out.rho1_residuals[i - 1] / out.rho1_residuals[i]));
    out.decreasing = out.decreasing && out.rho_residuals[i] < out.rho_residuals[i - 1] &&
                     out.rho1_residuals[i] < out.rho1_residuals[i - 1];
  }
  return out;
}

struct ObservabilityRow {
  double gain = 0.0;
  double constant = 0.0;  // min over the smooth subspace of int_0^T w_xx(0,t)^2 dt / F(0)
  bool above = false;     // constant >= alpha0
};

struct ObservabilitySweep {
  int N = 0;
  double T = 0.0;
  int modes = 0;
  double open_loop = 0.0;  // constant at gain 0
  double alpha0 = 0.0;
  std::vector<ObservabilityRow> rows;
  double k_star = std::numeric_limits<double>::infinity();  // first gain with constant < alpha0
};

/// int_0^T e^{A't} c'c e^{At} dt. Van Loan's block exponential on a short
/// interval, then W(2t) = W(t) + e^{A't} W(t) e^{At}.
inline MatrixXd observability_gramian(const MatrixXd& a, const Eigen::RowVectorXd& c, double T) {
  const Index n = a.rows();
  const double scale = a.cwiseAbs().colwise().sum().maxCoeff() * T;
  const int doublings = scale > 0.5 ? static_cast<int>(std::ceil(std::log2(scale / 0.5))) : 0;
  const double tau = T / std::ldexp(1.0, doublings);
  MatrixXd big = MatrixXd::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = -a.transpose();
  big.topRightCorner(n, n) = c.transpose() * c;
  big.bottomRightCorner(n, n) = a;
  const MatrixXd e = linalg::expm(MatrixXd(big * tau));
  MatrixXd step = e.bottomRightCorner(n, n);
  MatrixXd w = step.transpose() * e.topRightCorner(n, n);
  for (int i = 0; i < doublings; ++i) {
    w += step.transpose() * w * step;
    step = step * step;
  }
  return 0.5 * (w + w.transpose());
}

/// Root-curvature observability constant of the tip-damped beam against the
/// energy F(0), over initial states spanned by the first `modes` eigenmodes.
/// Works in energy coordinates (Omega q, p) of the conservative modes, where
/// 2F is the Euclidean norm. alpha0 defaults to half the open-loop constant.
inline ObservabilitySweep feedback_observability_sweep(int n_interior, double T, const std::vector<double>& gains,
                                                       int modes = 8, double alpha0 = 0.0) {
  if (!(T > 0.0)) throw InvalidInput("feedback_observability_sweep: T must be positive");
  if (modes < 1) throw InvalidInput("feedback_observability_sweep: modes must be >= 1");
  const BeamModel base(n_interior);
  const Index d = base.dofs();
  const Index k = std::min<Index>(modes, d);
  const VectorXd& omega = base.frequencies();
  const VectorXd tip = base.mode_shapes().row(d - 1).transpose();
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(2 * d);
  c.head(d) = (base.displacement_trace(Trace::curvature_root) * base.mode_shapes()).cwiseQuotient(omega.transpose());

  std::vector<Index> smooth;
  for (Index i = 0; i < k; ++i) smooth.push_back(i), smooth.push_back(d + i);

  auto constant = [&](double gain) {
    MatrixXd a = MatrixXd::Zero(2 * d, 2 * d);
    a.topRightCorner(d, d) = omega.asDiagonal();
    a.bottomLeftCorner(d, d) = -MatrixXd(omega.asDiagonal());
    a.bottomRightCorner(d, d) = -gain * tip * tip.transpose();
    const MatrixXd w = observability_gramian(a, c, T)(smooth, smooth);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(w);
    if (es.info() != Eigen::Success) throw InvalidInput("feedback_observability_sweep: eigen-solve failed");
    return 2.0 * std::max(0.0, es.eigenvalues()(0));
  };

  ObservabilitySweep out{n_interior, T, static_cast<int>(k), constant(0.0), alpha0, {}};
  if (!(out.alpha0 > 0.0)) out.alpha0 = 0.5 * out.open_loop;
  for (double g : gains) {
    ObservabilityRow row{g, constant(g), false};
    row.above = row.constant >= out.alpha0;
    if (!row.above && !(g >= out.k_star)) out.k_star = g;
    out.rows.push_back(row);
  }
  return out;
}

struct TransferRow {
  double s = 0.0;
  double H = 0.0;
  double bound = 0.0;  // 5 / s
  double discrete = 0.0;
  double relative_error = 0.0;
};

/// Continuum H(s) against the discrete shear-to-slope transfer.
inline std::vector<TransferRow> transfer_table(const BeamModel& m, const std::vector<double>& s_values) {
  Realization<double> r = m.realization();
  const Realization<double> slope(r.A, r.B, MatrixXd(r.C.topRows(1)), MatrixXd::Zero(1, 1));
  std::vector<TransferRow> rows;
  for (double s : s_values) {
    TransferRow row;
    row.s = s;
    row.H = beam_transfer_H(s);
    row.bound = 5.0 / s;
    row.discrete = transfer(slope, s)(0, 0).real();
    row.relative_error = std::abs(row.discrete - row.H) / std::abs(row.H);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wellposed::beam
