#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "wellposed/feedback.hpp"
#include "wellposed/linalg.hpp"
#include "wellposed/system_node.hpp"
#include "wellposed/types.hpp"

namespace wellposed {

/// Phi(t0) as a matrix from discrete L2 (orthonormal cell indicators
/// 1/sqrt(dt) on [t_j, t_{j+1})) to the state space: block column j is
/// Ad^{N-1-j} Bd / sqrt(dt).
template <SystemScalar Scalar>
struct ControlOperatorMatrix {
  Mat<Scalar> matrix;
  double t0 = 0.0;
  TimeGrid grid{1.0, 1};
};

/// Psi(t0) as a matrix from the state space to discrete L2: block row k is
/// the sqrt(dt)-weighted cell average of C e^{At} x over [t_k, t_{k+1}).
template <SystemScalar Scalar>
struct ObservationOperatorMatrix {
  Mat<Scalar> matrix;
  double t0 = 0.0;
  TimeGrid grid{1.0, 1};
};

struct GramianReport {
  MatrixXc gramian;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool verdict = false;  // exactly controllable / observable at t0
  double radius = 0.0;   // s0 (control) or k (observation)
};

inline constexpr double kExactnessTolerance = 1e-8;

template <SystemScalar Scalar>
ControlOperatorMatrix<Scalar> control_operator(const Realization<Scalar>& r, const TimeGrid& g, double t0) {
  r.validate();
  const TimeGrid sub = g.prefix(g.steps_to(t0));
  const auto node = discretize_zoh(r, sub.dt());
  const Index steps = sub.n_steps(), m = r.inputs();
  Mat<Scalar> out(r.states(), steps * m);
  Mat<Scalar> col = node.Bd / Scalar(std::sqrt(sub.dt()));
  for (Index j = steps - 1; j >= 0; --j) {
    out.middleCols(j * m, m) = col;
    col = node.Ad * col;
  }
  return {std::move(out), sub.t_end(), sub};
}

template <SystemScalar Scalar>
ObservationOperatorMatrix<Scalar> observation_operator(const Realization<Scalar>& r, const TimeGrid& g, double t0) {
  r.validate();
  const TimeGrid sub = g.prefix(g.steps_to(t0));
  const Index n = r.states(), p = r.outputs(), steps = sub.n_steps();
  auto [ad, integral] = linalg::exp_and_integral<Scalar>(r.A, linalg::identity<Scalar>(n), sub.dt());
  Mat<Scalar> out(steps * p, n);
  Mat<Scalar> row = r.C * integral / Scalar(std::sqrt(sub.dt()));
  for (Index k = 0; k < steps; ++k) {
    out.middleRows(k * p, p) = row;
    row = row * ad;
  }
  return {std::move(out), sub.t_end(), sub};
}

/// Smallest singular value of M as a map onto its row space; zero when M
/// has more rows than columns (it cannot be onto).
template <class Derived>
double surjectivity_radius(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  if (m.rows() > m.cols()) return 0.0;
  return linalg::sigma_min(m);
}

template <SystemScalar Scalar>
GramianReport gramian_report(const ControlOperatorMatrix<Scalar>& op) {
  GramianReport rep;
  rep.gramian = (op.matrix * op.matrix.adjoint()).template cast<Complex>();
  const VectorXd s = linalg::singular_values(op.matrix);
  rep.sigma_max = s.size() ? s(0) : 0.0;
  rep.sigma_min = surjectivity_radius(op.matrix);
  rep.radius = rep.sigma_min;
  rep.verdict = rep.sigma_min > kExactnessTolerance * rep.sigma_max;
  return rep;
}

template <SystemScalar Scalar>
GramianReport gramian_report(const ObservationOperatorMatrix<Scalar>& op) {
  GramianReport rep;
  rep.gramian = (op.matrix.adjoint() * op.matrix).template cast<Complex>();
  const VectorXd s = linalg::singular_values(op.matrix);
  rep.sigma_max = s.size() ? s(0) : 0.0;
  // Injectivity needs at least as many rows as columns.
  rep.sigma_min = op.matrix.rows() >= op.matrix.cols() ? linalg::sigma_min(op.matrix) : 0.0;
  rep.radius = rep.sigma_min;
  rep.verdict = rep.sigma_min > kExactnessTolerance * rep.sigma_max;
  return rep;
}

template <SystemScalar Scalar>
GramianReport controllability_report(const Realization<Scalar>& r, const TimeGrid& g, double t0) {
  return gramian_report(control_operator(r, g, t0));
}

template <SystemScalar Scalar>
GramianReport observability_report(const Realization<Scalar>& r, const TimeGrid& g, double t0) {
  return gramian_report(observation_operator(r, g, t0));
}

/// Largest k with ||Psi(t0) x|| >= k ||x||.
template <SystemScalar Scalar>
double observability_constant(const Realization<Scalar>& r, const TimeGrid& g, double t0) {
  return observability_report(r, g, t0).sigma_min;
}

/// Least-L2-norm piecewise-constant u on [0, t0] with Phi(t0) u = x_target.
template <SystemScalar Scalar>
Signal<Scalar> min_norm_control(const Realization<Scalar>& r, const TimeGrid& g, double t0,
                                const Vec<Scalar>& x_target) {
  if (x_target.size() != r.states()) throw InvalidInput("min_norm_control: target dimension does not match A");
  const auto op = control_operator(r, g, t0);
  const auto rep = gramian_report(op);
  if (!rep.verdict) throw NotControllableError("min_norm_control: Gramian is singular at t0");
  const Mat<Scalar> w = op.matrix * op.matrix.adjoint();
  const Vec<Scalar> coeff = op.matrix.adjoint() * w.ldlt().solve(x_target);

  const Index m = r.inputs(), steps = op.grid.n_steps();
  Mat<Scalar> values(m, steps + 1);
  const Scalar scale = Scalar(1.0 / std::sqrt(op.grid.dt()));
  for (Index k = 0; k < steps; ++k) values.col(k) = coeff.segment(k * m, m) * scale;
  values.col(steps) = values.col(steps - 1);
  return Signal<Scalar>(op.grid, std::move(values));
}

/// L2 operator norms of the grid maps on [0, t0].
struct OperatorNorms {
  double D = 0.0, F = 0.0, Phi = 0.0, Psi = 0.0;
};

template <SystemScalar Scalar>
OperatorNorms operator_norms(const Realization<Scalar>& r, const TimeGrid& g, double t0) {
  const TimeGrid sub = g.prefix(g.steps_to(t0));
  OperatorNorms out;
  out.D = linalg::norm2(r.D);
  out.F = linalg::norm2(assemble_quadruple(r, sub).io_map);
  out.Phi = linalg::norm2(control_operator(r, sub, t0).matrix);
  out.Psi = linalg::norm2(observation_operator(r, sub, t0).matrix);
  return out;
}

enum class SweepMode { across, cross };

struct SweepRow {
  double k = 0.0;
  double sigma_min = 0.0;  // perturbed control sigma_min, or observability constant
  double bound = 0.0;      // guaranteed lower bound from the proof; -inf once k ||F|| >= 1
  bool within_bound = false;  // k below k0 (resp. theta0)
  bool ok = false;            // sigma_min > 0 (across) or >= alpha0 (cross)
};

struct SweepReport {
  SweepMode mode = SweepMode::across;
  double bound_gain = 0.0;  // k0 or theta0
  double base_constant = 0.0;  // s0 or k_obs
  double alpha0 = 0.0;
  K0Inputs k0_inputs;
  Theta0Inputs theta0_inputs;
  std::vector<SweepRow> rows;          // acceptance grid in (0, bound_gain)
  std::vector<SweepRow> probe_rows;    // exploratory grid in (0, 2 bound_gain]
  std::optional<double> k_star;        // first probe gain that breaks down; none = no breakdown seen
  std::optional<double> margin;        // k_star / bound_gain
  int failures = 0;                    // rows with k < bound_gain that are not ok
};

/// `count` log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int j = 0; j < count; ++j)
    out.push_back(count == 1 ? hi : lo * std::pow(hi / lo, static_cast<double>(j) / (count - 1)));
  return out;
}

namespace detail {

template <SystemScalar Scalar>
CoupledNode<Scalar> across_node(const Realization<Scalar>& main, const Realization<Scalar>& pert) {
  require_same(main.A, pert.A, "A");
  require_same(main.C, pert.C, "C");
  CoupledNode<Scalar> node{main.A, main.B, pert.B, main.C, Mat<Scalar>::Zero(0, main.states()), main.D,
                           pert.D, Mat<Scalar>::Zero(0, main.inputs()), Mat<Scalar>::Zero(0, pert.inputs())};
  node.validate();
  return node;
}

template <SystemScalar Scalar>
CoupledNode<Scalar> cross_node(const Realization<Scalar>& main, const Realization<Scalar>& pert) {
  require_same(main.A, pert.A, "A");
  require_same(main.B, pert.B, "B");
  CoupledNode<Scalar> node{main.A, main.B, Mat<Scalar>::Zero(main.states(), 0), main.C, pert.C, main.D,
                           Mat<Scalar>::Zero(main.outputs(), 0), pert.D, Mat<Scalar>::Zero(pert.outputs(), 0)};
  node.validate();
  return node;
}

}  // namespace detail

/// Across: the scaled loop u = k y applied to (A, B, C, D) with control dB
/// entering through P. Returns sigma_min of the perturbed control operator.
/// Cross: u = k y + w observed through (dC, P); returns the observability
/// constant. A singular I - kD counts as breakdown (0).
template <SystemScalar Scalar>
double perturbed_constant(const CoupledNode<Scalar>& node, SweepMode mode, const TimeGrid& g, double t0, double k) {
  Realization<Scalar> cl;
  try {
    cl = node.closed(k);
  } catch (const FeedbackLoopError&) {
    return 0.0;
  }
  const Index m = node.m(), p = node.p();
  if (mode == SweepMode::across) {
    const auto rep = gramian_report(control_operator(detail::channel(cl, m, p, 1, 0), g, t0));
    return rep.verdict ? rep.sigma_min : 0.0;
  }
  return observability_constant(detail::channel(cl, m, p, 0, 1), g, t0);
}

/// Builds k0 (across) or theta0 (cross) from grid norms and sweeps the gain.
/// For cross, alpha0 <= 0 selects alpha0 = k_obs / 2.
template <SystemScalar Scalar>
SweepReport robustness_sweep(const Realization<Scalar>& main, const Realization<Scalar>& pert, const TimeGrid& g,
                             double t0, SweepMode mode, std::vector<double> k_grid = {}, double alpha0 = 0.0) {
  main.validate();
  pert.validate();
  SweepReport rep;
  rep.mode = mode;
  const auto nm = operator_norms(main, g, t0);
  const TimeGrid sub = g.prefix(g.steps_to(t0));
  const double fp = linalg::norm2(assemble_quadruple(pert, sub).io_map);

  const CoupledNode<Scalar> node = mode == SweepMode::across ? detail::across_node(main, pert) : detail::cross_node(main, pert);
  double slope_num = 0.0;  // bound(k) = base - k * slope_num / (1 - k ||F||)
  if (mode == SweepMode::across) {
    const auto base = controllability_report(pert, g, t0);
    if (!base.verdict) throw NotControllableError("robustness_sweep: (A, dB) is not exactly controllable at t0");
    rep.base_constant = base.sigma_min;
    rep.k0_inputs = {nm.D, nm.F, nm.Phi, fp, base.sigma_min};
    rep.bound_gain = k0_bound(rep.k0_inputs);
    slope_num = nm.Phi * fp;
  } else {
    const auto base = observability_report(pert, g, t0);
    if (!base.verdict) throw NotObservableError("robustness_sweep: (A, dC) is not exactly observable at t0");
    rep.base_constant = base.sigma_min;
    rep.alpha0 = alpha0 > 0.0 ? alpha0 : 0.5 * base.sigma_min;
    rep.theta0_inputs = {nm.D, nm.F, fp, nm.Psi, base.sigma_min, rep.alpha0};
    rep.bound_gain = theta0_bound(rep.theta0_inputs);
    slope_num = fp * nm.Psi;
  }

  const bool finite_bound = std::isfinite(rep.bound_gain);
  if (k_grid.empty())
    k_grid = finite_bound ? log_grid(1e-3 * rep.bound_gain, 0.999 * rep.bound_gain, 32) : log_grid(1e-3, 1e3, 32);
  const std::vector<double> probe =
      finite_bound ? log_grid(2e-3 * rep.bound_gain, 2.0 * rep.bound_gain, 32) : std::vector<double>{};

  auto evaluate = [&](double k) {
    SweepRow row;
    row.k = k;
    row.sigma_min = perturbed_constant(node, mode, g, t0, k);
    const double denom = 1.0 - k * nm.F;
    row.bound = denom > 0.0 ? rep.base_constant - k * slope_num / denom : -std::numeric_limits<double>::infinity();
    row.within_bound = k < rep.bound_gain;
    row.ok = mode == SweepMode::across ? row.sigma_min > 0.0 : row.sigma_min >= rep.alpha0;
    return row;
  };
  for (double k : k_grid) {
    rep.rows.push_back(evaluate(k));
    if (rep.rows.back().within_bound && !rep.rows.back().ok) ++rep.failures;
  }
  for (double k : probe) {
    rep.probe_rows.push_back(evaluate(k));
    if (!rep.k_star && !rep.probe_rows.back().ok) rep.k_star = k;
  }
  if (rep.k_star && finite_bound) rep.margin = *rep.k_star / rep.bound_gain;
  return rep;
}

}  // namespace wellposed
