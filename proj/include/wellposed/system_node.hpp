#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "wellposed/linalg.hpp"
#include "wellposed/types.hpp"

namespace wellposed {

/// Zero-order-hold sampled node on a step dt:
///   x_{k+1} = Ad x_k + Bd u_k,   y_k = C x_k + D u_k.
template <SystemScalar Scalar>
struct DiscreteNode {
  Mat<Scalar> Ad;
  Mat<Scalar> Bd;
  Mat<Scalar> C;
  Mat<Scalar> D;
  double dt = 0.0;

  Index states() const { return Ad.rows(); }
  Index inputs() const { return Bd.cols(); }
  Index outputs() const { return C.rows(); }
};

/// e^{A dt}.
template <SystemScalar Scalar>
Mat<Scalar> semigroup_step(const Realization<Scalar>& r, double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw InvalidInput("semigroup_step: dt must be >= 0");
  if (!r.A.allFinite()) throw InvalidInput("semigroup_step: non-finite entries in A");
  return linalg::expm(Mat<Scalar>(r.A * Scalar(dt)));
}

/// Exact discretization for piecewise-constant inputs. Bd = int_0^dt e^{As} ds B
/// comes out of one augmented-matrix exponential.
template <SystemScalar Scalar>
DiscreteNode<Scalar> discretize_zoh(const Realization<Scalar>& r, double dt) {
  r.validate();
  if (!(dt > 0.0)) throw InvalidInput("discretize_zoh: dt must be positive");
  auto [ad, bd] = linalg::exp_and_integral<Scalar>(r.A, r.B, dt);
  return DiscreteNode<Scalar>{std::move(ad), std::move(bd), r.C, r.D, dt};
}

namespace detail {

template <SystemScalar Scalar>
void require_input(const Realization<Scalar>& r, const TimeGrid& g, const Signal<Scalar>& u) {
  if (u.dim() != r.inputs()) throw InvalidInput("input signal dimension does not match B");
  if (!(u.grid == g)) throw InvalidInput("input signal is not defined on the given grid");
}

template <SystemScalar Scalar>
Mat<Scalar> propagate(const DiscreteNode<Scalar>& node, const Vec<Scalar>& x0, const Mat<Scalar>& u,
                      Index steps) {
  Mat<Scalar> x(node.states(), steps + 1);
  x.col(0) = x0;
  for (Index k = 0; k < steps; ++k) x.col(k + 1) = node.Ad * x.col(k) + node.Bd * u.col(k);
  return x;
}

}  // namespace detail

/// State trajectory x(t_k) = Phi(t_k) u from x(0) = 0.
template <SystemScalar Scalar>
Signal<Scalar> input_map(const Realization<Scalar>& r, const TimeGrid& g, const Signal<Scalar>& u) {
  detail::require_input(r, g, u);
  const auto node = discretize_zoh(r, g.dt());
  return Signal<Scalar>(g, detail::propagate(node, Vec<Scalar>(Vec<Scalar>::Zero(r.states())), u.values, g.n_steps()));
}

/// y(t_k) = C e^{A t_k} x0.
template <SystemScalar Scalar>
Signal<Scalar> output_map(const Realization<Scalar>& r, const TimeGrid& g, const Vec<Scalar>& x0) {
  r.validate();
  if (x0.size() != r.states()) throw InvalidInput("output_map: x0 dimension does not match A");
  const Mat<Scalar> step = semigroup_step(r, g.dt());
  Mat<Scalar> y(r.outputs(), g.n_steps() + 1);
  Vec<Scalar> x = x0;
  for (Index k = 0; k <= g.n_steps(); ++k) {
    y.col(k) = r.C * x;
    x = step * x;
  }
  return Signal<Scalar>(g, std::move(y));
}

/// y(t_k) = C Phi(t_k) u + D u(t_k) from zero initial state.
template <SystemScalar Scalar>
Signal<Scalar> io_map(const Realization<Scalar>& r, const TimeGrid& g, const Signal<Scalar>& u) {
  detail::require_input(r, g, u);
  const auto node = discretize_zoh(r, g.dt());
  const Mat<Scalar> x = detail::propagate(node, Vec<Scalar>(Vec<Scalar>::Zero(r.states())), u.values, g.n_steps());
  return Signal<Scalar>(g, r.C * x + r.D * u.values);
}

/// Grid matrices of the four maps on [0, t_end].
///
/// Inputs are stacked sample-major: u = [u_0; u_1; ...; u_{N-1}] with u_j held
/// on [t_j, t_{j+1}); outputs likewise y = [y_0; ...; y_{N-1}].
///  - input_map  (n x N m):   Phi(t_end) u = x_N
///  - output_map (N p x n):   block row k is C e^{A t_k}
///  - io_map     (N p x N m): block (k, j) = D if k == j, C Ad^{k-1-j} Bd if k > j
/// These are unweighted coefficient maps. Multiply by sqrt(dt) on the signal
/// side for L2-normalized operators.
template <SystemScalar Scalar>
struct QuadrupleMaps {
  TimeGrid grid;
  Index n = 0, m = 0, p = 0;
  std::vector<Mat<Scalar>> semigroup_samples;
  Mat<Scalar> input_map;
  Mat<Scalar> output_map;
  Mat<Scalar> io_map;

  auto io_block(Index row, Index col) const { return io_map.block(row * p, col * m, p, m); }
};

template <SystemScalar Scalar>
QuadrupleMaps<Scalar> assemble_quadruple(const DiscreteNode<Scalar>& node, const TimeGrid& g) {
  const Index steps = g.n_steps();
  const Index n = node.states(), m = node.inputs(), p = node.outputs();
  QuadrupleMaps<Scalar> q{g, n, m, p, {}, Mat<Scalar>(n, steps * m), Mat<Scalar>(steps * p, n),
                          Mat<Scalar>::Zero(steps * p, steps * m)};
  q.semigroup_samples.reserve(steps + 1);
  q.semigroup_samples.push_back(Mat<Scalar>::Identity(n, n));
  for (Index k = 1; k <= steps; ++k) q.semigroup_samples.push_back(node.Ad * q.semigroup_samples.back());

  // Markov parameters: h_0 = D, h_i = C Ad^{i-1} Bd.
  std::vector<Mat<Scalar>> markov(steps);
  if (steps > 0) markov[0] = node.D;
  for (Index i = 1; i < steps; ++i) markov[i] = node.C * q.semigroup_samples[i - 1] * node.Bd;

  for (Index j = 0; j < steps; ++j) q.input_map.middleCols(j * m, m) = q.semigroup_samples[steps - 1 - j] * node.Bd;
  for (Index k = 0; k < steps; ++k) q.output_map.middleRows(k * p, p) = node.C * q.semigroup_samples[k];
  for (Index k = 0; k < steps; ++k)
    for (Index j = 0; j <= k; ++j) q.io_map.block(k * p, j * m, p, m) = markov[k - j];
  return q;
}

template <SystemScalar Scalar>
QuadrupleMaps<Scalar> assemble_quadruple(const Realization<Scalar>& r, const TimeGrid& g) {
  return assemble_quadruple(discretize_zoh(r, g.dt()), g);
}

/// Stacks the first `steps` input samples column-major into [u_0; u_1; ...].
template <SystemScalar Scalar>
Vec<Scalar> stack_samples(const Mat<Scalar>& values, Index first, Index steps) {
  Vec<Scalar> out(values.rows() * steps);
  for (Index k = 0; k < steps; ++k) out.segment(k * values.rows(), values.rows()) = values.col(first + k);
  return out;
}

/// G(lambda) = C (lambda I - A)^{-1} B + D.
template <SystemScalar Scalar>
MatrixXc transfer(const Realization<Scalar>& r, Complex lambda) {
  r.validate();
  return r.C.template cast<Complex>() * linalg::resolvent_solve(r.A, lambda, r.B) + r.D.template cast<Complex>();
}

namespace detail {

inline void require_sweep(std::span<const double> sweep, double abscissa) {
  if (sweep.empty()) throw InvalidInput("lambda sweep is empty");
  for (std::size_t j = 0; j < sweep.size(); ++j) {
    if (j > 0 && !(sweep[j] > sweep[j - 1])) throw InvalidInput("lambda sweep must be strictly increasing");
    if (!(sweep[j] > abscissa)) throw SpectrumError(sweep[j], "sweep point is not right of the spectral abscissa");
  }
}

/// Least-squares slope of -log(residual) against log(lambda), using the
/// strictly positive residuals only.
inline double decay_rate(std::span<const double> lambdas, std::span<const double> residuals) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (!(residuals[j] > 0.0)) continue;
    const double x = std::log(lambdas[j]);
    const double y = -std::log(residuals[j]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::infinity();
  const double denom = count * sxx - sx * sx;
  return denom == 0.0 ? std::numeric_limits<double>::infinity() : (count * sxy - sx * sy) / denom;
}

}  // namespace detail

struct RegularityEstimate {
  VectorXc estimate;           // G(lambda_max) u
  VectorXc feedthrough_action; // D u
  std::vector<double> lambdas;
  std::vector<double> residuals;  // ||G(lambda_j) u - D u||
  double rate = 0.0;              // observed decay order in lambda
};

/// Estimates D u as the limit of G(lambda) u along an increasing real sweep.
template <SystemScalar Scalar>
RegularityEstimate regularity_limit(const Realization<Scalar>& r, std::span<const double> sweep,
                                    const Vec<Scalar>& u) {
  r.validate();
  if (u.size() != r.inputs()) throw InvalidInput("regularity_limit: u dimension does not match B");
  detail::require_sweep(sweep, linalg::spectral_abscissa(r.A));
  RegularityEstimate out;
  out.feedthrough_action = r.D.template cast<Complex>() * u.template cast<Complex>();
  for (double lambda : sweep) {
    const VectorXc g = transfer(r, lambda) * u.template cast<Complex>();
    out.lambdas.push_back(lambda);
    out.residuals.push_back((g - out.feedthrough_action).norm());
    out.estimate = g;
  }
  out.rate = detail::decay_rate(out.lambdas, out.residuals);
  return out;
}

struct LambdaExtension {
  std::vector<double> lambdas;
  std::vector<double> residuals;  // ||C lambda R(lambda, A) x - C x||
  VectorXc final_value;
  double residual = 0.0;
};

/// Evaluates C lambda (lambda I - A)^{-1} x along the sweep.
template <SystemScalar Scalar>
LambdaExtension lambda_extension(const Realization<Scalar>& r, const Vec<Scalar>& x, std::span<const double> sweep) {
  r.validate();
  if (x.size() != r.states()) throw InvalidInput("lambda_extension: x dimension does not match A");
  detail::require_sweep(sweep, linalg::spectral_abscissa(r.A));
  const VectorXc cx = r.C.template cast<Complex>() * x.template cast<Complex>();
  LambdaExtension out;
  for (double lambda : sweep) {
    out.final_value = r.C.template cast<Complex>() * (lambda * linalg::resolvent_solve(r.A, lambda, x));
    out.lambdas.push_back(lambda);
    out.residuals.push_back((out.final_value - cx).norm());
  }
  out.residual = out.residuals.back();
  return out;
}

/// Geometric sweep lambda_0 * ratio^j, j = 0..count-1.
inline std::vector<double> geometric_sweep(double lambda0, double ratio, int count) {
  std::vector<double> out;
  out.reserve(count);
  double v = lambda0;
  for (int j = 0; j < count; ++j, v *= ratio) out.push_back(v);
  return out;
}

/// Relative deviations of the composition identities on [0, tau + t], with
/// tau and t given in steps of g:
///   semigroup: T(tau + t) = T(t) T(tau)
///   input:     Phi(tau + t)(u <>_tau v) = T(t) Phi(tau) u + Phi(t) v
///   output:    Psi(tau + t) x = Psi(tau) x <>_tau Psi(t) T(tau) x
///   io:        F(tau + t)(u <>_tau v) = F(tau) u <>_tau (Psi(t) Phi(tau) u + F(t) v)
/// The left sides come from the long-horizon grid matrices, the right sides
/// from the two short ones.
struct IdentityDeviations {
  double semigroup = 0.0;
  double input = 0.0;
  double output = 0.0;
  double io = 0.0;
  double max() const { return std::max({semigroup, input, output, io}); }
};

template <SystemScalar Scalar>
IdentityDeviations quadruple_identities(const Realization<Scalar>& r, double dt, Index tau_steps, Index t_steps) {
  if (tau_steps < 1 || t_steps < 1) throw InvalidInput("quadruple_identities: both horizons need at least one step");
  const auto node = discretize_zoh(r, dt);
  const auto whole = assemble_quadruple(node, TimeGrid(dt * (tau_steps + t_steps), tau_steps + t_steps));
  const auto first = assemble_quadruple(node, TimeGrid(dt * tau_steps, tau_steps));
  const auto second = assemble_quadruple(node, TimeGrid(dt * t_steps, t_steps));
  const Index n = r.states(), m = r.inputs(), p = r.outputs();
  const Mat<Scalar>& t_tau = first.semigroup_samples.back();
  const Mat<Scalar>& t_t = second.semigroup_samples.back();

  Mat<Scalar> input(n, (tau_steps + t_steps) * m);
  input << t_t * first.input_map, second.input_map;
  Mat<Scalar> output((tau_steps + t_steps) * p, n);
  output << first.output_map, second.output_map * t_tau;
  Mat<Scalar> io = Mat<Scalar>::Zero((tau_steps + t_steps) * p, (tau_steps + t_steps) * m);
  io.topLeftCorner(tau_steps * p, tau_steps * m) = first.io_map;
  io.bottomLeftCorner(t_steps * p, tau_steps * m) = second.output_map * first.input_map;
  io.bottomRightCorner(t_steps * p, t_steps * m) = second.io_map;

  return {linalg::relative_deviation(whole.semigroup_samples.back(), Mat<Scalar>(t_t * t_tau)),
          linalg::relative_deviation(whole.input_map, input), linalg::relative_deviation(whole.output_map, output),
          linalg::relative_deviation(whole.io_map, io)};
}

}  // namespace wellposed
