#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "wellposed/feedback.hpp"
#include "wellposed/linalg.hpp"
#include "wellposed/system_node.hpp"
#include "wellposed/types.hpp"

namespace wellposed {

/// Discretized boundary triple (L, G, K) on an extended space whose last b
/// coordinates are boundary values (b = rows of G plus rows of G2).
///
/// L holds the n interior rows (n x (n+b)); a square L is accepted and its
/// boundary rows are dropped. G2 and W are optional (zero rows).
template <SystemScalar Scalar>
struct BoundaryTriple {
  Mat<Scalar> L;
  Mat<Scalar> G;
  Mat<Scalar> G2;
  Mat<Scalar> K;
  Mat<Scalar> W;

  BoundaryTriple() = default;
  BoundaryTriple(Mat<Scalar> l, Mat<Scalar> g, Mat<Scalar> k, Mat<Scalar> g2 = {}, Mat<Scalar> w = {})
      : L(std::move(l)), G(std::move(g)), G2(std::move(g2)), K(std::move(k)), W(std::move(w)) {
    normalize();
  }

  Index extended() const { return L.cols(); }
  Index boundary() const { return G.rows() + G2.rows(); }
  Index states() const { return extended() - boundary(); }

  /// [G; G2].
  Mat<Scalar> traces() const {
    Mat<Scalar> out(boundary(), extended());
    out << G, G2;
    return out;
  }

  void normalize() {
    const Index ext = L.cols();
    if (G2.size() == 0) G2.resize(0, ext);
    if (W.size() == 0) W.resize(0, ext);
    if (K.size() == 0) K.resize(0, ext);
    if (L.rows() == ext) L = Mat<Scalar>(L.topRows(ext - boundary()));
    validate();
  }

  void validate() const {
    const Index ext = L.cols();
    if (G.rows() < 1) throw InvalidInput("BoundaryTriple: G needs at least one row");
    if (G.cols() != ext || G2.cols() != ext || K.cols() != ext || W.cols() != ext)
      throw InvalidInput("BoundaryTriple: every map must act on the extended space");
    if (boundary() >= ext) throw InvalidInput("BoundaryTriple: no interior coordinates left");
    if (L.rows() != ext - boundary()) throw InvalidInput("BoundaryTriple: L must have n interior rows");
    for (const auto* m : {&L, &G, &G2, &K, &W})
      if (!m->allFinite()) throw InvalidInput("BoundaryTriple: non-finite entry");
  }
};

/// A = L|ker G in interior coordinates. Every extended z splits as
/// z = E P z + R G z with P = [I 0], G E = 0, G R = I, P R = 0.
template <SystemScalar Scalar>
struct Restriction {
  Mat<Scalar> A;             // L E
  Mat<Scalar> E;             // (n+b) x n embedding of ker G
  Mat<Scalar> R;             // (n+b) x b right inverse of G
  Mat<Scalar> kernel_basis;  // orthonormal basis of ker G (QR)
  Mat<Scalar> A_kernel;      // A in the orthonormal kernel coordinates (similar to A)
};

template <SystemScalar Scalar>
Restriction<Scalar> restrict_generator(const BoundaryTriple<Scalar>& bt) {
  bt.validate();
  const Index n = bt.states(), b = bt.boundary();
  const Mat<Scalar> gs = bt.traces();
  const VectorXd sv = linalg::singular_values(gs);
  if (!(sv(sv.size() - 1) > 1e-12 * sv(0))) throw InvalidInput("restrict_generator: G is rank deficient");
  Eigen::PartialPivLU<Mat<Scalar>> gb(gs.rightCols(b));
  if (!(gb.rcond() > 1e-12)) throw InvalidInput("restrict_generator: boundary block of G is singular");

  Restriction<Scalar> out;
  out.E.resize(n + b, n);
  out.E.topRows(n).setIdentity();
  out.E.bottomRows(b) = -gb.solve(gs.leftCols(n));
  out.R = Mat<Scalar>::Zero(n + b, b);
  out.R.bottomRows(b) = gb.inverse();
  out.A = bt.L * out.E;

  Eigen::HouseholderQR<Mat<Scalar>> qr(gs.adjoint());
  const Mat<Scalar> q = qr.householderQ() * Mat<Scalar>::Identity(n + b, n + b);
  out.kernel_basis = q.rightCols(n);
  const Mat<Scalar> t = out.kernel_basis.topRows(n);
  out.A_kernel = t.partialPivLu().solve(bt.L * out.kernel_basis);
  return out;
}

/// D_lambda: boundary input -> extended state with (lambda P - L) z = 0, [G; G2] z = u.
template <SystemScalar Scalar>
struct DirichletMap {
  double lambda = 0.0;
  Mat<Scalar> matrix;
  double interior_residual = 0.0;  // ||(lambda P - L) D||
  double trace_residual = 0.0;     // ||G D - I||
};

namespace detail {

template <SystemScalar Scalar>
Mat<Scalar> dirichlet_system(const BoundaryTriple<Scalar>& bt, double lambda) {
  const Index n = bt.states(), b = bt.boundary();
  Mat<Scalar> s(n + b, n + b);
  s.topRows(n) = -bt.L;
  s.topLeftCorner(n, n).diagonal().array() += Scalar(lambda);
  s.bottomRows(b) = bt.traces();
  return s;
}

}  // namespace detail

template <SystemScalar Scalar>
DirichletMap<Scalar> dirichlet_map(const BoundaryTriple<Scalar>& bt, double lambda) {
  bt.validate();
  const Index n = bt.states(), b = bt.boundary();
  const Mat<Scalar> s = detail::dirichlet_system(bt, lambda);
  Eigen::PartialPivLU<Mat<Scalar>> lu(s);
  if (!(lu.rcond() > 1e-14)) throw SpectrumError(lambda, "dirichlet_map: lambda lies in the spectrum of A");
  Mat<Scalar> rhs = Mat<Scalar>::Zero(n + b, b);
  rhs.bottomRows(b).setIdentity();

  DirichletMap<Scalar> out;
  out.lambda = lambda;
  out.matrix = lu.solve(rhs);
  out.interior_residual = (s.topRows(n) * out.matrix).norm();
  out.trace_residual = (bt.traces() * out.matrix - Mat<Scalar>::Identity(b, b)).norm();
  return out;
}

template <SystemScalar Scalar>
struct BoundaryRealization {
  Realization<Scalar> realization;  // (A, B, K on ker G, K R)
  Restriction<Scalar> restriction;
  double lambda = 0.0, lambda_check = 0.0;
  double lambda_deviation = 0.0;  // ||B_lambda - B_lambda'|| / ||B_lambda||
  double exact_deviation = 0.0;   // against L R
};

/// B = (lambda - A) P D_lambda, checked against a second shift.
template <SystemScalar Scalar>
BoundaryRealization<Scalar> control_operator_from_triple(const BoundaryTriple<Scalar>& bt, double lambda,
                                                         std::optional<double> lambda_check = std::nullopt) {
  const Index n = bt.states();
  BoundaryRealization<Scalar> out;
  out.restriction = restrict_generator(bt);
  const Mat<Scalar>& a = out.restriction.A;
  auto b_at = [&](double l) {
    Mat<Scalar> shifted = -a;
    shifted.diagonal().array() += Scalar(l);
    return Mat<Scalar>(shifted * dirichlet_map(bt, l).matrix.topRows(n));
  };
  out.lambda = lambda;
  out.lambda_check = lambda_check.value_or(lambda + 1.0);
  const Mat<Scalar> b = b_at(out.lambda);
  out.lambda_deviation = linalg::relative_deviation(b, b_at(out.lambda_check));
  out.exact_deviation = linalg::relative_deviation(b, Mat<Scalar>(bt.L * out.restriction.R));
  out.realization = Realization<Scalar>(a, b, bt.K * out.restriction.E, bt.K * out.restriction.R);
  return out;
}

/// lim K D_lambda: exactly K R at finite dimension.
template <SystemScalar Scalar>
Mat<Scalar> direct_feedthrough(const BoundaryTriple<Scalar>& bt, const Mat<Scalar>& k) {
  return k * restrict_generator(bt).R;
}

/// Limit of f(lambda) as lambda -> +inf on doubling nodes lambda0 * 2^j.
/// Richardson extrapolation in 1/lambda uses the last `tail` nodes, all at
/// least 4 * radius so the resolvent expansion converges there.
struct SweepLimit {
  std::vector<double> lambdas;
  std::vector<MatrixXc> values;
  std::vector<double> raw_residuals;  // ||f(lambda_j) - estimate||
  std::size_t tail_begin = 0;
  MatrixXc estimate;
  double error_estimate = 0.0;  // difference of the last two tableau diagonal entries
  bool monotone_tail = false;   // last three raw residuals decrease
};

struct SweepOptions {
  int min_nodes = 11;
  int tail = 5;
  int max_nodes = 80;
  double radius_factor = 4.0;
};

inline SweepLimit sweep_limit(const std::function<MatrixXc(double)>& f, double lambda0, double radius,
                              SweepOptions opt = {}) {
  if (!(lambda0 > 0.0)) throw InvalidInput("sweep_limit: lambda0 must be positive");
  if (opt.tail < 2) throw InvalidInput("sweep_limit: tail needs at least two nodes");
  SweepLimit out;
  int beyond = 0;
  for (int j = 0; j < opt.max_nodes; ++j) {
    const double lambda = lambda0 * std::ldexp(1.0, j);
    out.lambdas.push_back(lambda);
    out.values.push_back(f(lambda));
    if (lambda >= opt.radius_factor * radius) ++beyond;
    if (j + 1 >= opt.min_nodes && beyond >= opt.tail) break;
  }
  const std::size_t count = out.lambdas.size();
  const std::size_t tail = std::min<std::size_t>(opt.tail, count);
  out.tail_begin = count - tail;

  // Tableau rows i = 0..tail-1 in h = 1/lambda, node ratio 2.
  std::vector<MatrixXc> prev, cur;
  MatrixXc diag_prev, diag_cur;
  for (std::size_t i = 0; i < tail; ++i) {
    cur.assign(i + 1, MatrixXc());
    cur[0] = out.values[out.tail_begin + i];
    for (std::size_t j = 1; j <= i; ++j) {
      const double factor = std::ldexp(1.0, static_cast<int>(j));
      cur[j] = (factor * cur[j - 1] - prev[j - 1]) / (factor - 1.0);
    }
    diag_prev = diag_cur;
    diag_cur = cur[i];
    prev = cur;
  }
  out.estimate = diag_cur;
  out.error_estimate = (diag_cur - diag_prev).norm();
  for (const auto& v : out.values) out.raw_residuals.push_back((v - out.estimate).norm());
  // Residuals at roundoff level count as settled.
  double scale = 0.0;
  for (const auto& v : out.values) scale = std::max(scale, v.norm());
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + scale);
  auto settled = [&](std::size_t k) {
    return out.raw_residuals[k] <= floor || out.raw_residuals[k] < out.raw_residuals[k - 1];
  };
  out.monotone_tail = count >= 3 && settled(count - 1) && settled(count - 2);
  return out;
}

template <SystemScalar Scalar>
struct FeedthroughEstimate {
  SweepLimit sweep;
  std::optional<MatrixXc> estimate;  // withheld when the tail does not converge
  bool converged = false;
  double residual = 0.0;  // Richardson error estimate
  double spectral_radius = 0.0;
  Mat<Scalar> exact;  // K R
  double deviation_from_exact = 0.0;
};

/// K D_lambda along lambda_j = lambda0 2^j, lambda0 = abscissa(A) + 10.
template <SystemScalar Scalar>
FeedthroughEstimate<Scalar> feedthrough_estimate(const BoundaryTriple<Scalar>& bt, SweepOptions opt = {}) {
  const auto rst = restrict_generator(bt);
  FeedthroughEstimate<Scalar> out;
  out.spectral_radius = linalg::spectral_radius(rst.A);
  const double lambda0 = std::max(0.0, linalg::spectral_abscissa(rst.A)) + 10.0;
  out.sweep = sweep_limit(
      [&](double lambda) { return MatrixXc((bt.K * dirichlet_map(bt, lambda).matrix).template cast<Complex>()); },
      lambda0, out.spectral_radius, opt);
  out.residual = out.sweep.error_estimate;
  out.converged = out.sweep.monotone_tail && out.residual < 1e-4 * (1.0 + out.sweep.estimate.norm());
  if (out.converged) out.estimate = out.sweep.estimate;
  out.exact = bt.K * rst.R;
  out.deviation_from_exact = (out.sweep.estimate - out.exact.template cast<Complex>()).norm();
  return out;
}

/// Boundary dynamics integrated in extended coordinates: on each step the
/// held boundary value u_k has the steady state x_s = P D_0 u_k and
/// x_{k+1} = x_s + e^{A dt}(x_k - x_s). Returns z_k = E x_k + R u_k.
template <SystemScalar Scalar>
Mat<Scalar> simulate_extended(const BoundaryTriple<Scalar>& bt, const TimeGrid& g, const Signal<Scalar>& u,
                              const Vec<Scalar>& x0) {
  if (u.dim() != bt.boundary()) throw InvalidInput("simulate_extended: input dimension must equal boundary count");
  if (x0.size() != bt.states()) throw InvalidInput("simulate_extended: x0 dimension does not match interior");
  const auto rst = restrict_generator(bt);
  const Mat<Scalar> lift = dirichlet_map(bt, 0.0).matrix.topRows(bt.states());
  const Mat<Scalar> step = linalg::expm(Mat<Scalar>(rst.A * Scalar(g.dt())));
  Mat<Scalar> z(bt.extended(), g.n_steps() + 1);
  Vec<Scalar> x = x0;
  for (Index k = 0; k <= g.n_steps(); ++k) {
    z.col(k) = rst.E * x + rst.R * u.values.col(k);
    if (k == g.n_steps()) break;
    const Vec<Scalar> xs = lift * u.values.col(k);
    x = xs + step * (x - xs);
  }
  return z;
}

template <SystemScalar Scalar>
struct FeedInReport {
  Realization<Scalar> composite;  // from the feedthrough formulas
  Realization<Scalar> direct;     // from the closed boundary condition
  Mat<Scalar> Kbar1, Kbar2, Wbar1, Wbar2;
  double deviation_A = 0.0, deviation_B = 0.0, deviation_C = 0.0, deviation_D = 0.0;
  double lambda_deviation = 0.0;         // lambda-independence of the open-loop B
  double decomposition_residual = 0.0;   // Q z - (Q_Lambda z + Qbar G z)
  double deviation_stacked = 0.0;        // composite vs loop closed on the stacked node
  std::optional<SweepLimit> transfer_limit;
  double deviation_limit = 0.0;          // transfer limit vs feedthrough formula
};

namespace detail {

template <SystemScalar Scalar>
Mat<Scalar> loop_inverse(const Mat<Scalar>& kbar) {
  return linalg::checked_inverse<Scalar>(Mat<Scalar>(Mat<Scalar>::Identity(kbar.rows(), kbar.cols()) - kbar),
                                         "I - Kbar");
}

template <SystemScalar Scalar>
Restriction<Scalar> restrict_closed(const BoundaryTriple<Scalar>& bt, const Mat<Scalar>& feedback_trace) {
  try {
    return restrict_generator(BoundaryTriple<Scalar>(bt.L, Mat<Scalar>(bt.G - feedback_trace), Mat<Scalar>(), bt.G2));
  } catch (const InvalidInput&) {
    throw FeedbackLoopError("closed boundary condition G1 z = K z is degenerate");
  }
}

}  // namespace detail

/// Boundary condition G z = K z, input v through G2 z = v:
/// (A + B1 (I - K1)^{-1} K_L,  B1 (I - K1)^{-1} K2 + B2) with K1, K2 the
/// feedthroughs of K through G and G2.
template <SystemScalar Scalar>
FeedInReport<Scalar> feed_in_control(const BoundaryTriple<Scalar>& bt) {
  bt.validate();
  if (bt.K.rows() != bt.G.rows()) throw InvalidInput("feed_in_control: K must map into the range of G");
  const Index b1 = bt.G.rows(), b2 = bt.G2.rows(), n = bt.states();
  const auto open = control_operator_from_triple(bt, std::max(0.0, linalg::spectral_abscissa(restrict_generator(bt).A)) + 1.0);
  const auto& rst = open.restriction;
  const Mat<Scalar> b = bt.L * rst.R;
  const Mat<Scalar> kr = bt.K * rst.R;

  FeedInReport<Scalar> rep;
  rep.lambda_deviation = open.lambda_deviation;
  rep.Kbar1 = kr.leftCols(b1);
  rep.Kbar2 = kr.rightCols(b2);
  const Mat<Scalar> loop = detail::loop_inverse(rep.Kbar1);
  const Mat<Scalar> b1m = b.leftCols(b1) * loop;
  rep.composite = Realization<Scalar>(rst.A + b1m * bt.K * rst.E, b1m * rep.Kbar2 + b.rightCols(b2),
                                      Mat<Scalar>::Zero(0, n), Mat<Scalar>::Zero(0, b2));

  const auto closed = detail::restrict_closed(bt, Mat<Scalar>(bt.K));
  rep.direct = Realization<Scalar>(closed.A, Mat<Scalar>(bt.L * closed.R.rightCols(b2)), Mat<Scalar>::Zero(0, n),
                                   Mat<Scalar>::Zero(0, b2));
  rep.deviation_A = linalg::relative_deviation(rep.composite.A, rep.direct.A);
  rep.deviation_B = linalg::relative_deviation(rep.composite.B, rep.direct.B);
  return rep;
}

/// Boundary condition G z = Q z (Q = bt.K), observed through W:
/// A^I = A + B (I - Qbar)^{-1} Q_L, output W_L + Wbar (I - Qbar)^{-1} Q_L.
/// Requires identity feedback to be admissible for (A, B, Q_L, Qbar) on `g`.
template <SystemScalar Scalar>
FeedInReport<Scalar> feed_in_observe(const BoundaryTriple<Scalar>& bt, const TimeGrid& g = TimeGrid(1.0, 50)) {
  bt.validate();
  if (bt.G2.rows() != 0) throw InvalidInput("feed_in_observe: a single trace G is expected");
  if (bt.K.rows() != bt.G.rows()) throw InvalidInput("feed_in_observe: Q must map into the range of G");
  if (bt.W.rows() == 0) throw InvalidInput("feed_in_observe: an observation W is required");
  const auto rst = restrict_generator(bt);
  const Mat<Scalar> b = bt.L * rst.R;
  const Mat<Scalar> q_lambda = bt.K * rst.E;

  FeedInReport<Scalar> rep;
  rep.Kbar1 = bt.K * rst.R;
  rep.Wbar1 = bt.W * rst.R;
  const Realization<Scalar> loop_node(rst.A, b, q_lambda, rep.Kbar1);
  const auto adm = admissible_feedback_check(loop_node, FeedbackGain<Scalar>::identity(bt.G.rows()), g);
  if (!adm.feedthrough_invertible) throw FeedbackLoopError("feed_in_observe: I - Qbar is singular");
  if (!adm.admissible) throw NotAdmissibleError("feed_in_observe: identity feedback is not admissible");

  const Mat<Scalar> loop = detail::loop_inverse(rep.Kbar1);
  const Index n = bt.states(), p = bt.W.rows();
  rep.composite = Realization<Scalar>(rst.A + b * loop * q_lambda, Mat<Scalar>::Zero(n, 0),
                                      bt.W * rst.E + rep.Wbar1 * loop * q_lambda, Mat<Scalar>::Zero(p, 0));
  const auto closed = detail::restrict_closed(bt, Mat<Scalar>(bt.K));
  rep.direct = Realization<Scalar>(closed.A, Mat<Scalar>::Zero(n, 0), Mat<Scalar>(bt.W * closed.E),
                                   Mat<Scalar>::Zero(p, 0));
  rep.deviation_A = linalg::relative_deviation(rep.composite.A, rep.direct.A);
  rep.deviation_C = linalg::relative_deviation(rep.composite.C, rep.direct.C);

  // Q z = Q_Lambda z + Qbar G z on every extended basis vector.
  const Index ext = bt.extended();
  const Mat<Scalar> p_int = Mat<Scalar>::Identity(n, ext);
  rep.decomposition_residual = (bt.K - (q_lambda * p_int + rep.Kbar1 * bt.G)).norm();
  return rep;
}

/// Boundary condition G z = K z, input through G2, output W. The composite
/// feedthrough is Wbar1 (I - Kbar1)^{-1} Kbar2 + Wbar2; it is checked against
/// the loop closed on the stacked node with feedthrough [[K1, K2], [W1, W2]]
/// and against the lambda -> inf limit of the closed boundary problem.
template <SystemScalar Scalar>
FeedInReport<Scalar> feed_in_full(const BoundaryTriple<Scalar>& bt, SweepOptions opt = {.tail = 8}) {
  bt.validate();
  if (bt.K.rows() != bt.G.rows()) throw InvalidInput("feed_in_full: K must map into the range of G");
  if (bt.G2.rows() == 0) throw InvalidInput("feed_in_full: an input trace G2 is required");
  if (bt.W.rows() == 0) throw InvalidInput("feed_in_full: an observation W is required");
  const Index b1 = bt.G.rows(), b2 = bt.G2.rows();
  const auto open = control_operator_from_triple(bt, std::max(0.0, linalg::spectral_abscissa(restrict_generator(bt).A)) + 1.0);
  const auto& rst = open.restriction;
  const Mat<Scalar> b = bt.L * rst.R;
  const Mat<Scalar> kr = bt.K * rst.R, wr = bt.W * rst.R;

  FeedInReport<Scalar> rep;
  rep.lambda_deviation = open.lambda_deviation;
  rep.Kbar1 = kr.leftCols(b1);
  rep.Kbar2 = kr.rightCols(b2);
  rep.Wbar1 = wr.leftCols(b1);
  rep.Wbar2 = wr.rightCols(b2);
  const Mat<Scalar> loop = detail::loop_inverse(rep.Kbar1);
  const Mat<Scalar> k_lambda = bt.K * rst.E, w_lambda = bt.W * rst.E;
  const Mat<Scalar> b1m = b.leftCols(b1) * loop;
  rep.composite = Realization<Scalar>(rst.A + b1m * k_lambda, b1m * rep.Kbar2 + b.rightCols(b2),
                                      w_lambda + rep.Wbar1 * loop * k_lambda,
                                      rep.Wbar1 * loop * rep.Kbar2 + rep.Wbar2);

  // Stacked node with outputs (K z, W z) and inputs (G z, G2 z); close G z = K z.
  CoupledNode<Scalar> node{rst.A, b.leftCols(b1), b.rightCols(b2), k_lambda, w_lambda,
                           rep.Kbar1, rep.Kbar2, rep.Wbar1, rep.Wbar2};
  const Realization<Scalar> stacked = detail::channel(node.closed(1.0), b1, b1, 1, 1);
  rep.deviation_stacked = std::max({linalg::relative_deviation(stacked.A, rep.composite.A),
                                    linalg::relative_deviation(stacked.B, rep.composite.B),
                                    linalg::relative_deviation(stacked.C, rep.composite.C),
                                    linalg::relative_deviation(stacked.D, rep.composite.D)});

  const auto closed = detail::restrict_closed(bt, Mat<Scalar>(bt.K));
  rep.direct = Realization<Scalar>(closed.A, Mat<Scalar>(bt.L * closed.R.rightCols(b2)), Mat<Scalar>(bt.W * closed.E),
                                   Mat<Scalar>(bt.W * closed.R.rightCols(b2)));
  rep.deviation_A = linalg::relative_deviation(rep.composite.A, rep.direct.A);
  rep.deviation_B = linalg::relative_deviation(rep.composite.B, rep.direct.B);
  rep.deviation_C = linalg::relative_deviation(rep.composite.C, rep.direct.C);

  // Transfer of the closed boundary problem: (lambda P - L) z = 0, (G - K) z = 0, G2 z = v.
  const BoundaryTriple<Scalar> closed_bt(bt.L, Mat<Scalar>(bt.G - bt.K), Mat<Scalar>(bt.W), bt.G2);
  const double radius = linalg::spectral_radius(closed.A);
  const double lambda0 = std::max(0.0, linalg::spectral_abscissa(closed.A)) + 10.0;
  rep.transfer_limit = sweep_limit(
      [&](double lambda) {
        const Mat<Scalar> d = dirichlet_map(closed_bt, lambda).matrix;
        return MatrixXc((bt.W * d.rightCols(b2)).template cast<Complex>());
      },
      lambda0, radius, opt);
  rep.deviation_limit = linalg::relative_deviation(rep.transfer_limit->estimate, rep.composite.D.template cast<Complex>());
  rep.deviation_D = linalg::relative_deviation(rep.composite.D, rep.direct.D);
  return rep;
}

/// z'' on (0, 1) with z(0) = 0: unknowns z_1..z_n interior, z_{n+1} the
/// boundary value at x = 1. G = z(1); K reads z at the first interior node
/// (`observe_left`) or the centered slope at x = 1.
inline BoundaryTriple<double> laplacian_standin(int n_interior = 50, bool observe_left = true) {
  if (n_interior < 2) throw InvalidInput("laplacian_standin: need at least two interior nodes");
  const Index n = n_interior;
  const double h = 1.0 / (n + 1);
  MatrixXd l = MatrixXd::Zero(n, n + 1);
  for (Index j = 0; j < n; ++j) {
    l(j, j) = -2.0 / (h * h);
    if (j > 0) l(j, j - 1) = 1.0 / (h * h);
    l(j, j + 1) = 1.0 / (h * h);
  }
  MatrixXd g = MatrixXd::Zero(1, n + 1);
  g(0, n) = 1.0;
  MatrixXd k = MatrixXd::Zero(1, n + 1);
  if (observe_left) {
    k(0, 0) = 1.0;
  } else {
    k(0, n) = 1.0 / h;
    k(0, n - 1) = -1.0 / h;
  }
  return BoundaryTriple<double>(std::move(l), std::move(g), std::move(k));
}

/// First-order wave system z = (w, v, beta0, beta1) on n interior nodes:
/// w' = v, v' = second difference with w(0) = beta0, w(1) = beta1.
/// G1 = beta1 is the control end, G2 = beta0 the fed-back end;
/// K = beta1/2 + beta0/4 + int w, W = (beta0 + beta1)/2 + int v.
inline BoundaryTriple<double> wave_standin(int n_interior = 20) {
  if (n_interior < 2) throw InvalidInput("wave_standin: need at least two interior nodes");
  const Index n = n_interior;
  const double h = 1.0 / (n + 1), ih2 = 1.0 / (h * h);
  const Index ext = 2 * n + 2, b0 = 2 * n, b1 = 2 * n + 1;
  MatrixXd l = MatrixXd::Zero(2 * n, ext);
  for (Index j = 0; j < n; ++j) {
    l(j, n + j) = 1.0;
    l(n + j, j) = -2.0 * ih2;
    l(n + j, j > 0 ? j - 1 : b0) = ih2;
    l(n + j, j + 1 < n ? j + 1 : b1) = ih2;
  }
  MatrixXd g1 = MatrixXd::Zero(1, ext), g2 = MatrixXd::Zero(1, ext);
  g1(0, b1) = 1.0;
  g2(0, b0) = 1.0;
  MatrixXd k = MatrixXd::Zero(1, ext), w = MatrixXd::Zero(1, ext);
  k(0, b1) = 0.5;
  k(0, b0) = 0.25;
  w(0, b0) = 0.5;
  w(0, b1) = 0.5;
  for (Index j = 0; j < n; ++j) {
    k(0, j) = h;
    w(0, n + j) = h;
  }
  return BoundaryTriple<double>(std::move(l), std::move(g1), std::move(k), std::move(g2), std::move(w));
}

}  // namespace wellposed
