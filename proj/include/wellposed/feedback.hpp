#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wellposed/linalg.hpp"
#include "wellposed/system_node.hpp"
#include "wellposed/types.hpp"

namespace wellposed {

/// Output-to-input feedback u = k * Gamma * y (+ external input).
template <SystemScalar Scalar>
struct FeedbackGain {
  Mat<Scalar> gamma;
  double k = 1.0;

  FeedbackGain() = default;
  explicit FeedbackGain(Mat<Scalar> g, double scale = 1.0) : gamma(std::move(g)), k(scale) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidInput("FeedbackGain: k must be finite and >= 0");
    if (!gamma.allFinite()) throw InvalidInput("FeedbackGain: non-finite entry");
  }

  static FeedbackGain identity(Index m, double scale = 1.0) {
    return FeedbackGain(Mat<Scalar>::Identity(m, m), scale);
  }

  Mat<Scalar> effective() const { return gamma * Scalar(k); }
};

struct AdmissibilityReport {
  bool admissible = false;
  bool feedthrough_invertible = false;  // I - D Gamma
  double sigma_min = 0.0;               // of I - F(t_end) Gamma
  double sigma_max = 0.0;
  double condition_number = std::numeric_limits<double>::infinity();
};

namespace detail {

template <SystemScalar Scalar>
void require_gain(const Realization<Scalar>& r, const FeedbackGain<Scalar>& fb) {
  r.validate();
  if (fb.gamma.rows() != r.inputs() || fb.gamma.cols() != r.outputs())
    throw InvalidInput("FeedbackGain: Gamma must be inputs x outputs of the realization");
}

/// diag(G, G, ..., G) with `copies` blocks.
template <SystemScalar Scalar>
Mat<Scalar> block_diagonal(const Mat<Scalar>& g, Index copies) {
  Mat<Scalar> out = Mat<Scalar>::Zero(g.rows() * copies, g.cols() * copies);
  for (Index j = 0; j < copies; ++j) out.block(j * g.rows(), j * g.cols(), g.rows(), g.cols()) = g;
  return out;
}

inline bool well_conditioned(const VectorXd& s, double rel = 1e-8) {
  return s.size() == 0 || s(s.size() - 1) > rel * s(0);
}

}  // namespace detail

/// Grid test of I - F(t_end) Gamma and of I - D Gamma.
template <SystemScalar Scalar>
AdmissibilityReport admissible_feedback_check(const Realization<Scalar>& r, const FeedbackGain<Scalar>& fb,
                                              const TimeGrid& g) {
  detail::require_gain(r, fb);
  const Mat<Scalar> gamma = fb.effective();
  const auto q = assemble_quadruple(r, g);
  Mat<Scalar> loop = -q.io_map * detail::block_diagonal(gamma, g.n_steps());
  loop.diagonal().array() += Scalar(1);

  AdmissibilityReport out;
  const VectorXd s = linalg::singular_values(loop);
  out.sigma_max = s(0);
  out.sigma_min = s(s.size() - 1);
  out.condition_number = out.sigma_min > 0.0 ? out.sigma_max / out.sigma_min : std::numeric_limits<double>::infinity();

  Mat<Scalar> ff = -r.D * gamma;
  ff.diagonal().array() += Scalar(1);
  out.feedthrough_invertible = detail::well_conditioned(linalg::singular_values(ff));
  out.admissible = out.feedthrough_invertible && out.sigma_min > 1e-8 * out.sigma_max;
  return out;
}

/// (A + B G (I-DG)^{-1} C,  B (I-GD)^{-1},  (I-DG)^{-1} C,  D (I-GD)^{-1}) with G = k Gamma.
template <SystemScalar Scalar>
Realization<Scalar> closed_loop(const Realization<Scalar>& r, const FeedbackGain<Scalar>& fb) {
  detail::require_gain(r, fb);
  const Mat<Scalar> gamma = fb.effective();
  const Mat<Scalar> out_loop =
      linalg::checked_inverse<Scalar>(linalg::identity<Scalar>(r.outputs()) - r.D * gamma, "I - D*Gamma");
  const Mat<Scalar> in_loop =
      linalg::checked_inverse<Scalar>(linalg::identity<Scalar>(r.inputs()) - gamma * r.D, "I - Gamma*D");
  Realization<Scalar> cl(r.A + r.B * gamma * out_loop * r.C, r.B * in_loop, out_loop * r.C, r.D * in_loop);
  cl.state_label = r.state_label;
  cl.input_label = r.input_label;
  cl.output_label = r.output_label;
  return cl;
}

/// Two-channel node sharing one generator:
///   y1 = C x + D u + Pb v,   y2 = dC x + Pc u + Pbc v,   x' = A x + B u + dB v.
/// Channel 1 is the loop closed by u = k y1 (+ w).
template <SystemScalar Scalar>
struct CoupledNode {
  Mat<Scalar> A, B, dB, C, dC, D, Pb, Pc, Pbc;

  Index m() const { return B.cols(); }
  Index q() const { return dB.cols(); }
  Index p() const { return C.rows(); }
  Index r() const { return dC.rows(); }

  void validate() const {
    const Index n = A.rows();
    if (A.cols() != n || B.rows() != n || dB.rows() != n || C.cols() != n || dC.cols() != n)
      throw InvalidInput("CoupledNode: state dimensions disagree");
    if (D.rows() != p() || D.cols() != m() || Pb.rows() != p() || Pb.cols() != q() || Pc.rows() != r() ||
        Pc.cols() != m() || Pbc.rows() != r() || Pbc.cols() != q())
      throw InvalidInput("CoupledNode: feedthrough dimensions disagree");
    if (m() != p()) throw InvalidInput("CoupledNode: the loop channel must be square (U = Y)");
  }

  Realization<Scalar> stacked() const {
    const Index n = A.rows();
    Mat<Scalar> bs(n, m() + q()), cs(p() + r(), n), ds(p() + r(), m() + q());
    bs << B, dB;
    cs << C, dC;
    ds << D, Pb, Pc, Pbc;
    return Realization<Scalar>(A, bs, cs, ds);
  }

  /// Closed loop u = k y1 + w on the stacked node; inputs (w, v), outputs (y1, y2).
  Realization<Scalar> closed(double k) const {
    validate();
    Mat<Scalar> gamma = Mat<Scalar>::Zero(m() + q(), p() + r());
    gamma.topLeftCorner(m(), p()).setIdentity();
    return closed_loop(stacked(), FeedbackGain<Scalar>(gamma, k));
  }
};

enum class Theorem { across, cross, bcross };

inline const char* theorem_name(Theorem t) {
  switch (t) {
    case Theorem::across: return "across";
    case Theorem::cross: return "cross";
    case Theorem::bcross: return "bcross";
  }
  return "?";
}

template <SystemScalar Scalar>
struct CompositionReport {
  Theorem theorem = Theorem::across;
  Realization<Scalar> closed_loop;
  TimeGrid grid{1.0, 1};
  Mat<Scalar> lhs;  // grid map of the sampled-data closed loop
  Mat<Scalar> rhs;  // same map assembled from open-loop grid matrices
  double deviation_time = 0.0;
  double deviation_transfer = 0.0;
  double deviation_continuum = 0.0;  // ZOH of the continuous closed loop vs rhs, O(dt)
  std::vector<double> lambda_samples;
  std::optional<double> k0;
  std::optional<double> theta0;
};

namespace detail {

/// Sub-node of a closed loop: input block `in`, output block `out`
/// (0 = loop channel, 1 = perturbation channel).
template <SystemScalar Scalar>
Realization<Scalar> channel(const Realization<Scalar>& cl, Index m, Index p, int in, int out) {
  const Index in0 = in == 0 ? 0 : m, in_n = in == 0 ? m : cl.inputs() - m;
  const Index out0 = out == 0 ? 0 : p, out_n = out == 0 ? p : cl.outputs() - p;
  return Realization<Scalar>(cl.A, cl.B.middleCols(in0, in_n), cl.C.middleRows(out0, out_n),
                             cl.D.block(out0, in0, out_n, in_n));
}

template <SystemScalar Scalar>
DiscreteNode<Scalar> as_discrete(const Realization<Scalar>& r, double dt) {
  return DiscreteNode<Scalar>{r.A, r.B, r.C, r.D, dt};
}

template <SystemScalar Scalar>
Realization<Scalar> as_realization(const DiscreteNode<Scalar>& d) {
  return Realization<Scalar>(d.Ad, d.Bd, d.C, d.D);
}

/// ZOH-discretizes the open-loop coupled node, closes the loop on samples.
template <SystemScalar Scalar>
Realization<Scalar> sampled_closed_loop(const CoupledNode<Scalar>& node, double dt, double k) {
  const auto disc = discretize_zoh(node.stacked(), dt);
  CoupledNode<Scalar> d = node;
  d.A = disc.Ad;
  d.B = disc.Bd.leftCols(node.m());
  d.dB = disc.Bd.rightCols(node.q());
  return d.closed(k);
}

inline std::vector<double> identity_lambdas(double abscissa) {
  const double shift = std::max(0.0, abscissa) + 1.0;
  return {1.0 + shift, 2.0 + shift, 5.0 + shift, 10.0 + shift};
}

template <SystemScalar Scalar>
Mat<Scalar> solve_loop(const Mat<Scalar>& io, const Mat<Scalar>& rhs) {
  Mat<Scalar> loop = -io;
  loop.diagonal().array() += Scalar(1);
  Eigen::PartialPivLU<Mat<Scalar>> lu(loop);
  if (!(lu.rcond() > 1e-13)) throw NotAdmissibleError("I - F(t) is singular on the grid");
  return lu.solve(rhs);
}

template <SystemScalar Scalar>
void require_identity_admissible(const CoupledNode<Scalar>& node, const TimeGrid& g) {
  const Realization<Scalar> main(node.A, node.B, node.C, node.D);
  const auto adm = admissible_feedback_check(main, FeedbackGain<Scalar>::identity(node.m()), g);
  if (!adm.feedthrough_invertible) throw FeedbackLoopError("I - D is singular");
  if (!adm.admissible)
    throw NotAdmissibleError("I is not an admissible feedback: sigma_min(I - F) = " + std::to_string(adm.sigma_min));
}

template <SystemScalar Scalar>
void require_same(const Mat<Scalar>& a, const Mat<Scalar>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a != b)
    throw InvalidInput(std::string("composition: ") + what + " must be shared");
}

}  // namespace detail

/// Feedback u = y on (A, B, C, D) with extra control dB entering through P:
/// closed loop (A^I, B(I-D)^{-1}P + dB, (I-D)^{-1}C, (I-D)^{-1}P).
/// Checks Phi_new = Phi_B (I - F)^{-1} F_P + Phi_dB on the grid and
/// (l - A^I)^{-1} B_new = (l - A)^{-1} B (I - G)^{-1} G_P + (l - A)^{-1} dB.
template <SystemScalar Scalar>
CompositionReport<Scalar> perturb_across(const Realization<Scalar>& main, const Realization<Scalar>& pert,
                                         const TimeGrid& g) {
  main.validate();
  pert.validate();
  detail::require_same(main.A, pert.A, "A");
  detail::require_same(main.C, pert.C, "C");
  const CoupledNode<Scalar> node{main.A, main.B, pert.B, main.C, Mat<Scalar>::Zero(0, main.states()), main.D,
                                 pert.D, Mat<Scalar>::Zero(0, main.inputs()), Mat<Scalar>::Zero(0, pert.inputs())};
  node.validate();
  detail::require_identity_admissible(node, g);

  const Index m = node.m(), p = node.p();
  CompositionReport<Scalar> rep;
  rep.theorem = Theorem::across;
  rep.grid = g;
  rep.closed_loop = detail::channel(node.closed(1.0), m, p, 1, 0);

  rep.lhs = assemble_quadruple(detail::as_discrete(detail::channel(detail::sampled_closed_loop(node, g.dt(), 1.0), m,
                                                                   p, 1, 0),
                                                   g.dt()),
                               g)
                .input_map;
  const auto qb = assemble_quadruple(main, g);
  const auto qp = assemble_quadruple(pert, g);
  rep.rhs = qb.input_map * detail::solve_loop(qb.io_map, qp.io_map) + qp.input_map;
  rep.deviation_time = linalg::relative_deviation(rep.lhs, rep.rhs);
  rep.deviation_continuum = linalg::relative_deviation(assemble_quadruple(rep.closed_loop, g).input_map, rep.rhs);

  rep.lambda_samples = detail::identity_lambdas(
      std::max(linalg::spectral_abscissa(main.A), linalg::spectral_abscissa(rep.closed_loop.A)));
  for (double lambda : rep.lambda_samples) {
    const MatrixXc lhs = linalg::resolvent_solve(rep.closed_loop.A, lambda, rep.closed_loop.B);
    const MatrixXc gmain = transfer(main, lambda);
    const MatrixXc gp = transfer(pert, lambda);
    const MatrixXc loop = MatrixXc::Identity(m, m) - gmain;
    const MatrixXc rhs =
        linalg::resolvent_solve(main.A, lambda, main.B) * loop.partialPivLu().solve(gp) +
        linalg::resolvent_solve(main.A, lambda, pert.B);
    rep.deviation_transfer = std::max(rep.deviation_transfer, linalg::relative_deviation(lhs, rhs));
  }
  return rep;
}

/// Feedback u = y + w on (A, B, C, D) observed through (dC, P):
/// closed loop (A^I, B(I-D)^{-1}, P(I-D)^{-1}C + dC, P(I-D)^{-1}).
/// Checks Psi_new = F_{dC,P} (I - F)^{-1} Psi_C + Psi_dC on the grid and the
/// dual resolvent identity.
template <SystemScalar Scalar>
CompositionReport<Scalar> perturb_cross(const Realization<Scalar>& main, const Realization<Scalar>& pert,
                                        const TimeGrid& g) {
  main.validate();
  pert.validate();
  detail::require_same(main.A, pert.A, "A");
  detail::require_same(main.B, pert.B, "B");
  const CoupledNode<Scalar> node{main.A, main.B, Mat<Scalar>::Zero(main.states(), 0), main.C, pert.C, main.D,
                                 Mat<Scalar>::Zero(main.outputs(), 0), pert.D, Mat<Scalar>::Zero(pert.outputs(), 0)};
  node.validate();
  detail::require_identity_admissible(node, g);

  const Index m = node.m(), p = node.p();
  CompositionReport<Scalar> rep;
  rep.theorem = Theorem::cross;
  rep.grid = g;
  rep.closed_loop = detail::channel(node.closed(1.0), m, p, 0, 1);

  rep.lhs = assemble_quadruple(detail::as_discrete(detail::channel(detail::sampled_closed_loop(node, g.dt(), 1.0), m,
                                                                   p, 0, 1),
                                                   g.dt()),
                               g)
                .output_map;
  const auto qb = assemble_quadruple(main, g);
  const auto qp = assemble_quadruple(pert, g);
  rep.rhs = qp.io_map * detail::solve_loop(qb.io_map, qb.output_map) + qp.output_map;
  rep.deviation_time = linalg::relative_deviation(rep.lhs, rep.rhs);
  rep.deviation_continuum = linalg::relative_deviation(assemble_quadruple(rep.closed_loop, g).output_map, rep.rhs);

  rep.lambda_samples = detail::identity_lambdas(
      std::max(linalg::spectral_abscissa(main.A), linalg::spectral_abscissa(rep.closed_loop.A)));
  const Index n = main.states();
  for (double lambda : rep.lambda_samples) {
    const MatrixXc ident = MatrixXc::Identity(n, n);
    const MatrixXc res_cl = linalg::resolvent_solve(rep.closed_loop.A, lambda, ident);
    const MatrixXc res = linalg::resolvent_solve(main.A, lambda, ident);
    const MatrixXc lhs = rep.closed_loop.C.template cast<Complex>() * res_cl;
    const MatrixXc loop = MatrixXc::Identity(m, m) - transfer(main, lambda);
    const MatrixXc rhs = transfer(pert, lambda) * loop.partialPivLu().solve(main.C.template cast<Complex>() * res) +
                         pert.C.template cast<Complex>() * res;
    rep.deviation_transfer = std::max(rep.deviation_transfer, linalg::relative_deviation(lhs, rhs));
  }
  return rep;
}

/// Feedback u = y on (A, B, C, D), new input through dB and new output through dC:
/// closed loop (A^I, B(I-D)^{-1}Pb + dB, Pc(I-D)^{-1}C + dC, Pc(I-D)^{-1}Pb + Pbc),
/// where Pb, Pc, Pbc are the feedthroughs of pert_b, pert_c, pert_bc.
/// Checks F_new = F_{B,dC} (I - F)^{-1} F_{dB,C} + F_{dB,dC} on the grid and in
/// the transfer domain.
template <SystemScalar Scalar>
CompositionReport<Scalar> perturb_double(const Realization<Scalar>& main, const Realization<Scalar>& pert_b,
                                         const Realization<Scalar>& pert_c, const Realization<Scalar>& pert_bc,
                                         const TimeGrid& g) {
  for (const auto* r : {&main, &pert_b, &pert_c, &pert_bc}) {
    r->validate();
    detail::require_same(main.A, r->A, "A");
  }
  detail::require_same(main.C, pert_b.C, "C of the control perturbation");
  detail::require_same(main.B, pert_c.B, "B of the observation perturbation");
  detail::require_same(pert_b.B, pert_bc.B, "dB");
  detail::require_same(pert_c.C, pert_bc.C, "dC");
  const CoupledNode<Scalar> node{main.A, main.B, pert_b.B, main.C, pert_c.C, main.D, pert_b.D, pert_c.D, pert_bc.D};
  node.validate();
  detail::require_identity_admissible(node, g);

  const Index m = node.m(), p = node.p();
  CompositionReport<Scalar> rep;
  rep.theorem = Theorem::bcross;
  rep.grid = g;
  rep.closed_loop = detail::channel(node.closed(1.0), m, p, 1, 1);

  rep.lhs = assemble_quadruple(detail::as_discrete(detail::channel(detail::sampled_closed_loop(node, g.dt(), 1.0), m,
                                                                   p, 1, 1),
                                                   g.dt()),
                               g)
                .io_map;
  const auto qm = assemble_quadruple(main, g);
  const auto qb = assemble_quadruple(pert_b, g);
  const auto qc = assemble_quadruple(pert_c, g);
  const auto qbc = assemble_quadruple(pert_bc, g);
  rep.rhs = qc.io_map * detail::solve_loop(qm.io_map, qb.io_map) + qbc.io_map;
  rep.deviation_time = linalg::relative_deviation(rep.lhs, rep.rhs);
  rep.deviation_continuum = linalg::relative_deviation(assemble_quadruple(rep.closed_loop, g).io_map, rep.rhs);

  rep.lambda_samples = detail::identity_lambdas(
      std::max(linalg::spectral_abscissa(main.A), linalg::spectral_abscissa(rep.closed_loop.A)));
  for (double lambda : rep.lambda_samples) {
    const MatrixXc lhs = transfer(rep.closed_loop, lambda);
    const MatrixXc loop = MatrixXc::Identity(m, m) - transfer(main, lambda);
    const MatrixXc rhs =
        transfer(pert_c, lambda) * loop.partialPivLu().solve(transfer(pert_b, lambda)) + transfer(pert_bc, lambda);
    rep.deviation_transfer = std::max(rep.deviation_transfer, linalg::relative_deviation(lhs, rhs));
  }
  return rep;
}

namespace detail {
inline double reciprocal(double x) { return x == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / x; }
}  // namespace detail

struct K0Inputs {
  double norm_D = 0.0;
  double norm_F = 0.0;    // ||F_{A,B,C,D}(t0)||
  double norm_Phi = 0.0;  // ||Phi_{A,B}(t0)||
  double norm_FP = 0.0;   // ||F_{A,dB,C,P}(t0)||
  double s0 = 0.0;        // radius of surjectivity of Phi_{A,dB}(t0)
};

/// k0 = min{1/||D||, 1/||F||, s0 / (||Phi|| ||F_P|| + s0 ||F||)} with 1/0 = +inf.
inline double k0_bound(const K0Inputs& in) {
  for (double v : {in.norm_D, in.norm_F, in.norm_Phi, in.norm_FP})
    if (!(v >= 0.0)) throw InvalidInput("k0_bound: norms must be >= 0");
  if (!(in.s0 > 0.0)) throw NotControllableError("k0_bound: s0 must be positive (not exactly controllable)");
  const double third = in.s0 * detail::reciprocal(in.norm_Phi * in.norm_FP + in.s0 * in.norm_F);
  return std::min({detail::reciprocal(in.norm_D), detail::reciprocal(in.norm_F), third});
}

struct Theta0Inputs {
  double norm_D = 0.0;
  double norm_F = 0.0;    // ||F_{A,B,C,D}(t0)||
  double norm_FdC = 0.0;  // ||F_{A,B,dC,P}(t0)||
  double norm_Psi = 0.0;  // ||Psi_{A,C}(t0)||
  double k_obs = 0.0;     // observability constant of (A, dC)
  double alpha0 = 0.0;
};

/// theta0 = min{1/||D||, 1/||F||, (k-a)/((k-a)||F|| + ||F_dC|| ||Psi||)}.
inline double theta0_bound(const Theta0Inputs& in) {
  for (double v : {in.norm_D, in.norm_F, in.norm_FdC, in.norm_Psi})
    if (!(v >= 0.0)) throw InvalidInput("theta0_bound: norms must be >= 0");
  if (!(in.alpha0 > 0.0 && in.alpha0 < in.k_obs))
    throw InvalidInput("theta0_bound: alpha0 must lie in (0, observability constant)");
  const double gap = in.k_obs - in.alpha0;
  const double third = gap * detail::reciprocal(gap * in.norm_F + in.norm_FdC * in.norm_Psi);
  return std::min({detail::reciprocal(in.norm_D), detail::reciprocal(in.norm_F), third});
}

}  // namespace wellposed
