#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "wellposed/io.hpp"
#include "wellposed/random.hpp"
#include "wellposed/system_node.hpp"

using namespace wellposed;

namespace {

Realization<double> scalar(double a, double b, double c, double d) {
  return Realization<double>(MatrixXd::Constant(1, 1, a), MatrixXd::Constant(1, 1, b), MatrixXd::Constant(1, 1, c),
                             MatrixXd::Constant(1, 1, d));
}

Realization<double> random_realization(Rng& rng, Index n, Index m, Index p) {
  return Realization<double>(rnd::gaussian(rng, n, n) / std::sqrt(double(n)), rnd::gaussian(rng, n, m),
                             rnd::gaussian(rng, p, n), rnd::gaussian(rng, p, m));
}

}  // namespace

TEST(Realization, RejectsInconsistentShapes) {
  EXPECT_THROW(Realization<double>(MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 1), MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 1)),
               InvalidInput);
  EXPECT_THROW(Realization<double>(MatrixXd::Zero(2, 2), MatrixXd::Zero(3, 1), MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 1)),
               InvalidInput);
  EXPECT_THROW(Realization<double>(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 1), MatrixXd::Zero(1, 2), MatrixXd::Zero(2, 1)),
               InvalidInput);
}

TEST(Realization, RejectsNonFinite) {
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 1) = std::nan("");
  EXPECT_THROW(Realization<double>(a, MatrixXd::Zero(2, 1), MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 1)), InvalidInput);
}

TEST(SemigroupStep, ZeroGeneratorGivesIdentity) {
  const Realization<double> r(MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 1), MatrixXd::Zero(1, 3), MatrixXd::Zero(1, 1));
  EXPECT_TRUE(semigroup_step(r, 1.0).isApprox(MatrixXd::Identity(3, 3)));
}

TEST(SemigroupStep, DiagonalMatchesScalarExponentials) {
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -2.0;
  const Realization<double> r(a, MatrixXd::Zero(2, 1), MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 1));
  const MatrixXd e = semigroup_step(r, 1.0);
  EXPECT_NEAR(e(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(e(1, 1), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(std::abs(e(0, 1)) + std::abs(e(1, 0)), 0.0, 1e-16);
}

TEST(SemigroupStep, NilpotentSeriesTerminates) {
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 1) = 1.0;
  const Realization<double> r(a, MatrixXd::Zero(2, 1), MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 1));
  for (double t : {0.1, 1.0, 3.7}) {
    MatrixXd expect = MatrixXd::Identity(2, 2);
    expect(0, 1) = t;
    EXPECT_LT((semigroup_step(r, t) - expect).norm(), 1e-14 * (1 + t));
  }
}

TEST(SemigroupStep, ComplexSkewGeneratorIsUnitary) {
  Rng rng(11);
  const MatrixXd h = rnd::gaussian(rng, 4, 4);
  const MatrixXc a = Complex(0, 1) * (h + h.transpose()).cast<Complex>();
  const Realization<Complex> r(a, MatrixXc::Zero(4, 1), MatrixXc::Zero(1, 4), MatrixXc::Zero(1, 1));
  const MatrixXc u = semigroup_step(r, 0.7);
  EXPECT_LT((u.adjoint() * u - MatrixXc::Identity(4, 4)).norm(), 1e-12);
}

TEST(InputMap, ZeroInputGivesZeroState) {
  Rng rng(1);
  const auto r = random_realization(rng, 4, 2, 1);
  const TimeGrid g(1.0, 10);
  EXPECT_EQ(input_map(r, g, Signal<double>::zeros(g, 2)).values.norm(), 0.0);
}

TEST(InputMap, IntegratorOfConstant) {
  const TimeGrid g(1.0, 10);
  const auto x = input_map(scalar(0, 1, 1, 0), g, Signal<double>::constant(g, VectorXd::Ones(1)));
  EXPECT_NEAR(x.values(0, 10), 1.0, 1e-14);
}

TEST(InputMap, ScalarDecayMatchesClosedForm) {
  const TimeGrid g(2.0, 40);
  const auto x = input_map(scalar(-1, 1, 1, 0), g, Signal<double>::constant(g, VectorXd::Ones(1)));
  for (Index k = 0; k <= g.n_steps(); ++k) EXPECT_NEAR(x.values(0, k), 1.0 - std::exp(-g.time(k)), 1e-14);
}

TEST(InputMap, RejectsDimensionMismatch) {
  const TimeGrid g(1.0, 10);
  EXPECT_THROW(input_map(scalar(-1, 1, 1, 0), g, Signal<double>::zeros(g, 2)), InvalidInput);
  EXPECT_THROW(input_map(scalar(-1, 1, 1, 0), g, Signal<double>::zeros(TimeGrid(1.0, 5), 1)), InvalidInput);
}

TEST(OutputMap, Examples) {
  const TimeGrid g(1.0, 20);
  Rng rng(2);
  const auto r = random_realization(rng, 3, 1, 2);
  EXPECT_EQ(output_map(r, g, VectorXd(VectorXd::Zero(3))).values.norm(), 0.0);

  const Realization<double> flat(MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 1), MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 1));
  const VectorXd x0 = rnd::gaussian(rng, 3, 1);
  const auto y = output_map(flat, g, x0);
  for (Index k = 0; k <= g.n_steps(); ++k) EXPECT_LT((y.values.col(k) - x0).norm(), 1e-15);

  const auto decay = output_map(scalar(-1, 0, 2, 0), g, VectorXd(VectorXd::Ones(1)));
  for (Index k = 0; k <= g.n_steps(); ++k) EXPECT_NEAR(decay.values(0, k), 2.0 * std::exp(-g.time(k)), 1e-14);
}

TEST(IoMap, Examples) {
  const TimeGrid g(1.0, 25);
  Rng rng(3);
  const auto r = random_realization(rng, 4, 2, 3);
  EXPECT_EQ(io_map(r, g, Signal<double>::zeros(g, 2)).values.norm(), 0.0);

  const Realization<double> pass(rnd::gaussian(rng, 2, 2), rnd::gaussian(rng, 2, 2), MatrixXd::Zero(2, 2),
                                 MatrixXd::Identity(2, 2));
  const Signal<double> u(g, rnd::gaussian(rng, 2, g.n_steps() + 1));
  const auto y = io_map(pass, g, u);
  EXPECT_LT((y.values.leftCols(g.n_steps()) - u.values.leftCols(g.n_steps())).norm(), 1e-15);

  const auto step = io_map(scalar(-1, 1, 1, 0), g, Signal<double>::constant(g, VectorXd::Ones(1)));
  for (Index k = 0; k <= g.n_steps(); ++k) EXPECT_NEAR(step.values(0, k), 1.0 - std::exp(-g.time(k)), 1e-14);
}

TEST(Quadruple, ToeplitzStructureAndIdentitySample) {
  Rng rng(4);
  const auto r = random_realization(rng, 5, 2, 3);
  const TimeGrid g(1.0, 12);
  const auto q = assemble_quadruple(r, g);
  EXPECT_TRUE(q.semigroup_samples[0].isApprox(MatrixXd::Identity(5, 5)));
  for (Index i = 0; i < g.n_steps(); ++i)
    for (Index j = 0; j < g.n_steps(); ++j) {
      if (j > i) {
        EXPECT_EQ(MatrixXd(q.io_block(i, j)).norm(), 0.0);
      } else if (i > 0 && j > 0) {
        EXPECT_EQ((MatrixXd(q.io_block(i, j)) - MatrixXd(q.io_block(i - 1, j - 1))).norm(), 0.0);
      }
    }
}

TEST(Quadruple, GridMapsAgreeWithSimulation) {
  Rng rng(5);
  const auto r = random_realization(rng, 4, 2, 2);
  const TimeGrid g(1.5, 15);
  const Signal<double> u(g, rnd::gaussian(rng, 2, g.n_steps() + 1));
  const auto q = assemble_quadruple(r, g);
  const VectorXd stacked = stack_samples(u.values, 0, g.n_steps());
  EXPECT_LT(linalg::relative_deviation(VectorXd(q.input_map * stacked), VectorXd(input_map(r, g, u).values.col(g.n_steps()))),
            1e-13);
  EXPECT_LT(linalg::relative_deviation(VectorXd(q.io_map * stacked), stack_samples(io_map(r, g, u).values, 0, g.n_steps())),
            1e-13);
}

// Property: e^{A(s+t)} = e^{As} e^{At} for random A, s, t in [0, 2].
TEST(Quadruple, SemigroupPropertyRandom) {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = rnd::integer(rng, 1, 8);
    const auto r = random_realization(rng, n, 1, 1);
    const double s = rnd::uniform(rng, 0.0, 2.0), t = rnd::uniform(rng, 0.0, 2.0);
    const MatrixXd whole = semigroup_step(r, s + t);
    EXPECT_LE((whole - semigroup_step(r, s) * semigroup_step(r, t)).norm(), 1e-10 * whole.norm());
  }
}

TEST(Quadruple, CompositionIdentitiesRandom) {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto r = random_realization(rng, rnd::integer(rng, 1, 8), rnd::integer(rng, 1, 3), rnd::integer(rng, 1, 3));
    const Index tau = rnd::integer(rng, 1, 15), t = rnd::integer(rng, 1, 15);
    const auto dev = quadruple_identities(r, 0.05, tau, t);
    EXPECT_LE(dev.max(), 1e-10) << "trial " << trial;
  }
}

TEST(Quadruple, ComplexScalarsSupported) {
  Rng rng(8);
  const MatrixXc a = rnd::gaussian(rng, 3, 3).cast<Complex>() + Complex(0, 1) * rnd::gaussian(rng, 3, 3).cast<Complex>();
  const Realization<Complex> r(a, rnd::gaussian(rng, 3, 1).cast<Complex>(), rnd::gaussian(rng, 1, 3).cast<Complex>(),
                               MatrixXc::Zero(1, 1));
  EXPECT_LE(quadruple_identities(r, 0.1, 4, 6).max(), 1e-10);
}

// Zero-order hold against a dense adaptive integrator: first order in dt.
TEST(InputMap, ConvergenceOrderAgainstOdeOracle) {
  Rng rng(9);
  const auto r = random_realization(rng, 3, 1, 1);
  using State = std::vector<double>;
  auto u = [](double t) { return std::sin(3.0 * t) + 0.5; };
  State x(3, 0.0);
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(
      ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>()),
      [&](const State& s, State& ds, double t) {
        for (int i = 0; i < 3; ++i) {
          ds[i] = r.B(i, 0) * u(t);
          for (int j = 0; j < 3; ++j) ds[i] += r.A(i, j) * s[j];
        }
      },
      x, 0.0, 1.0, 1e-3);
  const VectorXd exact = Eigen::Map<const VectorXd>(x.data(), 3);

  std::vector<double> errors;
  for (Index steps : {20, 40, 80, 160}) {
    const TimeGrid g(1.0, steps);
    MatrixXd samples(1, steps + 1);
    for (Index k = 0; k <= steps; ++k) samples(0, k) = u(g.time(k));
    const VectorXd xz = input_map(r, g, Signal<double>(g, samples)).values.col(steps);
    errors.push_back((xz - exact).norm());
  }
  for (std::size_t i = 1; i < errors.size(); ++i) EXPECT_GE(std::log2(errors[i - 1] / errors[i]), 0.9);
}

TEST(Transfer, Examples) {
  Rng rng(10);
  const Realization<double> nob(rnd::gaussian(rng, 3, 3), MatrixXd::Zero(3, 2), rnd::gaussian(rng, 2, 3),
                                rnd::gaussian(rng, 2, 2));
  EXPECT_LT((transfer(nob, Complex(2.0, 1.0)) - nob.D.cast<Complex>()).norm(), 1e-15);
  EXPECT_NEAR(std::abs(transfer(scalar(-1, 1, 1, 0), 1.0)(0, 0) - 0.5), 0.0, 1e-15);

  const auto r = random_realization(rng, 4, 1, 1);
  const Realization<double> strict(r.A, r.B, r.C, MatrixXd::Zero(1, 1));
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1e2, 1e4, 1e6}) {
    const double g = transfer(strict, lambda).norm();
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Transfer, SpectrumIsASingularity) {
  EXPECT_THROW(transfer(scalar(-1, 1, 1, 0), -1.0), SpectrumError);
}

TEST(RegularityLimit, Examples) {
  Rng rng(12);
  const Realization<double> nob(rnd::gaussian(rng, 3, 3), MatrixXd::Zero(3, 2), rnd::gaussian(rng, 2, 3),
                                rnd::gaussian(rng, 2, 2));
  const VectorXd u = rnd::gaussian(rng, 2, 1);
  const auto sweep = geometric_sweep(10.0, 10.0, 6);
  const auto flat = regularity_limit(nob, sweep, u);
  for (double res : flat.residuals) EXPECT_LT(res, 1e-14);

  const auto sc = regularity_limit(scalar(-1, 1, 1, 3), sweep, VectorXd(VectorXd::Ones(1)));
  for (std::size_t j = 0; j < sweep.size(); ++j) EXPECT_NEAR(sc.residuals[j], 1.0 / (sweep[j] + 1.0), 1e-14);
  EXPECT_NEAR(sc.estimate(0).real(), 3.0, 1e-5);
  EXPECT_NEAR(sc.rate, 1.0, 0.05);

  // Random stable 5x5: first-order resolvent expansion bound.
  MatrixXd a = rnd::gaussian(rng, 5, 5);
  a -= (linalg::spectral_abscissa(a) + 1.0) * MatrixXd::Identity(5, 5);
  const Realization<double> st(a, rnd::gaussian(rng, 5, 2), rnd::gaussian(rng, 3, 5), rnd::gaussian(rng, 3, 2));
  const auto est = regularity_limit(st, sweep, u);
  EXPECT_LE((est.estimate - est.feedthrough_action).norm(), 10.0 * linalg::norm2(MatrixXd(st.C * st.B)) / sweep.back());
}

TEST(RegularityLimit, RejectsSweepIntoSpectrum) {
  const std::vector<double> sweep{0.5, 1.0, 4.0};
  EXPECT_THROW(regularity_limit(scalar(2, 1, 1, 0), sweep, VectorXd(VectorXd::Ones(1))), SpectrumError);
}

TEST(LambdaExtension, Examples) {
  Rng rng(13);
  const auto sweep = geometric_sweep(10.0, 10.0, 6);
  const auto r = random_realization(rng, 4, 1, 2);
  EXPECT_LT(lambda_extension(r, VectorXd(VectorXd::Zero(4)), sweep).residual, 1e-300);

  const Realization<double> id(MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 1), MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 1));
  const VectorXd x = rnd::gaussian(rng, 3, 1);
  for (double res : lambda_extension(id, x, sweep).residuals) EXPECT_LT(res, 1e-14 * x.norm());

  MatrixXd a = rnd::gaussian(rng, 4, 4);
  a -= (linalg::spectral_abscissa(a) + 0.5) * MatrixXd::Identity(4, 4);
  const Realization<double> st(a, rnd::gaussian(rng, 4, 1), rnd::gaussian(rng, 2, 4), MatrixXd::Zero(2, 1));
  const VectorXd y = rnd::gaussian(rng, 4, 1);
  const std::vector<double> big{1e6};
  EXPECT_LT(lambda_extension(st, y, big).residual, 1e-4 * (a * y).norm() * linalg::norm2(st.C));
}

TEST(Random, EngineMatchesStandardReference) {
  Rng rng;  // default seed 5489
  rng.discard(9999);
  EXPECT_EQ(rng(), 9981545732273789042ULL);
}

TEST(Random, DrawsAreDeterministicAndInRange) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = rnd::uniform(a);
    EXPECT_EQ(u, rnd::uniform(b));
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const int k = rnd::integer(a, -2, 3);
    rnd::integer(b, -2, 3);
    EXPECT_GE(k, -2);
    EXPECT_LE(k, 3);
  }
  Rng c(5);
  double mean = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = rnd::normal(c);
    mean += z / n;
    sq += z * z / n;
  }
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sq, 1.0, 0.05);
}

TEST(Io, RealizationRoundTrip) {
  Rng rng(14);
  const auto r = random_realization(rng, 3, 2, 1);
  const auto back = io::realization_from_json<double>(io::json::parse(io::to_json(r).dump()));
  EXPECT_EQ(back.A, r.A);
  EXPECT_EQ(back.B, r.B);
  EXPECT_EQ(back.C, r.C);
  EXPECT_EQ(back.D, r.D);

  const MatrixXc a = MatrixXc::Identity(2, 2) * Complex(0.5, -1.25);
  const Realization<Complex> rc(a, MatrixXc::Ones(2, 1), MatrixXc::Ones(1, 2), MatrixXc::Zero(1, 1));
  EXPECT_EQ(io::realization_from_json<Complex>(io::to_json(rc)).A, a);
  EXPECT_THROW(io::realization_from_json<double>(io::to_json(rc)), InvalidInput);
}

TEST(Io, RealizationRejectsBadDocuments) {
  auto j = io::to_json(scalar(1, 2, 3, 4));
  j.erase("D");
  EXPECT_THROW(io::realization_from_json<double>(j), InvalidInput);
  j = io::to_json(scalar(1, 2, 3, 4));
  j["n"] = 2;
  EXPECT_THROW(io::realization_from_json<double>(j), InvalidInput);
}

TEST(Io, SignalCsvRoundTrip) {
  Rng rng(15);
  const TimeGrid g(0.3, 7);
  const Signal<double> s(g, rnd::gaussian(rng, 2, 8));
  const std::string csv = io::signal_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,v0_re,v0_im,v1_re,v1_im");
  const auto back = io::signal_from_csv<double>(csv);
  EXPECT_EQ(back.values, s.values);
  EXPECT_EQ(back.grid.n_steps(), 7);
  EXPECT_DOUBLE_EQ(back.grid.t_end(), 0.3);
}

TEST(Io, NumbersKeepInfinities) {
  EXPECT_EQ(io::number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_TRUE(std::isinf(io::read_number(io::json("-inf"))));
  EXPECT_TRUE(io::number(std::nan("")).is_null());
}
