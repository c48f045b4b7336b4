#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wellposed/beam.hpp"
#include "wellposed/boundary.hpp"
#include "wellposed/feedback.hpp"
#include "wellposed/gramian.hpp"
#include "wellposed/io.hpp"
#include "wellposed/random.hpp"
#include "wellposed/system_node.hpp"

namespace wellposed::experiments {

using io::json;

inline constexpr int kSchemaVersion = 1;

enum class Profile { quick, full };

inline const char* profile_name(Profile p) { return p == Profile::quick ? "quick" : "full"; }

inline Profile parse_profile(const std::string& s) {
  if (s == "quick") return Profile::quick;
  if (s == "full") return Profile::full;
  throw UsageError("unknown profile '" + s + "' (expected quick or full)");
}

/// Kind name, default trial counts (full, quick) and overridable tolerances.
struct KindInfo {
  const char* name;
  int full_trials;
  int quick_trials;
  std::map<std::string, double> tolerances;
};

inline const std::vector<KindInfo>& kinds() {
  static const std::vector<KindInfo> table{
      {"quadruple-identities", 50, 10, {{"identity", 1e-10}, {"simulation", 1e-10}}},
      {"compose-across", 50, 10, {{"transfer", 1e-10}, {"time", 1e-9}}},
      {"compose-cross", 50, 10, {{"transfer", 1e-10}, {"time", 1e-9}}},
      {"compose-double", 50, 10, {{"transfer", 1e-10}, {"time", 1e-9}}},
      {"k0-sweep", 25, 5, {{"margin", 1.0}}},
      {"theta0-sweep", 25, 5, {{"margin", 1.0}}},
      {"radius", 100, 20, {{"fraction", 0.99}, {"rank", 1e-8}}},
      {"boundary-feedin",
       1,
       1,
       {{"equivalence", 1e-6}, {"lambda", 1e-8}, {"feedthrough", 1e-4}, {"composite", 1e-6}, {"generator", 1e-10}}},
      {"beam-transfer", 1, 1, {{"H", 5.0}, {"H1", 2.0}, {"discrete", 0.02}}},
      {"beam-bounds", 50, 10, {{"slack", 0.05}, {"energy", 1e-8}, {"constant", 1e-12}}},
      {"beam-observability", 50, 10, {{"slack", 0.05}}},
  };
  return table;
}

inline const KindInfo& kind_info(const std::string& kind) {
  for (const auto& k : kinds())
    if (kind == k.name) return k;
  std::string known;
  for (const auto& k : kinds()) known += (known.empty() ? "" : ", ") + std::string(k.name);
  throw UsageError("unknown experiment kind '" + kind + "' (known: " + known + ")");
}

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  Profile profile = Profile::full;
  int trials = 0;  // 0 selects the profile default
  int n_max = 8;
  int m_max = 3;
  int p_max = 3;
  double t_end = 1.0;
  Index n_steps = 20;
  int N = 0;       // beam interior nodes, 0 selects the kind default
  double T = 0.0;  // beam horizon, 0 selects the kind default
  std::map<std::string, double> tolerances;

  int trial_count() const {
    if (trials > 0) return trials;
    const auto& info = kind_info(kind);
    return profile == Profile::quick ? info.quick_trials : info.full_trials;
  }

  double tolerance(const std::string& name) const {
    if (auto it = tolerances.find(name); it != tolerances.end()) return it->second;
    return kind_info(kind).tolerances.at(name);
  }

  void validate() const {
    const auto& info = kind_info(kind);
    if (trials < 0) throw UsageError("trials must be >= 0");
    if (n_max < 1 || m_max < 1 || p_max < 1) throw UsageError("dimensions must be >= 1");
    if (!(t_end > 0.0) || n_steps < 2) throw UsageError("grid needs t_end > 0 and n_steps >= 2");
    if (N != 0 && N < 8) throw UsageError("beam N must be >= 8");
    if (T < 0.0) throw UsageError("beam T must be positive");
    for (const auto& [name, value] : tolerances) {
      if (!info.tolerances.contains(name)) throw UsageError("kind '" + kind + "' has no tolerance '" + name + "'");
      if (!(value > 0.0) || !std::isfinite(value)) throw UsageError("tolerance '" + name + "' must be positive");
    }
  }

  json to_json() const {
    json tol = json::object();
    for (const auto& [name, value] : kind_info(kind).tolerances) tol[name] = tolerance(name);
    return json{{"kind", kind},
                {"seed", seed},
                {"profile", profile_name(profile)},
                {"trials", trial_count()},
                {"dimensions", {{"n_max", n_max}, {"m_max", m_max}, {"p_max", p_max}}},
                {"grid", {{"t_end", t_end}, {"n_steps", n_steps}}},
                {"beam", {{"N", N}, {"T", T}}},
                {"tolerances", std::move(tol)}};
  }
};

/// Strict parse: unknown keys, wrong types and unknown kinds are usage errors.
inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::vector<std::string> allowed{"schema_version", "kind",  "seed", "profile", "trials",
                                                "dimensions",     "grid",  "beam", "tolerances"};
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw UsageError("unknown config key '" + key + "'");
  ExperimentConfig c;
  try {
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
      throw UsageError("unsupported schema_version");
    if (!j.contains("kind")) throw UsageError("config needs 'kind'");
    c.kind = j.at("kind").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("profile")) c.profile = parse_profile(j.at("profile").get<std::string>());
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("dimensions")) {
      const json& d = j.at("dimensions");
      c.n_max = d.value("n_max", c.n_max);
      c.m_max = d.value("m_max", c.m_max);
      c.p_max = d.value("p_max", c.p_max);
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      c.t_end = g.value("t_end", c.t_end);
      c.n_steps = g.value("n_steps", c.n_steps);
    }
    if (j.contains("beam")) {
      const json& b = j.at("beam");
      c.N = b.value("N", c.N);
      c.T = b.value("T", c.T);
    }
    if (j.contains("tolerances")) {
      if (!j.at("tolerances").is_object()) throw UsageError("'tolerances' must be an object");
      for (const auto& [name, value] : j.at("tolerances").items()) c.tolerances[name] = value.get<double>();
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

struct Assertion {
  std::string name;
  double measured = 0.0;
  std::string relation;  // "<=", ">=", "=="
  double tolerance = 0.0;
  bool passed = false;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<Assertion> assertions;
  json payload = json::object();
  std::vector<std::pair<std::string, std::string>> csv;  // file name, content
  double wall_time = 0.0;

  bool passed() const {
    return !assertions.empty() && std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
  }

  void expect(std::string name, double measured, const char* relation, double tolerance) {
    const std::string rel = relation;
    bool ok = false;
    if (rel == "<=") ok = measured <= tolerance;
    else if (rel == ">=") ok = measured >= tolerance;
    else if (rel == "<") ok = measured < tolerance;
    else if (rel == "==") ok = measured == tolerance;
    else throw InvalidInput("expect: unknown relation " + rel);
    assertions.push_back({std::move(name), measured, rel, tolerance, ok});
  }

  /// Everything except `wall_time_s` is a function of the config alone.
  json to_json(bool with_time = true) const {
    json list = json::array();
    for (const auto& a : assertions)
      list.push_back(json{{"name", a.name},
                          {"measured", io::number(a.measured)},
                          {"relation", a.relation},
                          {"tolerance", io::number(a.tolerance)},
                          {"passed", a.passed}});
    json files = json::array();
    for (const auto& [name, content] : csv) files.push_back(name);
    json j{{"schema_version", kSchemaVersion},
           {"generator", kGeneratorName},
           {"config", config.to_json()},
           {"passed", passed()},
           {"assertions", std::move(list)},
           {"payload", payload},
           {"outputs", std::move(files)}};
    if (with_time) j["wall_time_s"] = wall_time;
    return j;
  }
};

namespace detail {

inline Realization<double> random_system(Rng& rng, Index n, Index m, Index p, double d_scale) {
  return Realization<double>(rnd::gaussian(rng, n, n) / std::sqrt(static_cast<double>(n)), rnd::gaussian(rng, n, m),
                             rnd::gaussian(rng, p, n), d_scale * rnd::gaussian(rng, p, m));
}

inline TimeGrid config_grid(const ExperimentConfig& c) { return TimeGrid(c.t_end, c.n_steps); }

inline json number_list(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(io::number(x));
  return out;
}

/// Draws until `make` succeeds; loop and admissibility failures count as
/// resamples.
template <class Make>
auto draw(Rng& rng, int& resamples, Make make) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    try {
      return make(rng);
    } catch (const FeedbackLoopError&) {
    } catch (const NotAdmissibleError&) {
    } catch (const NotControllableError&) {
    } catch (const NotObservableError&) {
    }
    ++resamples;
  }
  throw InvalidInput("could not draw an admissible random instance in 100 attempts");
}

inline void quadruple_identities(const ExperimentConfig& c, Rng& rng, RunReport& rep) {
  const TimeGrid g = config_grid(c);
  double worst[4] = {0, 0, 0, 0}, worst_sim = 0.0;
  for (int i = 0; i < c.trial_count(); ++i) {
    const Index n = rnd::integer(rng, 1, c.n_max), m = rnd::integer(rng, 1, c.m_max), p = rnd::integer(rng, 1, c.p_max);
    const Realization<double> r = random_system(rng, n, m, p, 1.0);
    const Index tau = rnd::integer(rng, 1, static_cast<int>(g.n_steps()) - 1);
    const auto dev = quadruple_identities(r, g.dt(), tau, g.n_steps() - tau);
    worst[0] = std::max(worst[0], dev.semigroup);
    worst[1] = std::max(worst[1], dev.input);
    worst[2] = std::max(worst[2], dev.output);
    worst[3] = std::max(worst[3], dev.io);

    // Simulated response to u <>_tau v against the composed grid matrices.
    const Signal<double> u(g, rnd::gaussian(rng, m, g.n_steps() + 1));
    const Signal<double> y = io_map(r, g, u);
    const auto first = assemble_quadruple(r, g.prefix(tau));
    const auto second = assemble_quadruple(r, TimeGrid(g.dt() * (g.n_steps() - tau), g.n_steps() - tau));
    const VectorXd u1 = stack_samples(u.values, 0, tau), u2 = stack_samples(u.values, tau, g.n_steps() - tau);
    VectorXd composed(g.n_steps() * p);
    composed << first.io_map * u1, second.output_map * (first.input_map * u1) + second.io_map * u2;
    worst_sim = std::max(worst_sim, linalg::relative_deviation(stack_samples(y.values, 0, g.n_steps()), composed));
  }
  const double tol = c.tolerance("identity");
  rep.expect("semigroup T(tau+t) = T(t)T(tau)", worst[0], "<=", tol);
  rep.expect("input map composition", worst[1], "<=", tol);
  rep.expect("output map composition", worst[2], "<=", tol);
  rep.expect("input-output map composition", worst[3], "<=", tol);
  rep.expect("simulated io response vs composed maps", worst_sim, "<=", c.tolerance("simulation"));
  rep.payload = json{{"trials", c.trial_count()},
                     {"dt", g.dt()},
                     {"max_deviation",
                      {{"semigroup", worst[0]}, {"input", worst[1]}, {"output", worst[2]}, {"io", worst[3]}, {"simulation", worst_sim}}}};
}

inline void compose(const ExperimentConfig& c, Rng& rng, RunReport& rep, Theorem theorem) {
  const TimeGrid g = config_grid(c);
  double worst_time = 0.0, worst_transfer = 0.0, worst_continuum = 0.0;
  int resamples = 0;
  json k0s = json::array(), theta0s = json::array();
  for (int i = 0; i < c.trial_count(); ++i) {
    const auto report = draw(rng, resamples, [&](Rng& r) {
      const Index n = rnd::integer(r, 1, c.n_max);
      const Index q = rnd::integer(r, 1, std::min(c.m_max, c.p_max));
      const Index mb = rnd::integer(r, 1, c.m_max), pc = rnd::integer(r, 1, c.p_max);
      const Realization<double> main = random_system(r, n, q, q, 0.3);
      const MatrixXd db = rnd::gaussian(r, n, mb), dc = rnd::gaussian(r, pc, n);
      const Realization<double> pb(main.A, db, main.C, 0.3 * rnd::gaussian(r, q, mb));
      const Realization<double> pcr(main.A, main.B, dc, 0.3 * rnd::gaussian(r, pc, q));
      switch (theorem) {
        case Theorem::across:
          return perturb_across(main, pb, g);
        case Theorem::cross:
          return perturb_cross(main, pcr, g);
        default: {
          const Realization<double> pbc(main.A, db, dc, 0.3 * rnd::gaussian(r, pc, mb));
          return perturb_double(main, pb, pcr, pbc, g);
        }
      }
    });
    worst_time = std::max(worst_time, report.deviation_time);
    worst_transfer = std::max(worst_transfer, report.deviation_transfer);
    worst_continuum = std::max(worst_continuum, report.deviation_continuum);
    if (report.k0) k0s.push_back(io::number(*report.k0));
    if (report.theta0) theta0s.push_back(io::number(*report.theta0));
    if (i == 0) rep.payload["first_instance"] = io::to_json(report);
  }
  rep.expect(std::string("transfer identity (") + theorem_name(theorem) + ")", worst_transfer, "<=",
             c.tolerance("transfer"));
  rep.expect(std::string("time-domain identity (") + theorem_name(theorem) + ")", worst_time, "<=", c.tolerance("time"));
  rep.payload["trials"] = c.trial_count();
  rep.payload["resamples"] = resamples;
  rep.payload["max_deviation_time"] = worst_time;
  rep.payload["max_deviation_transfer"] = worst_transfer;
  rep.payload["max_deviation_continuum"] = worst_continuum;
  if (!k0s.empty()) rep.payload["k0"] = std::move(k0s);
  if (!theta0s.empty()) rep.payload["theta0"] = std::move(theta0s);
}

inline void radius(const ExperimentConfig& c, Rng& rng, RunReport& rep) {
  const double fraction = c.tolerance("fraction"), rank_tol = c.tolerance("rank");
  int kept_failures = 0, destroyed_failures = 0, resamples = 0;
  double min_kept = std::numeric_limits<double>::infinity(), max_destroyed = 0.0;
  // Rank is judged against the scale of the unperturbed matrix.
  auto surjective = [&](const MatrixXd& m, double scale) { return linalg::sigma_min(m) > rank_tol * scale; };
  for (int i = 0; i < c.trial_count(); ++i) {
    const MatrixXd m = draw(rng, resamples, [&](Rng& r) -> MatrixXd {
      if (i % 2 == 0) {
        const Index rows = rnd::integer(r, 1, c.n_max);
        return rnd::gaussian(r, rows, rows + rnd::integer(r, 0, 6));
      }
      // Control operator of a random pair on a short grid.
      const Index n = rnd::integer(r, 1, std::min(c.n_max, 5));
      const Realization<double> sys = random_system(r, n, rnd::integer(r, 1, c.m_max), 1, 0.0);
      const auto op = control_operator(sys, TimeGrid(1.0, 10), 1.0);
      if (!surjective(op.matrix, linalg::norm2(op.matrix))) throw NotControllableError("draw: not surjective");
      return op.matrix;
    });
    const double s0 = surjectivity_radius(m), scale = linalg::norm2(m);
    const Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index last = svd.singularValues().size() - 1;

    MatrixXd e = rnd::gaussian(rng, m.rows(), m.cols());
    e *= fraction * s0 / linalg::norm2(e);
    MatrixXd worst_dir = -fraction * s0 * svd.matrixU().col(last) * svd.matrixV().col(last).transpose();
    for (const MatrixXd* pert : {&e, &worst_dir}) {
      const double smin = linalg::sigma_min(MatrixXd(m + *pert));
      min_kept = std::min(min_kept, smin / s0);
      if (!surjective(m + *pert, scale)) ++kept_failures;
    }
    const MatrixXd adversarial = m - s0 * svd.matrixU().col(last) * svd.matrixV().col(last).transpose();
    const VectorXd sa = linalg::singular_values(adversarial);
    max_destroyed = std::max(max_destroyed, sa(sa.size() - 1) / scale);
    if (surjective(adversarial, scale)) ++destroyed_failures;
  }
  rep.expect("perturbations below s0 keep surjectivity (failures)", kept_failures, "==", 0);
  rep.expect("rank-one perturbation of norm s0 destroys surjectivity (failures)", destroyed_failures, "==", 0);
  rep.expect("min sigma_min(M+E)/s0 under the preserving perturbations", min_kept, ">=", (1.0 - fraction) * (1.0 - 1e-9));
  rep.payload = json{{"trials", c.trial_count()},
                     {"resamples", resamples},
                     {"fraction", fraction},
                     {"min_kept_ratio", min_kept},
                     {"max_destroyed_ratio", max_destroyed}};
}

inline void robustness(const ExperimentConfig& c, Rng& rng, RunReport& rep, SweepMode mode) {
  const TimeGrid g = config_grid(c);
  const bool across = mode == SweepMode::across;
  int failures = 0, resamples = 0, breakdowns = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  json instances = json::array();
  for (int i = 0; i < c.trial_count(); ++i) {
    const SweepReport sweep = draw(rng, resamples, [&](Rng& r) {
      const Index n = rnd::integer(r, 1, std::min(c.n_max, 4));
      const Index q = rnd::integer(r, 1, std::min({c.m_max, c.p_max, 2}));
      const Realization<double> main = random_system(r, n, q, q, 0.3);
      if (across) {
        const Index mb = rnd::integer(r, 1, c.m_max);
        const Realization<double> pert(main.A, rnd::gaussian(r, n, mb), main.C, 0.3 * rnd::gaussian(r, q, mb));
        return robustness_sweep(main, pert, g, g.t_end(), mode);
      }
      const Index pc = rnd::integer(r, 1, c.p_max);
      const Realization<double> pert(main.A, main.B, rnd::gaussian(r, pc, n), 0.3 * rnd::gaussian(r, pc, q));
      return robustness_sweep(main, pert, g, g.t_end(), mode);
    });
    failures += sweep.failures;
    if (sweep.k_star) ++breakdowns;
    const double margin = sweep.margin.value_or(std::numeric_limits<double>::infinity());
    min_margin = std::min(min_margin, margin);
    instances.push_back(io::sweep_summary(sweep));
    rep.csv.emplace_back((across ? "k0_sweep_" : "theta0_sweep_") + std::to_string(i) + ".csv", io::sweep_csv(sweep));
  }
  const char* gain = across ? "k0" : "theta0";
  rep.expect(std::string("grid points below ") + gain + " that break down", failures, "==", 0);
  rep.expect(std::string("min empirical breakdown k* / ") + gain, min_margin, ">=", c.tolerance("margin"));
  rep.payload = json{{"trials", c.trial_count()},
                     {"resamples", resamples},
                     {"instances_with_breakdown", breakdowns},
                     {"min_margin", io::number(min_margin)},
                     {"instances", std::move(instances)}};
}

inline void boundary_feedin(const ExperimentConfig& c, Rng& rng, RunReport& rep) {
  const int n = c.N > 0 ? c.N : 100;
  const double t_end = c.T > 0.0 ? c.T : 1.0;
  const beam::BeamModel model(n);
  const auto bt = model.triple(beam::Trace::tip_velocity);

  // Control operator from the triple, and its independence of lambda.
  const auto br = control_operator_from_triple(bt, 1.0);
  rep.expect("B(lambda=1) vs B(lambda'): relative deviation", br.lambda_deviation, "<=", c.tolerance("lambda"));

  // Realization from the triple against the extended-space simulation.
  const TimeGrid g(t_end, static_cast<Index>(std::llround(t_end / 1e-3)));
  const Signal<double> u = beam::random_smooth_input(g, rng);
  const MatrixXd z = simulate_extended(bt, g, u, VectorXd(VectorXd::Zero(bt.states())));
  const Realization<double> states(br.realization.A, br.realization.B, MatrixXd::Identity(bt.states(), bt.states()),
                                   MatrixXd::Zero(bt.states(), 1));
  const double equivalence = linalg::relative_deviation(MatrixXd(z.topRows(bt.states())), input_map(states, g, u).values);
  rep.expect("triple realization vs extended simulation", equivalence, "<=", c.tolerance("equivalence"));

  // Shear to tip-velocity feedthrough tends to zero.
  const auto fe = feedthrough_estimate(bt);
  const double kbar = fe.estimate ? std::abs((*fe.estimate)(0, 0)) : std::numeric_limits<double>::infinity();
  rep.expect("beam velocity feedthrough |K|", kbar, "<=", c.tolerance("feedthrough"));
  rep.expect("beam velocity feedthrough final residual", fe.residual, "<", c.tolerance("feedthrough"));
  rep.expect("beam velocity feedthrough sweep converged", fe.converged ? 1.0 : 0.0, "==", 1.0);

  // Feeding the velocity back into the shear reproduces the damped generator.
  const double gain = 2.0;
  const auto fed = feed_in_control(BoundaryTriple<double>(bt.L, bt.G, MatrixXd(gain * bt.K)));
  const beam::BeamModel damped(n, beam::BoundaryMode::shear_feedback, gain);
  rep.expect("feed-in control composite vs damped beam generator",
             linalg::relative_deviation(fed.composite.A, damped.generator()), "<=", c.tolerance("generator"));

  // Wave stand-in: composite feedthrough against the closed formula and the
  // lambda-sweep limit.
  const auto full = feed_in_full(wave_standin(20));
  rep.expect("wave stand-in composite D vs W1(I-K1)^{-1}K2 + W2", full.deviation_D, "<=", c.tolerance("composite"));
  rep.expect("wave stand-in composite D vs lambda-sweep limit", full.deviation_limit, "<=", c.tolerance("composite"));

  json sweep = json::array();
  for (std::size_t j = 0; j < fe.sweep.lambdas.size(); ++j)
    sweep.push_back(json{{"lambda", fe.sweep.lambdas[j]}, {"value", fe.sweep.values[j](0, 0).real()}});
  rep.payload = json{{"N", n},
                     {"dt", g.dt()},
                     {"lambda_deviation", br.lambda_deviation},
                     {"equivalence", equivalence},
                     {"feedthrough",
                      {{"estimate", io::number(kbar)},
                       {"residual", fe.residual},
                       {"converged", fe.converged},
                       {"error_estimate", fe.sweep.error_estimate},
                       {"sweep", std::move(sweep)}}},
                     {"wave_standin",
                      {{"D", full.composite.D(0, 0)},
                       {"limit", full.transfer_limit ? io::number(full.transfer_limit->estimate(0, 0).real()) : json(nullptr)},
                       {"deviation_D", full.deviation_D},
                       {"deviation_limit", full.deviation_limit}}}};
}

inline void beam_transfer(const ExperimentConfig& c, Rng&, RunReport& rep) {
  const int n = c.N > 0 ? c.N : 400;
  const std::vector<double> grid = log_grid(0.1, 1e4, 60);
  double worst_h = 0.0, worst_h1 = 0.0;
  std::string bounds = "s,abs_H,bound_5_over_s,s_abs_H,scaled_H1\n";
  for (double s : grid) {
    const double h = std::abs(beam::beam_transfer_H(s)), h1 = beam::scaled_H1(s);
    worst_h = std::max(worst_h, h * s);
    worst_h1 = std::max(worst_h1, h1);
    bounds += io::format_double(s) + ',' + io::format_double(h) + ',' + io::format_double(5.0 / s) + ',' +
              io::format_double(h * s) + ',' + io::format_double(h1) + "\n";
  }
  const auto rows = beam::transfer_table(beam::BeamModel(n, beam::BoundaryMode::shear_input), {1.0, 2.0, 5.0, 10.0});
  double worst_rel = 0.0;
  std::string table = "s,H,bound,discrete,relative_error\n";
  json jrows = json::array();
  for (const auto& r : rows) {
    worst_rel = std::max(worst_rel, r.relative_error);
    table += io::format_double(r.s) + ',' + io::format_double(r.H) + ',' + io::format_double(r.bound) + ',' +
             io::format_double(r.discrete) + ',' + io::format_double(r.relative_error) + "\n";
    jrows.push_back(json{{"s", r.s}, {"H", r.H}, {"bound", r.bound}, {"discrete", r.discrete}, {"relative_error", r.relative_error}});
  }
  rep.expect("max |H(s)| s on [0.1, 1e4]", worst_h, "<=", c.tolerance("H"));
  rep.expect("max |H1(s)| t cosh t on [0.1, 1e4]", worst_h1, "<=", c.tolerance("H1"));
  rep.expect("discrete vs closed-form H at s in {1,2,5,10}", worst_rel, "<=", c.tolerance("discrete"));
  rep.payload = json{{"N", n}, {"max_s_abs_H", worst_h}, {"max_scaled_H1", worst_h1}, {"table", std::move(jrows)}};
  rep.csv.emplace_back("transfer_table.csv", std::move(table));
  rep.csv.emplace_back("transfer_bounds.csv", std::move(bounds));
}

inline void beam_bounds(const ExperimentConfig& c, Rng& rng, RunReport& rep) {
  const int n = c.N > 0 ? c.N : 200;
  const double slack = c.tolerance("slack");
  const int trials = c.trial_count();
  const beam::BeamModel free_beam(n), forced(n, beam::BoundaryMode::shear_input);

  const auto adm = beam::verify_admissibility_bound(free_beam, 1.0, trials, rng, slack);
  rep.expect("int w_x(1)^2 / ((3T+2)F(0)), worst, T=1", adm.worst_ratio, "<=", 1.0 + slack);
  const auto obs = beam::verify_observability(free_beam, 4.0, trials, rng, slack);
  rep.expect("int w_xx(0)^2 / ((T-2)F(0)), worst, T=4", obs.worst_ratio, ">=", 1.0 - slack);
  const double cdt = beam::wellposedness_constant(0.1, 1.0);
  rep.expect("|C_{0.1,1} - 10.1|", std::abs(cdt - 10.1), "<=", c.tolerance("constant"));
  const auto wp = beam::verify_wellposedness_bound(forced, 1.0, 0.1, trials, rng, slack);
  rep.expect("int w_x(1)^2 / ((1+3T)C int u^2), worst, T=1", wp.worst_ratio, "<=", 1.0 + slack);

  double drift = 0.0;
  std::string trajectory;
  const TimeGrid g(4.0, 4000);
  for (int i = 0; i < std::min(trials, 5); ++i) {
    const auto tr = beam::simulate(free_beam, g, beam::random_smooth_state(free_beam, rng));
    for (Index k = 0; k < tr.trace.F.size(); ++k)
      drift = std::max(drift, std::abs(tr.trace.F(k) - tr.trace.F(0)) / tr.trace.F(0));
    if (i == 0) trajectory = io::trajectory_csv(tr.trace);
  }
  rep.expect("max |F(t) - F(0)| / F(0), T=4", drift, "<=", c.tolerance("energy"));

  const auto order = beam::multiplier_order_study();
  double worst_step = 0.0;
  for (std::size_t i = 1; i < order.levels.size(); ++i)
    worst_step = std::max({worst_step, order.rho_residuals[i] / order.rho_residuals[i - 1],
                           order.rho1_residuals[i] / order.rho1_residuals[i - 1]});
  rep.expect("multiplier residual ratio under refinement (max)", worst_step, "<", 1.0);

  rep.payload = json{{"admissibility", io::to_json(adm)},
                     {"observability", io::to_json(obs)},
                     {"wellposedness", io::to_json(wp)},
                     {"C_delta_T", cdt},
                     {"energy_drift", drift},
                     {"order_study",
                      {{"levels", order.levels},
                       {"rho_residuals", order.rho_residuals},
                       {"rho1_residuals", order.rho1_residuals},
                       {"rho_orders", order.rho_orders},
                       {"rho1_orders", order.rho1_orders}}}};
  rep.csv.emplace_back("trajectory.csv", std::move(trajectory));
}

inline void beam_observability(const ExperimentConfig& c, Rng& rng, RunReport& rep) {
  const int n = c.N > 0 ? c.N : 200;
  const double T = c.T > 0.0 ? c.T : 4.0;
  const double slack = c.tolerance("slack");
  const auto obs = beam::verify_observability(beam::BeamModel(n), T, c.trial_count(), rng, slack);
  rep.expect("int w_xx(0)^2 / ((T-2)F(0)), worst", obs.worst_ratio, ">=", 1.0 - slack);

  // Tip-damped loop: empirical gain threshold, no closed-form constant claimed.
  const int n_sweep = std::min(n, 60);
  const auto sweep = beam::feedback_observability_sweep(n_sweep, T, log_grid(1e-3, 1e2, 26));
  rep.expect("open-loop constant over the smooth subspace / (T-2)", sweep.open_loop / (T - 2.0), ">=", 1.0 - slack);
  std::string csv = "k,constant,above_alpha0\n";
  for (const auto& row : sweep.rows)
    csv += io::format_double(row.gain) + ',' + io::format_double(row.constant) + ',' + (row.above ? "1" : "0") + "\n";
  rep.payload = json{{"bound", io::to_json(obs)},
                     {"feedback_sweep",
                      {{"N", sweep.N},
                       {"T", sweep.T},
                       {"modes", sweep.modes},
                       {"open_loop", sweep.open_loop},
                       {"alpha0", sweep.alpha0},
                       {"k_star", io::number(sweep.k_star)}}}};
  rep.csv.emplace_back("observability_sweep.csv", std::move(csv));
}

}  // namespace detail

/// Runs one experiment. Deterministic in the config; the report's wall time
/// is the only clock-dependent field.
inline RunReport run(const ExperimentConfig& config) {
  config.validate();
  RunReport rep;
  rep.config = config;
  Rng rng(config.seed);
  const auto start = std::chrono::steady_clock::now();
  const std::string& k = config.kind;
  if (k == "quadruple-identities") detail::quadruple_identities(config, rng, rep);
  else if (k == "compose-across") detail::compose(config, rng, rep, Theorem::across);
  else if (k == "compose-cross") detail::compose(config, rng, rep, Theorem::cross);
  else if (k == "compose-double") detail::compose(config, rng, rep, Theorem::bcross);
  else if (k == "k0-sweep") detail::robustness(config, rng, rep, SweepMode::across);
  else if (k == "theta0-sweep") detail::robustness(config, rng, rep, SweepMode::cross);
  else if (k == "radius") detail::radius(config, rng, rep);
  else if (k == "boundary-feedin") detail::boundary_feedin(config, rng, rep);
  else if (k == "beam-transfer") detail::beam_transfer(config, rng, rep);
  else if (k == "beam-bounds") detail::beam_bounds(config, rng, rep);
  else if (k == "beam-observability") detail::beam_observability(config, rng, rep);
  else kind_info(k);  // throws
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

struct SuiteReport {
  Profile profile = Profile::full;
  std::vector<RunReport> runs;
  double wall_time = 0.0;

  bool passed() const {
    return std::all_of(runs.begin(), runs.end(), [](const RunReport& r) { return r.passed(); });
  }

  json to_json(bool with_time = true) const {
    json list = json::array();
    for (const auto& r : runs) {
      json entry{{"kind", r.config.kind}, {"passed", r.passed()}, {"assertions", r.assertions.size()}};
      if (with_time) entry["wall_time_s"] = r.wall_time;
      list.push_back(std::move(entry));
    }
    json j{{"schema_version", kSchemaVersion},
           {"generator", kGeneratorName},
           {"profile", profile_name(profile)},
           {"passed", passed()},
           {"runs", std::move(list)}};
    if (with_time) j["wall_time_s"] = wall_time;
    return j;
  }
};

/// Every kind at the profile's trial counts, on up to `threads` workers.
/// Each run owns its generator, so the result does not depend on `threads`.
inline SuiteReport suite(Profile profile, std::uint64_t seed = 1, unsigned threads = 1) {
  SuiteReport out;
  out.profile = profile;
  const auto& table = kinds();
  out.runs.resize(table.size());
  const auto start = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(table.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < table.size(); i = next++) {
      ExperimentConfig c;
      c.kind = table[i].name;
      c.seed = seed;
      c.profile = profile;
      try {
        out.runs[i] = run(c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(table.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace wellposed::experiments
