// Acceptance run: every criterion at its stated tolerance, full trial counts.
// One line per criterion; exit status 1 if any line fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "wellposed/wellposed.hpp"

namespace ex = wellposed::experiments;

namespace {

int failures = 0;

const ex::RunReport& find(const ex::SuiteReport& s, const std::string& kind) {
  for (const auto& r : s.runs)
    if (r.config.kind == kind) return r;
  std::fprintf(stderr, "missing kind %s\n", kind.c_str());
  std::exit(2);
}

void line(int id, bool ok, const std::string& what) {
  std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  if (!ok) {
    ++failures;
    std::fflush(stdout);
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Failing assertions of a run, appended to its line.
std::string detail(const ex::RunReport& r) {
  std::string out;
  for (const auto& a : r.assertions)
    if (!a.passed) out += " [" + a.name + ": " + wellposed::io::format_double(a.measured) + " " + a.relation + " " +
                          wellposed::io::format_double(a.tolerance) + "]";
  return out;
}

double payload_number(const ex::RunReport& r, const char* key) {
  return wellposed::io::read_number(r.payload.at(key));
}

}  // namespace

int main() {
  unsigned threads = 1;
  if (const char* env = std::getenv("WELLPOSED_THREADS")) threads = static_cast<unsigned>(std::max(1, std::atoi(env)));

  const ex::SuiteReport full = ex::suite(ex::Profile::full, 1, threads);
  const ex::SuiteReport quick = ex::suite(ex::Profile::quick, 1, threads);

  {
    const auto& r = find(full, "quadruple-identities");
    const auto& dev = r.payload.at("max_deviation");
    double worst = 0.0;
    for (const auto& [k, v] : dev.items()) worst = std::max(worst, v.get<double>());
    line(1, r.passed() && r.wall_time < 10.0 && r.config.trial_count() == 50,
         fmt("quadruple identities, 50 realizations: max deviation %.3g <= 1e-10, %.2f s < 10 s", worst, r.wall_time) +
             detail(r));
  }
  {
    bool ok = true;
    double t = 0.0, transfer = 0.0, time = 0.0;
    for (const char* kind : {"compose-across", "compose-cross", "compose-double"}) {
      const auto& r = find(full, kind);
      ok = ok && r.passed() && r.config.trial_count() == 50;
      t += r.wall_time;
      transfer = std::max(transfer, payload_number(r, "max_deviation_transfer"));
      time = std::max(time, payload_number(r, "max_deviation_time"));
    }
    line(2, ok && t < 30.0,
         fmt("composition theorems, 3 x 50 instances: transfer %.3g <= 1e-10, time %.3g <= 1e-9, ", transfer, time) +
             fmt("%.2f s < 30 s", t));
  }
  {
    const auto& r = find(full, "radius");
    line(3, r.passed() && r.config.trial_count() == 100,
         fmt("surjectivity radius, 100 matrices: min kept sigma_min/s0 %.3g, max destroyed sigma_min/|M| %.3g",
             payload_number(r, "min_kept_ratio"), payload_number(r, "max_destroyed_ratio")) +
             detail(r));
  }
  {
    const auto& r = find(full, "k0-sweep");
    line(4, r.passed() && r.config.trial_count() == 25 && r.wall_time < 60.0,
         "k0 robustness, 25 instances: no breakdown below k0, min k*/k0 " +
             wellposed::io::format_double(payload_number(r, "min_margin")) + fmt(", %.2f s < 60 s", r.wall_time) +
             detail(r));
  }
  {
    const auto& r = find(full, "theta0-sweep");
    line(5, r.passed() && r.config.trial_count() == 25,
         "theta0 robustness, 25 instances: constant >= alpha0 below theta0, min k*/theta0 " +
             wellposed::io::format_double(payload_number(r, "min_margin")) + detail(r));
  }
  {
    const auto& r = find(full, "boundary-feedin");
    bool ok = true;
    for (const auto& a : r.assertions)
      if (a.name.find("vs extended") != std::string::npos || a.name.find("lambda'") != std::string::npos)
        ok = ok && a.passed;
    line(6, ok,
         fmt("beam triple vs extended simulation %.3g <= 1e-6 (N=100, dt=1e-3), B lambda-independence %.3g <= 1e-8",
             payload_number(r, "equivalence"), payload_number(r, "lambda_deviation")));
  }
  {
    const auto& r = find(full, "beam-transfer");
    line(7, r.passed(),
         fmt("beam closed forms: max |H| s %.4g <= 5, max |H1| t ch t %.4g <= 2, ", payload_number(r, "max_s_abs_H"),
             payload_number(r, "max_scaled_H1")) +
             fmt("discrete vs H at N=400 %.3g <= 0.02", r.assertions.back().measured) + detail(r));
  }
  {
    const auto& r = find(full, "beam-bounds");
    line(8, r.passed() && r.config.trial_count() == 50,
         fmt("beam inequalities, N=200, 50 trials: admissibility %.3g <= 1.05, observability %.3g >= 0.95, ",
             r.assertions[0].measured, r.assertions[1].measured) +
             fmt("forced %.3g <= 1.05, energy drift %.3g <= 1e-8, refinement ratio %.3g < 1", r.assertions[3].measured,
                 r.assertions[4].measured, r.assertions[5].measured) +
             detail(r));
  }
  {
    const auto& r = find(full, "boundary-feedin");
    bool ok = true;
    for (const auto& a : r.assertions)
      if (a.name.find("feedthrough") != std::string::npos || a.name.find("wave stand-in") != std::string::npos)
        ok = ok && a.passed;
    const auto& fe = r.payload.at("feedthrough");
    const auto& wave = r.payload.at("wave_standin");
    line(9, ok,
         fmt("feedthrough: beam |K| %.3g, residual %.3g < 1e-4; ", wellposed::io::read_number(fe.at("estimate")),
             fe.at("residual").get<double>()) +
             fmt("wave stand-in D formula %.3g, lambda limit %.3g <= 1e-6", wave.at("deviation_D").get<double>(),
                 wave.at("deviation_limit").get<double>()));
  }
  line(10, full.passed() && quick.passed() && full.wall_time < 600.0 && quick.wall_time < 60.0,
       fmt("suite: full %.2f s < 600 s, quick %.2f s < 60 s, all kinds pass", full.wall_time, quick.wall_time));

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
