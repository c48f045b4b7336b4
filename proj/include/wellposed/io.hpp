#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wellposed/beam.hpp"
#include "wellposed/boundary.hpp"
#include "wellposed/feedback.hpp"
#include "wellposed/gramian.hpp"
#include "wellposed/types.hpp"

namespace wellposed::io {

using json = nlohmann::ordered_json;

/// Finite numbers as themselves, infinities as "inf" / "-inf", NaN as null.
inline json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw InvalidInput("io: expected a number");
}

inline json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

/// Fixed 17-significant-digit text, identical across runs.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Row-major nested arrays of [re, im] pairs.
template <SystemScalar Scalar>
json matrix_to_json(const Mat<Scalar>& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      const Complex z(m(i, j));
      row.push_back(json::array({number(z.real()), number(z.imag())}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Accepts [re, im] pairs or plain real entries. Empty arrays give `rows` x
/// `cols` when those are known.
template <SystemScalar Scalar>
Mat<Scalar> matrix_from_json(const json& j, Index rows = -1, Index cols = -1) {
  if (!j.is_array()) throw InvalidInput("io: matrix must be an array of rows");
  const Index r = static_cast<Index>(j.size());
  if (r == 0) return Mat<Scalar>::Zero(std::max<Index>(rows, 0), std::max<Index>(cols, 0));
  if (!j[0].is_array()) throw InvalidInput("io: matrix rows must be arrays");
  const Index c = static_cast<Index>(j[0].size());
  Mat<Scalar> m(r, c);
  for (Index i = 0; i < r; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Index>(row.size()) != c) throw InvalidInput("io: ragged matrix");
    for (Index k = 0; k < c; ++k) {
      const json& e = row[k];
      Complex z;
      if (e.is_array()) {
        if (e.size() != 2) throw InvalidInput("io: complex entries are [re, im] pairs");
        z = Complex(read_number(e[0]), read_number(e[1]));
      } else {
        z = Complex(read_number(e), 0.0);
      }
      if constexpr (is_complex_v<Scalar>) {
        m(i, k) = z;
      } else {
        if (z.imag() != 0.0) throw InvalidInput("io: complex entry in a real matrix");
        m(i, k) = z.real();
      }
    }
  }
  if ((rows >= 0 && r != rows) || (cols >= 0 && c != cols)) throw InvalidInput("io: matrix shape mismatch");
  return m;
}

template <SystemScalar Scalar>
json to_json(const Realization<Scalar>& r) {
  return json{{"n", r.states()},      {"m", r.inputs()},         {"p", r.outputs()},       {"A", matrix_to_json(r.A)},
              {"B", matrix_to_json(r.B)}, {"C", matrix_to_json(r.C)}, {"D", matrix_to_json(r.D)}};
}

template <SystemScalar Scalar>
Realization<Scalar> realization_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("io: realization must be an object");
  for (const char* key : {"n", "m", "p", "A", "B", "C", "D"})
    if (!j.contains(key)) throw InvalidInput(std::string("io: realization is missing '") + key + "'");
  const Index n = j.at("n").get<Index>(), m = j.at("m").get<Index>(), p = j.at("p").get<Index>();
  return Realization<Scalar>(matrix_from_json<Scalar>(j.at("A"), n, n), matrix_from_json<Scalar>(j.at("B"), n, m),
                             matrix_from_json<Scalar>(j.at("C"), p, n), matrix_from_json<Scalar>(j.at("D"), p, m));
}

template <SystemScalar Scalar>
json to_json(const BoundaryTriple<Scalar>& bt) {
  json j{{"L", matrix_to_json(bt.L)}, {"G", matrix_to_json(bt.G)}};
  if (bt.G2.size() > 0) j["G2"] = matrix_to_json(bt.G2);
  j["K"] = matrix_to_json(bt.K);
  if (bt.W.size() > 0) j["W"] = matrix_to_json(bt.W);
  return j;
}

template <SystemScalar Scalar>
BoundaryTriple<Scalar> triple_from_json(const json& j) {
  if (!j.is_object() || !j.contains("L") || !j.contains("G") || !j.contains("K"))
    throw InvalidInput("io: boundary triple needs L, G and K");
  Mat<Scalar> g2, w;
  if (j.contains("G2")) g2 = matrix_from_json<Scalar>(j.at("G2"));
  if (j.contains("W")) w = matrix_from_json<Scalar>(j.at("W"));
  return BoundaryTriple<Scalar>(matrix_from_json<Scalar>(j.at("L")), matrix_from_json<Scalar>(j.at("G")),
                                matrix_from_json<Scalar>(j.at("K")), std::move(g2), std::move(w));
}

inline json to_json(const TimeGrid& g) { return json{{"t_end", g.t_end()}, {"n_steps", g.n_steps()}}; }

template <SystemScalar Scalar>
json to_json(const CompositionReport<Scalar>& rep) {
  json j{{"theorem", theorem_name(rep.theorem)},
         {"deviation_time", number(rep.deviation_time)},
         {"deviation_transfer", number(rep.deviation_transfer)},
         {"deviation_continuum", number(rep.deviation_continuum)}};
  if (rep.k0) j["k0"] = number(*rep.k0);
  if (rep.theta0) j["theta0"] = number(*rep.theta0);
  json lam = json::array();
  for (double l : rep.lambda_samples) lam.push_back(number(l));
  j["lambda_samples"] = std::move(lam);
  j["grid"] = to_json(rep.grid);
  return j;
}

/// Header `t, v0_re, v0_im, v1_re, ...`, one row per sample.
template <SystemScalar Scalar>
std::string signal_csv(const Signal<Scalar>& s) {
  std::ostringstream out;
  out << "t";
  for (Index i = 0; i < s.dim(); ++i) out << ",v" << i << "_re,v" << i << "_im";
  out << "\n";
  for (Index k = 0; k < s.values.cols(); ++k) {
    out << format_double(s.grid.time(k));
    for (Index i = 0; i < s.dim(); ++i) {
      const Complex z(s.values(i, k));
      out << ',' << format_double(z.real()) << ',' << format_double(z.imag());
    }
    out << "\n";
  }
  return out.str();
}

/// Parses signal_csv output back. The grid is rebuilt from the first and last
/// time stamps.
template <SystemScalar Scalar>
Signal<Scalar> signal_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("io: empty signal CSV");
  const Index cols = static_cast<Index>(std::count(line.begin(), line.end(), ','));
  if (cols % 2 != 0 || line.rfind("t", 0) != 0) throw InvalidInput("io: bad signal CSV header");
  const Index dim = cols / 2;
  std::vector<double> times;
  std::vector<std::vector<Complex>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(std::stod(cell));
    if (static_cast<Index>(cells.size()) != cols + 1) throw InvalidInput("io: ragged signal CSV row");
    times.push_back(cells[0]);
    std::vector<Complex> row(dim);
    for (Index i = 0; i < dim; ++i) row[i] = Complex(cells[1 + 2 * i], cells[2 + 2 * i]);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw InvalidInput("io: signal CSV needs at least two samples");
  Mat<Scalar> values(dim, static_cast<Index>(rows.size()));
  for (Index k = 0; k < values.cols(); ++k)
    for (Index i = 0; i < dim; ++i) {
      if constexpr (is_complex_v<Scalar>) {
        values(i, k) = rows[k][i];
      } else {
        if (rows[k][i].imag() != 0.0) throw InvalidInput("io: complex sample in a real signal");
        values(i, k) = rows[k][i].real();
      }
    }
  const TimeGrid grid(times.back(), values.cols() - 1);
  return Signal<Scalar>(grid, std::move(values));
}

/// `k, sigma_min, bound, within_bound` over the acceptance grid.
inline std::string sweep_csv(const SweepReport& rep) {
  std::ostringstream out;
  out << "k,sigma_min,bound,within_bound\n";
  for (const auto& row : rep.rows)
    out << format_double(row.k) << ',' << format_double(row.sigma_min) << ',' << format_double(row.bound) << ','
        << (row.within_bound ? 1 : 0) << "\n";
  return out.str();
}

inline json sweep_summary(const SweepReport& rep) {
  const bool across = rep.mode == SweepMode::across;
  json j{{across ? "k0" : "theta0", number(rep.bound_gain)},
         {"k_star", optional_number(rep.k_star)},
         {"margin", optional_number(rep.margin)},
         {across ? "s0" : "k_obs", number(rep.base_constant)},
         {"failures", rep.failures}};
  if (!across) j["alpha0"] = number(rep.alpha0);
  return j;
}

inline json to_json(const beam::BoundReport& rep) {
  return json{{"bound", rep.bound},         {"constant", number(rep.constant)}, {"worst_ratio", number(rep.worst_ratio)},
              {"trials", rep.trials},       {"N", rep.N},                       {"T", number(rep.T)},
              {"slack", number(rep.slack)}, {"dt", number(rep.dt)},             {"passed", rep.passed}};
}

/// `t, F, rho, w_x_1, w_xx_0`.
inline std::string trajectory_csv(const beam::FunctionalTrace& tr) {
  std::ostringstream out;
  out << "t,F,rho,w_x_1,w_xx_0\n";
  for (Index k = 0; k < tr.F.size(); ++k)
    out << format_double(tr.grid.time(k)) << ',' << format_double(tr.F(k)) << ',' << format_double(tr.rho(k)) << ','
        << format_double(tr.w_x_1(k)) << ',' << format_double(tr.w_xx_0(k)) << "\n";
  return out.str();
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("malformed JSON in '" + path + "': " + e.what());
  }
}

}  // namespace wellposed::io
