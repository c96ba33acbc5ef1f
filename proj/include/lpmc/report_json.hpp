#pragma once

// JSON and CSV serialization of reports. Non-finite reals are written as null
// and read back as +infinity.

#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lpmc/cartesian_graph.hpp"
#include "lpmc/curvature_integrals.hpp"
#include "lpmc/errors.hpp"
#include "lpmc/pmc_solver.hpp"
#include "lpmc/prescribed_curvature.hpp"

namespace lpmc {

using nlohmann::json;

namespace detail {
inline json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline double real(const json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }
inline json reals(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}
inline std::vector<double> reals(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(real(x));
  return v;
}
}  // namespace detail

inline void to_json(json& j, const SolveReport& r) {
  j = {{"iterations", r.iterations},
       {"residual_norm", detail::real(r.residual_norm)},
       {"max_w", detail::real(r.max_w)},
       {"min_u", detail::real(r.min_u)},
       {"max_u", detail::real(r.max_u)},
       {"converged", r.converged},
       {"damping_events", r.damping_events},
       {"message", r.message}};
  if (r.discretization_error >= 0.0) j["discretization_error"] = r.discretization_error;
}

inline void from_json(const json& j, SolveReport& r) {
  r.iterations = j.at("iterations").get<int>();
  r.residual_norm = detail::real(j.at("residual_norm"));
  r.max_w = detail::real(j.at("max_w"));
  r.min_u = detail::real(j.at("min_u"));
  r.max_u = detail::real(j.at("max_u"));
  r.converged = j.at("converged").get<bool>();
  r.damping_events = j.at("damping_events").get<int>();
  r.message = j.value("message", std::string{});
  r.discretization_error = j.value("discretization_error", -1.0);
}

inline void to_json(json& j, const SamplingSpec& s) {
  j = {{"n_t", s.n_t}, {"n_s", s.n_s}, {"n_theta", s.n_theta}, {"s_max", s.s_max}, {"n_ell", s.n_ell}};
}

inline void to_json(json& j, const HypothesisReport& r) {
  j = {{"h1_min", detail::real(r.h1_min)},
       {"h1", r.h1},
       {"h1_prime", r.h1_prime},
       {"h2_Lambda", detail::real(r.h2_Lambda)},
       {"h2", r.h2},
       {"h3_l", r.h3_l ? json(*r.h3_l) : json(nullptr)},
       {"h3_L", r.h3_L ? json(*r.h3_L) : json(nullptr)},
       {"h3", r.h3},
       {"hbar_min", detail::real(r.hbar_min)},
       {"hbar_positive", r.hbar_positive},
       {"sampling", r.sampling}};
}

inline void to_json(json& j, const PsiLocation& p) { j = {{"value", detail::real(p.value)}, {"s", p.s}, {"theta", p.theta}}; }

inline void to_json(json& j, const RadiusRun& r) {
  j = {{"radius", r.radius}, {"report", r.report}, {"psi_plus", r.psi_plus}, {"psi_minus", r.psi_minus}};
}

inline void to_json(json& j, const ExhaustionReport& r) {
  j = {{"runs", r.runs},
       {"compact_deltas", detail::reals(r.compact_deltas)},
       {"tilt_series", detail::reals(r.tilt_series)},
       {"failed_index", r.failed_index ? json(*r.failed_index) : json(nullptr)}};
}

inline void to_json(json& j, const UniquenessReport& r) {
  j = {{"max_distance", detail::real(r.max_distance)}, {"converged", r.converged}, {"excluded", r.excluded}};
}

inline void to_json(json& j, const PoincareReport& r) {
  j = {{"max_residual", detail::real(r.max_residual)},
       {"max_form_gap", detail::real(r.max_form_gap)},
       {"evaluated", r.evaluated},
       {"excluded", r.excluded}};
}

inline void to_json(json& j, const WillmoreReport& r) {
  j = {{"m", r.m},
       {"R", r.R},
       {"integral", detail::real(r.integral)},
       {"lower_bound", r.lower_bound},
       {"tail_estimate", detail::real(r.tail_estimate)},
       {"quadrature_tolerance", detail::real(r.quadrature_tolerance)},
       {"sigma_plus_fraction", r.sigma_plus_fraction}};
}

inline void from_json(const json& j, WillmoreReport& r) {
  r.m = j.at("m").get<int>();
  r.R = j.at("R").get<double>();
  r.integral = detail::real(j.at("integral"));
  r.lower_bound = j.at("lower_bound").get<double>();
  r.tail_estimate = detail::real(j.at("tail_estimate"));
  r.quadrature_tolerance = detail::real(j.at("quadrature_tolerance"));
  r.sigma_plus_fraction = j.at("sigma_plus_fraction").get<double>();
}

inline void to_json(json& j, const GaussEstimate& g) {
  j = {{"rho", g.rho}, {"lhs", g.lhs}, {"rhs", g.rhs}, {"area", g.area}, {"tolerance", g.tolerance}, {"holds", g.holds()}};
}

inline void to_json(json& j, const GrowthSeries& g) {
  j = {{"m", g.m},
       {"p", g.p},
       {"radii", g.radii},
       {"lp_integrals", detail::reals(g.lp_integrals)},
       {"lp_norms", detail::reals(g.lp_norms)},
       {"gauss_image_measure", detail::reals(g.gauss_image_measure)},
       {"areas", detail::reals(g.areas)},
       {"tolerances", detail::reals(g.tolerances)},
       {"nondecreasing", g.nondecreasing},
       {"lower_bound_ok", g.lower_bound_ok},
       {"holder_ok", g.holder_ok},
       {"plateau", g.plateau}};
}

inline void from_json(const json& j, GrowthSeries& g) {
  g.m = j.at("m").get<int>();
  g.p = j.at("p").get<double>();
  g.radii = j.at("radii").get<std::vector<double>>();
  g.lp_integrals = detail::reals(j.at("lp_integrals"));
  g.lp_norms = detail::reals(j.at("lp_norms"));
  g.gauss_image_measure = detail::reals(j.at("gauss_image_measure"));
  g.areas = detail::reals(j.at("areas"));
  g.tolerances = detail::reals(j.at("tolerances"));
  g.nondecreasing = j.at("nondecreasing").get<bool>();
  g.lower_bound_ok = j.at("lower_bound_ok").get<bool>();
  g.holder_ok = j.at("holder_ok").get<bool>();
  g.plateau = j.at("plateau").get<bool>();
}

inline void to_json(json& j, const AlcDecayReport& r) {
  j = {{"shell_r", r.shell_r},
       {"sup_residual", detail::reals(r.sup_residual)},
       {"r_at_sup", r.r_at_sup},
       {"monotone_decreasing", r.monotone_decreasing},
       {"limit", r.limit},
       {"alc", r.alc}};
}

/// CSV with header "radius,lp_norm,gauss_image".
inline std::string growth_csv(const GrowthSeries& g) {
  std::ostringstream os;
  os << "radius,lp_norm,gauss_image\n";
  for (std::size_t k = 0; k < g.radii.size(); ++k)
    os << format_double(g.radii[k]) << "," << format_double(g.lp_norms[k]) << "," << format_double(g.gauss_image_measure[k]) << "\n";
  return os.str();
}

inline std::vector<std::array<double, 3>> parse_growth_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "radius,lp_norm,gauss_image") throw UsageError("growth csv: bad header");
  std::vector<std::array<double, 3>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<double, 3> r{};
    std::istringstream ls(line);
    std::string cell;
    for (auto& v : r) {
      if (!std::getline(ls, cell, ',')) throw UsageError("growth csv: short row '" + line + "'");
      v = parse_real(cell, "growth csv");
    }
    rows.push_back(r);
  }
  return rows;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << text;
  if (!os) throw IoError("write failed for " + path);
}

inline std::string read_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

}  // namespace lpmc
