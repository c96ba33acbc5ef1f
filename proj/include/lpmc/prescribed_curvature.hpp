#pragma once

// Prescribed ambient mean curvature Hbar on the chronological future I+(0),
// in logarithmic radial coordinates: Hbar(t, x) at the point q e^t, where
// q in H^m corresponds to the disk point x. Theta(t, x) = e^t Hbar(t, x)
// is the quantity e^u F_u^*Hbar entering the Dirichlet problem.
//
// Builtins:
//   const:c           Hbar = c
//   inv               Hbar = 1/l          (dilation invariant, dTheta = 0)
//   rational[:opts]   Hbar = kappa(x) 2l/(1 + l^2),
//                     kappa = 1 + a exp(-(d(x, x0)/w)^2), opts a=,w=,cx=,cy=
//   table:path        radial table of Hbar over (t, s), bicubic interpolation

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lpmc/errors.hpp"
#include "lpmc/lorentz.hpp"

namespace lpmc {

struct PrescribedCurvature {
  std::function<double(double, const DiskPoint&)> Hbar;
  /// Optional analytic d/dt of Theta(t, x) = e^t Hbar(t, x).
  std::function<double(double, const DiskPoint&)> dTheta_dt;
  double t_min = -1.5;
  double t_max = 1.5;
  bool radial = false;
  std::string name;

  double theta(double t, const DiskPoint& x) const { return std::exp(t) * Hbar(t, x); }

  double dtheta(double t, const DiskPoint& x) const {
    if (dTheta_dt) return dTheta_dt(t, x);
    const double h = 1e-5;
    return (theta(t + h, x) - theta(t - h, x)) / (2.0 * h);
  }
};

inline PrescribedCurvature constant_curvature(double c) {
  PrescribedCurvature H;
  H.Hbar = [c](double, const DiskPoint&) { return c; };
  H.dTheta_dt = [c](double t, const DiskPoint&) { return c * std::exp(t); };
  H.radial = true;
  H.name = "const:" + std::to_string(c);
  return H;
}

inline PrescribedCurvature inverse_distance_curvature() {
  PrescribedCurvature H;
  H.Hbar = [](double t, const DiskPoint&) { return std::exp(-t); };
  H.dTheta_dt = [](double, const DiskPoint&) { return 0.0; };
  H.radial = true;
  H.name = "inv";
  return H;
}

struct RationalParams {
  double a = 0.0;  // bump amplitude of kappa
  double w = 1.0;  // bump width (hyperbolic distance)
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  // disk coordinates
};

inline PrescribedCurvature rational_curvature(const RationalParams& p) {
  if (!(p.w > 0.0)) throw UsageError("rational: width must be positive");
  if (!(p.center.norm() < 1.0)) throw UsageError("rational: center must lie in the unit disk");
  if (p.a < -0.5) throw UsageError("rational: amplitude must be >= -0.5 to keep Hbar positive");
  const LorentzVec c = inverse_stereographic(DiskPoint(Eigen::VectorXd(p.center)));
  auto kappa = [p, c](const DiskPoint& x) {
    if (p.a == 0.0) return 1.0;
    const double d = hyperbolic_distance(inverse_stereographic(x), c);
    return 1.0 + p.a * std::exp(-(d / p.w) * (d / p.w));
  };
  PrescribedCurvature H;
  H.Hbar = [kappa](double t, const DiskPoint& x) { return kappa(x) * 2.0 * std::exp(t) / (1.0 + std::exp(2.0 * t)); };
  H.dTheta_dt = [kappa](double t, const DiskPoint& x) {
    const double e = std::exp(2.0 * t);
    return kappa(x) * 4.0 * e / ((1.0 + e) * (1.0 + e));
  };
  H.radial = p.a == 0.0 || p.center.norm() == 0.0;
  std::ostringstream os;
  os << "rational:a=" << p.a << ",w=" << p.w << ",cx=" << p.center[0] << ",cy=" << p.center[1];
  H.name = os.str();
  return H;
}

// ---------------------------------------------------------------------------
// Tabulated radial curvature

/// Hbar sampled on a tensor grid t_k x s_i. Catmull-Rom bicubic interpolation,
/// clamped to the table outside its range.
struct CurvatureTable {
  std::vector<double> t;
  std::vector<double> s;
  Eigen::MatrixXd H;  // H(k, i) at (t_k, s_i)

  static double cr_weight(int k, double a) {
    switch (k) {
      case 0: return 0.5 * (-a + 2.0 * a * a - a * a * a);
      case 1: return 0.5 * (2.0 - 5.0 * a * a + 3.0 * a * a * a);
      case 2: return 0.5 * (a + 4.0 * a * a - 3.0 * a * a * a);
      default: return 0.5 * (-a * a + a * a * a);
    }
  }

  static std::pair<int, double> locate(const std::vector<double>& x, double v) {
    const int n = static_cast<int>(x.size());
    if (v <= x.front()) return {0, 0.0};
    if (v >= x.back()) return {n - 2, 1.0};
    const int k = static_cast<int>(std::upper_bound(x.begin(), x.end(), v) - x.begin()) - 1;
    return {k, (v - x[k]) / (x[k + 1] - x[k])};
  }

  double operator()(double tv, double sv) const {
    const auto [k, a] = locate(t, tv);
    const auto [i, b] = locate(s, sv);
    const int nt = static_cast<int>(t.size()), ns = static_cast<int>(s.size());
    double acc = 0.0;
    for (int p = 0; p < 4; ++p) {
      const int kk = std::clamp(k - 1 + p, 0, nt - 1);
      double row = 0.0;
      for (int q = 0; q < 4; ++q) row += cr_weight(q, b) * H(kk, std::clamp(i - 1 + q, 0, ns - 1));
      acc += cr_weight(p, a) * row;
    }
    return acc;
  }
};

/// CSV layout: header "t/s,s_0,...,s_n", then rows "t_k,H(t_k,s_0),...".
inline CurvatureTable read_curvature_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read curvature table " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  auto num = [&path](const std::string& c) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(c, &pos);
      if (c.find_first_not_of(" \t\r", pos) != std::string::npos) throw std::invalid_argument(c);
      return v;
    } catch (const std::exception&) {
      throw UsageError("curvature table " + path + ": bad number '" + c + "'");
    }
  };
  std::string line;
  CurvatureTable tab;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (header) {
      for (std::size_t c = 1; c < cells.size(); ++c) tab.s.push_back(num(cells[c]));
      header = false;
      continue;
    }
    if (cells.size() != tab.s.size() + 1) throw UsageError("curvature table " + path + ": ragged row");
    tab.t.push_back(num(cells[0]));
    std::vector<double> r;
    for (std::size_t c = 1; c < cells.size(); ++c) r.push_back(num(cells[c]));
    rows.push_back(std::move(r));
  }
  if (tab.t.size() < 2 || tab.s.size() < 2) throw UsageError("curvature table " + path + ": need at least 2x2 samples");
  auto increasing = [](const std::vector<double>& v) { return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end(); };
  if (!increasing(tab.t) || !increasing(tab.s)) throw UsageError("curvature table " + path + ": axes must increase");
  tab.H.resize(static_cast<Eigen::Index>(tab.t.size()), static_cast<Eigen::Index>(tab.s.size()));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t i = 0; i < rows[k].size(); ++i) tab.H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = rows[k][i];
  return tab;
}

inline void write_curvature_table(const std::string& path, const CurvatureTable& tab) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << std::setprecision(17) << "t/s";
  for (double s : tab.s) os << "," << s;
  os << "\n";
  for (std::size_t k = 0; k < tab.t.size(); ++k) {
    os << tab.t[k];
    for (std::size_t i = 0; i < tab.s.size(); ++i) os << "," << tab.H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    os << "\n";
  }
}

inline PrescribedCurvature table_curvature(CurvatureTable tab, const std::string& label = "table") {
  PrescribedCurvature H;
  H.t_min = tab.t.front();
  H.t_max = tab.t.back();
  auto shared = std::make_shared<CurvatureTable>(std::move(tab));
  H.Hbar = [shared](double t, const DiskPoint& x) { return (*shared)(t, disk_radius(x)); };
  H.radial = true;
  H.name = label;
  return H;
}

/// Parses "key=value,key=value" option lists.
inline std::map<std::string, std::string> parse_options(const std::string& spec, const std::string& what) {
  std::map<std::string, std::string> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError(what + ": expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

inline double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": not a finite number: '" + s + "'");
  }
}

/// Builds a curvature from its textual spec (see file comment).
inline PrescribedCurvature parse_curvature(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "const") {
    const double c = parse_real(rest, "const");
    if (!(c > 0.0)) throw UsageError("const: value must be positive");
    return constant_curvature(c);
  }
  if (kind == "inv") {
    if (!rest.empty()) throw UsageError("inv takes no parameters");
    return inverse_distance_curvature();
  }
  if (kind == "rational") {
    RationalParams p;
    for (const auto& [k, v] : parse_options(rest, "rational")) {
      if (k == "a") p.a = parse_real(v, "rational a");
      else if (k == "w") p.w = parse_real(v, "rational w");
      else if (k == "cx") p.center[0] = parse_real(v, "rational cx");
      else if (k == "cy") p.center[1] = parse_real(v, "rational cy");
      else throw UsageError("rational: unknown option '" + k + "'");
    }
    return rational_curvature(p);
  }
  if (kind == "table") {
    if (rest.empty()) throw UsageError("table: missing path");
    return table_curvature(read_curvature_table(rest), spec);
  }
  throw UsageError("unknown curvature spec '" + spec + "' (expected const:c, inv, rational[:opts] or table:path)");
}

// ---------------------------------------------------------------------------
// Hypotheses

struct SamplingSpec {
  int n_t = 41;        // samples across [t_min, t_max]
  int n_s = 25;        // radial samples over [0, s_max]
  int n_theta = 16;    // angular samples (1 is used for radial curvatures)
  double s_max = 6.0;  // sampled hyperbolic radius
  int n_ell = 401;     // log-grid size for the (H3) search
};

struct HypothesisReport {
  double h1_min = 0.0;        // min sampled dTheta/dt
  bool h1 = false;            // h1_min >= -tol
  bool h1_prime = false;      // h1_min >= threshold > 0
  double h2_Lambda = 0.0;     // sampled sup |Hbar| + sup difference quotient
  bool h2 = false;            // finite
  std::optional<double> h3_l;
  std::optional<double> h3_L;
  bool h3 = false;
  double hbar_min = 0.0;      // min sampled Hbar
  bool hbar_positive = false;
  SamplingSpec sampling;
};

inline constexpr double kH1Tol = 1e-12;
inline constexpr double kH1PrimeThreshold = 1e-8;
/// Strictness margin of the (H3) comparisons, above round-off in e^t Hbar.
inline constexpr double kH3Margin = 1e-12;

namespace detail {
inline std::vector<DiskPoint> sample_points(const SamplingSpec& sp, bool radial) {
  std::vector<DiskPoint> pts;
  const int nth = radial ? 1 : std::max(1, sp.n_theta);
  for (int i = 0; i < sp.n_s; ++i) {
    const double s = sp.n_s == 1 ? 0.0 : sp.s_max * i / (sp.n_s - 1);
    if (i == 0) {
      pts.push_back(geodesic_polar_to_disk(0.0, 0.0));
      continue;
    }
    for (int j = 0; j < nth; ++j) pts.push_back(geodesic_polar_to_disk(s, 2.0 * std::numbers::pi * j / nth));
  }
  return pts;
}

/// sup_x Theta(t, x) and inf_x Theta(t, x) over the sample points.
inline std::pair<double, double> theta_range(const PrescribedCurvature& H, double t, const std::vector<DiskPoint>& pts) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& x : pts) {
    const double v = H.theta(t, x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {hi, lo};
}
}  // namespace detail

/// Certifies (H3) for a given pair: sup_x l Hbar(x l) < 1 and inf_x L Hbar(x L) > 1.
inline bool certify_h3(const PrescribedCurvature& H, double l, double L, const SamplingSpec& sp = {}) {
  if (!(l > 0.0 && l <= 1.0 && L >= 1.0)) throw UsageError("certify_h3: need 0 < l <= 1 <= L");
  const auto pts = detail::sample_points(sp, H.radial);
  return detail::theta_range(H, std::log(l), pts).first < 1.0 - kH3Margin &&
         detail::theta_range(H, std::log(L), pts).second > 1.0 + kH3Margin;
}

/// Sampled checks of (H1), (H1'), (H2) and (H3). The (H3) search picks the
/// largest admissible l <= 1 and smallest admissible L >= 1 on a log-grid
/// of [e^{t_min}, e^{t_max}].
inline HypothesisReport check_hypotheses(const PrescribedCurvature& H, const SamplingSpec& sp = {}) {
  if (!(H.t_min <= 0.0 && 0.0 <= H.t_max)) throw UsageError("check_hypotheses: validity box must contain t = 0 (l = 1)");
  if (sp.n_t < 2 || sp.n_s < 1 || sp.n_theta < 1 || sp.n_ell < 2 || !(sp.s_max >= 0.0))
    throw UsageError("check_hypotheses: invalid sampling spec");
  HypothesisReport r;
  r.sampling = sp;
  const auto pts = detail::sample_points(sp, H.radial);
  r.h1_min = std::numeric_limits<double>::infinity();
  r.hbar_min = std::numeric_limits<double>::infinity();
  double sup_h = 0.0, sup_dq = 0.0;
  std::vector<LorentzVec> qs;
  qs.reserve(pts.size());
  for (const auto& x : pts) qs.push_back(inverse_stereographic(x));
  for (int k = 0; k < sp.n_t; ++k) {
    const double t = H.t_min + (H.t_max - H.t_min) * k / (sp.n_t - 1);
    const double tn = H.t_min + (H.t_max - H.t_min) * (k + 1) / (sp.n_t - 1);
    for (std::size_t a = 0; a < pts.size(); ++a) {
      const double v = H.Hbar(t, pts[a]);
      r.hbar_min = std::min(r.hbar_min, v);
      sup_h = std::max(sup_h, std::abs(v));
      r.h1_min = std::min(r.h1_min, H.dtheta(t, pts[a]));
      // difference quotients in the ambient Euclidean distance
      const LorentzVec p = std::exp(t) * qs[a];
      if (k + 1 < sp.n_t) {
        const LorentzVec pn = std::exp(tn) * qs[a];
        sup_dq = std::max(sup_dq, std::abs(H.Hbar(tn, pts[a]) - v) / (pn.c - p.c).norm());
      }
      if (a + 1 < pts.size()) {
        const LorentzVec pn = std::exp(t) * qs[a + 1];
        const double d = (pn.c - p.c).norm();
        if (d > 0.0) sup_dq = std::max(sup_dq, std::abs(H.Hbar(t, pts[a + 1]) - v) / d);
      }
    }
  }
  r.h1 = r.h1_min >= -kH1Tol;
  r.h1_prime = r.h1_min >= kH1PrimeThreshold;
  r.h2_Lambda = sup_h + sup_dq;
  r.h2 = std::isfinite(r.h2_Lambda);
  r.hbar_positive = r.hbar_min > 0.0;
  for (int k = 0; k < sp.n_ell; ++k) {
    const double t = H.t_min * static_cast<double>(k) / (sp.n_ell - 1);  // from 0 down to t_min
    if (detail::theta_range(H, t, pts).first < 1.0 - kH3Margin) {
      r.h3_l = std::exp(t);
      break;
    }
  }
  for (int k = 0; k < sp.n_ell; ++k) {
    const double t = H.t_max * static_cast<double>(k) / (sp.n_ell - 1);  // from 0 up to t_max
    if (detail::theta_range(H, t, pts).second > 1.0 + kH3Margin) {
      r.h3_L = std::exp(t);
      break;
    }
  }
  r.h3 = r.h3_l.has_value() && r.h3_L.has_value();
  return r;
}

}  // namespace lpmc
