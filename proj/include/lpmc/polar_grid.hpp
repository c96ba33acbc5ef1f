#pragma once

// Structured geodesic-polar grid over a hyperbolic geodesic ball B_{s_max}
// in H^2, scalar fields on it, discrete jets and field file IO.
//
// Nodes: the pole (index 0) and rings i = 1..n_s at s_i = i ds, each with
// n_th angular nodes theta_j = j dth. Ring n_s is the Dirichlet boundary.

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lpmc/chart.hpp"
#include "lpmc/errors.hpp"
#include "lpmc/lorentz.hpp"
#include "lpmc/radial_graph.hpp"

namespace lpmc {

struct PolarGrid {
  int n_s = 0;
  int n_th = 0;
  double s_max = 0.0;

  PolarGrid() = default;
  PolarGrid(int ns, int nth, double smax) : n_s(ns), n_th(nth), s_max(smax) { validate(); }

  void validate() const {
    if (n_s < 3) throw UsageError("PolarGrid: n_s must be at least 3, got " + std::to_string(n_s));
    if (n_th < 4 || n_th % 2 != 0) throw UsageError("PolarGrid: n_th must be even and at least 4, got " + std::to_string(n_th));
    if (!(s_max > 0.0) || !std::isfinite(s_max)) throw UsageError("PolarGrid: s_max must be positive and finite");
  }

  double ds() const { return s_max / n_s; }
  double dth() const { return 2.0 * std::numbers::pi / n_th; }
  double s(int i) const { return i * ds(); }
  double theta(int j) const { return j * dth(); }
  std::size_t size() const { return 1 + static_cast<std::size_t>(n_s) * static_cast<std::size_t>(n_th); }

  int wrap(int j) const { return ((j % n_th) + n_th) % n_th; }
  /// Linear index of node (i, j); i = 0 is the pole regardless of j.
  std::size_t index(int i, int j) const {
    if (i == 0) return 0;
    return 1 + static_cast<std::size_t>(i - 1) * n_th + static_cast<std::size_t>(wrap(j));
  }
  /// Inverse of index for non-pole nodes.
  std::pair<int, int> node(std::size_t k) const {
    if (k == 0) return {0, 0};
    return {static_cast<int>((k - 1) / n_th) + 1, static_cast<int>((k - 1) % n_th)};
  }

  DiskPoint disk_point(int i, int j) const { return geodesic_polar_to_disk(s(i), theta(j)); }

  bool operator==(const PolarGrid& o) const { return n_s == o.n_s && n_th == o.n_th && s_max == o.s_max; }
};

struct ScalarField {
  PolarGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const PolarGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  double& at(int i, int j) { return values[grid.index(i, j)]; }
  double at(int i, int j) const { return values[grid.index(i, j)]; }
  double pole() const { return values[0]; }
};

/// Field from a closure u(s, theta), evaluated at every node (pole at s = 0).
template <class F>
ScalarField sample_field(const PolarGrid& g, F&& u) {
  ScalarField f(g);
  f.values[0] = u(0.0, 0.0);
  for (int i = 1; i <= g.n_s; ++i)
    for (int j = 0; j < g.n_th; ++j) f.at(i, j) = u(g.s(i), g.theta(j));
  return f;
}

// ---------------------------------------------------------------------------
// Pole fit

/// Quadratic fit u ~ c + g.y + y^T Q y / 2 in geodesic normal coordinates
/// y = s (cos theta, sin theta), over the pole and rings 1 and 2.
struct PoleFit {
  double c = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
};

/// Rows of the least-squares pseudo-inverse: coefficient k of the fit equals
/// weights.row(k) dot (pole, ring 1, ring 2). Coefficients are
/// (c, g_x, g_y, Q_xx, Q_xy, Q_yy).
inline Eigen::MatrixXd pole_fit_weights(const PolarGrid& g) {
  const int n = 1 + 2 * g.n_th;
  Eigen::MatrixXd A(n, 6);
  A.row(0) << 1.0, 0.0, 0.0, 0.0, 0.0, 0.0;
  for (int i = 1; i <= 2; ++i)
    for (int j = 0; j < g.n_th; ++j) {
      const double x = g.s(i) * std::cos(g.theta(j)), y = g.s(i) * std::sin(g.theta(j));
      A.row(1 + (i - 1) * g.n_th + j) << 1.0, x, y, 0.5 * x * x, x * y, 0.5 * y * y;
    }
  return A.completeOrthogonalDecomposition().pseudoInverse();
}

inline PoleFit pole_fit(const ScalarField& f, const Eigen::MatrixXd& W) {
  const auto& g = f.grid;
  Eigen::VectorXd v(1 + 2 * g.n_th);
  v[0] = f.pole();
  for (int i = 1; i <= 2; ++i)
    for (int j = 0; j < g.n_th; ++j) v[1 + (i - 1) * g.n_th + j] = f.at(i, j);
  const Eigen::VectorXd c = W * v;
  PoleFit p;
  p.c = c[0];
  p.g << c[1], c[2];
  p.Q << c[3], c[4], c[4], c[5];
  return p;
}

inline PoleFit pole_fit(const ScalarField& f) { return pole_fit(f, pole_fit_weights(f.grid)); }

/// Jet at the pole in the Poincare chart (x = 0): y = 2x + O(|x|^3).
inline Jet pole_jet_poincare(const PoleFit& p) { return Jet{p.c, 2.0 * p.g, 4.0 * p.Q}; }

// ---------------------------------------------------------------------------
// Discrete jets

/// Partials (u_s, u_theta) and second partials at ring node (i, j), i >= 1:
/// centered differences, one-sided second order on the boundary ring.
inline Jet polar_jet(const ScalarField& f, int i, int j) {
  const auto& g = f.grid;
  if (i < 1 || i > g.n_s) throw UsageError("polar_jet: ring index out of range");
  const double ds = g.ds(), dt = g.dth();
  Jet jet;
  jet.u = f.at(i, j);
  jet.du.resize(2);
  jet.ddu.resize(2, 2);
  double us, uss, ust;
  if (i < g.n_s) {
    const double up = f.at(i + 1, j), um = f.at(i - 1, j);
    us = (up - um) / (2.0 * ds);
    uss = (up - 2.0 * jet.u + um) / (ds * ds);
    ust = (f.at(i + 1, j + 1) - f.at(i + 1, j - 1) - f.at(i - 1, j + 1) + f.at(i - 1, j - 1)) / (4.0 * ds * dt);
  } else {
    const double u1 = f.at(i - 1, j), u2 = f.at(i - 2, j), u3 = f.at(i - 3, j);
    us = (3.0 * jet.u - 4.0 * u1 + u2) / (2.0 * ds);
    uss = (2.0 * jet.u - 5.0 * u1 + 4.0 * u2 - u3) / (ds * ds);
    auto ut = [&](int ii) { return (f.at(ii, j + 1) - f.at(ii, j - 1)) / (2.0 * dt); };
    ust = (3.0 * ut(i) - 4.0 * ut(i - 1) + ut(i - 2)) / (2.0 * ds);
  }
  const double ut = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * dt);
  const double utt = (f.at(i, j + 1) - 2.0 * jet.u + f.at(i, j - 1)) / (dt * dt);
  jet.du << us, ut;
  jet.ddu << uss, ust, ust, utt;
  return jet;
}

/// Converts a geodesic-polar jet at (s, theta), s > 0, into Poincare-disk
/// Cartesian partials.
inline Jet polar_to_poincare_jet(const Jet& pj, double s, double theta) {
  const double rho = std::tanh(0.5 * s);
  const double d1 = 2.0 / (1.0 - rho * rho);                      // ds/drho
  const double d2 = 4.0 * rho / ((1.0 - rho * rho) * (1.0 - rho * rho));  // d2s/drho2
  const double Us = pj.du[0], Ut = pj.du[1];
  const double Uss = pj.ddu(0, 0), Ust = pj.ddu(0, 1), Utt = pj.ddu(1, 1);
  const double Ur = Us * d1;
  const double Urr = Uss * d1 * d1 + Us * d2;
  const double Urt = Ust * d1;
  const Eigen::Vector2d er(std::cos(theta), std::sin(theta)), et(-std::sin(theta), std::cos(theta));
  Jet out;
  out.u = pj.u;
  out.du = Ur * er + (Ut / rho) * et;
  const double mixed = Urt / rho - Ut / (rho * rho);
  out.ddu = Urr * er * er.transpose() + mixed * (er * et.transpose() + et * er.transpose()) +
            (Utt / (rho * rho) + Ur / rho) * et * et.transpose();
  return out;
}

/// |Du|_h from centered node slopes, used for tilt reports. Pole uses the fit.
inline double node_grad_norm(const ScalarField& f, int i, int j, const PoleFit* pf = nullptr) {
  if (i == 0) {
    const PoleFit p = pf ? *pf : pole_fit(f);
    return p.g.norm();
  }
  const Jet jet = polar_jet(f, i, j);
  const double sh = std::sinh(f.grid.s(i));
  return std::hypot(jet.du[0], jet.du[1] / sh);
}

/// Linear interpolation in s and periodic linear interpolation in theta.
inline double interpolate(const ScalarField& f, double s, double theta) {
  const auto& g = f.grid;
  if (s < 0.0 || s > g.s_max * (1.0 + 1e-12)) throw DomainError("interpolate: s outside the grid ball");
  const double x = std::min(s / g.ds(), static_cast<double>(g.n_s));
  int i = static_cast<int>(std::floor(x));
  if (i >= g.n_s) i = g.n_s - 1;
  const double a = x - i;
  double t = theta / g.dth();
  t -= std::floor(t / g.n_th) * g.n_th;
  const int j = static_cast<int>(std::floor(t));
  const double b = t - j;
  auto ring = [&](int ii) { return ii == 0 ? f.pole() : (1.0 - b) * f.at(ii, j) + b * f.at(ii, j + 1); };
  return (1.0 - a) * ring(i) + a * ring(i + 1);
}

/// Curvature of the discrete graph at a node: polar chart on rings, the
/// Poincare chart through the pole fit at the pole.
inline CurvatureSample field_curvature(const ScalarField& f, int i, int j) {
  if (i == 0) return radial_curvature(PoincareChart(2), Eigen::VectorXd::Zero(2), pole_jet_poincare(pole_fit(f)));
  Eigen::VectorXd p(2);
  p << f.grid.s(i), f.grid.theta(j);
  return radial_curvature(PolarChart(), p, polar_jet(f, i, j));
}

/// Height samples of every node for the sandwich check.
inline std::vector<HeightSample> sample_heights(const ScalarField& f) {
  std::vector<HeightSample> out;
  out.reserve(f.values.size());
  const PoleFit pf = pole_fit(f);
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const auto [i, j] = f.grid.node(k);
    std::ostringstream os;
    os << "node (" << i << ", " << j << ")";
    out.push_back({f.values[k], node_grad_norm(f, i, j, &pf), os.str()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// IO

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_field_text(std::ostream& os, const ScalarField& f) {
  os << "m 2\n"
     << "n_s " << f.grid.n_s << "\n"
     << "n_th " << f.grid.n_th << "\n"
     << "s_max " << format_double(f.grid.s_max) << "\n";
  for (double v : f.values) os << format_double(v) << "\n";
}

inline nlohmann::json field_to_json(const ScalarField& f) {
  return {{"m", 2}, {"n_s", f.grid.n_s}, {"n_th", f.grid.n_th}, {"s_max", f.grid.s_max}, {"values", f.values}};
}

inline ScalarField field_from_json(const nlohmann::json& j) {
  try {
    if (j.at("m").get<int>() != 2) throw UsageError("field: only m = 2 grids are supported");
    ScalarField f(PolarGrid(j.at("n_s").get<int>(), j.at("n_th").get<int>(), j.at("s_max").get<double>()));
    f.values = j.at("values").get<std::vector<double>>();
    if (f.values.size() != f.grid.size())
      throw UsageError("field: expected " + std::to_string(f.grid.size()) + " values, got " + std::to_string(f.values.size()));
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("field: malformed JSON: ") + e.what());
  }
}

inline ScalarField read_field_text(std::istream& is) {
  std::string key;
  int m = 0, ns = 0, nth = 0;
  double smax = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (!(is >> key)) throw UsageError("field: truncated header");
    if (key == "m") is >> m;
    else if (key == "n_s") is >> ns;
    else if (key == "n_th") is >> nth;
    else if (key == "s_max") is >> smax;
    else throw UsageError("field: unknown header key '" + key + "'");
    if (!is) throw UsageError("field: bad header value for '" + key + "'");
  }
  if (m != 2) throw UsageError("field: only m = 2 grids are supported");
  ScalarField f(PolarGrid(ns, nth, smax));
  for (auto& v : f.values)
    if (!(is >> v)) throw UsageError("field: expected " + std::to_string(f.grid.size()) + " values");
  std::string extra;
  if (is >> extra) throw UsageError("field: trailing data after values");
  return f;
}

inline void write_field(const std::string& path, const ScalarField& f, bool json = false) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  if (json) os << field_to_json(f).dump(1) << "\n";
  else write_field_text(os, f);
  if (!os) throw IoError("write failed for " + path);
}

inline ScalarField read_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  is >> std::ws;
  if (is.peek() == '{') {
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("field " + path + ": " + e.what());
    }
    return field_from_json(j);
  }
  return read_field_text(is);
}

}  // namespace lpmc
