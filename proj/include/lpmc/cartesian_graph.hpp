#pragma once

// Entire spacelike graphs x -> (f(x), x) over R^m: curvature kernels,
// sampled fields on boxes, the ALC decay diagnostic and resampling of radial
// graphs into the Cartesian presentation.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lpmc/errors.hpp"
#include "lpmc/lorentz.hpp"
#include "lpmc/parallel.hpp"
#include "lpmc/polar_grid.hpp"
#include "lpmc/prescribed_curvature.hpp"
#include "lpmc/radial_graph.hpp"

namespace lpmc {

struct CartesianJet {
  double f = 0.0;
  Eigen::VectorXd df;
  Eigen::MatrixXd ddf;
};

/// phi = (1 - |grad f|^2)^{-1/2} = -<N, E0>.
inline double tilt_cartesian(const Eigen::VectorXd& grad_f) {
  const double n2 = grad_f.squaredNorm();
  if (!(n2 < 1.0)) {
    std::ostringstream os;
    os << "tilt_cartesian: |grad f| = " << std::sqrt(n2) << " >= 1";
    throw NotSpacelikeError(os.str());
  }
  return 1.0 / std::sqrt(1.0 - n2);
}

/// dv_g / dx = phi^{-1}.
inline double volume_element(double phi) { return 1.0 / phi; }

/// Graph metric g = delta - df df^T and its inverse delta + phi^2 df df^T.
inline GraphMetric cartesian_metric(const Eigen::VectorXd& df) {
  const double phi = tilt_cartesian(df);
  const auto m = df.size();
  GraphMetric gm;
  gm.g = Eigen::MatrixXd::Identity(m, m) - df * df.transpose();
  gm.ginv = Eigen::MatrixXd::Identity(m, m) + phi * phi * df * df.transpose();
  return gm;
}

/// N = phi (E0 + grad f), II = phi Hess f, H = tr(g^{-1} II)/m, K = det(g^{-1} II).
inline CurvatureSample curvature_cartesian(const CartesianJet& jet) {
  const auto m = jet.df.size();
  CurvatureSample cs;
  cs.w = tilt_cartesian(jet.df);
  Eigen::VectorXd n(m + 1);
  n[0] = cs.w;
  n.tail(m) = cs.w * jet.df;
  cs.N = LorentzVec(n);
  cs.II = cs.w * 0.5 * (jet.ddf + jet.ddf.transpose());
  const GraphMetric gm = cartesian_metric(jet.df);
  cs.H = gm.ginv.cwiseProduct(cs.II).sum() / static_cast<double>(m);
  cs.K = (gm.ginv * cs.II).determinant();
  cs.principal = principal_curvatures(gm.g, cs.II);
  return cs;
}

// ---------------------------------------------------------------------------
// Closed-form surfaces

struct AnalyticSurface {
  int m = 2;
  std::function<CartesianJet(const Eigen::VectorXd&)> jet_fn;
  /// Radial profile f(r) and f'(r) for rotationally symmetric surfaces.
  std::function<std::pair<double, double>(double)> profile;
  std::string name;

  bool radial() const { return static_cast<bool>(profile); }
  CartesianJet jet(const Eigen::VectorXd& x) const { return jet_fn(x); }
  double value(const Eigen::VectorXd& x) const { return jet_fn(x).f; }
  CurvatureSample curvature(const Eigen::VectorXd& x) const { return curvature_cartesian(jet_fn(x)); }
};

/// f = sqrt(l^2 + |x|^2) + eps g(x); g and its derivatives supplied by the caller.
inline AnalyticSurface hyperboloid_plus(int m, double l, std::function<CartesianJet(const Eigen::VectorXd&)> extra,
                                        std::function<std::pair<double, double>(double)> extra_profile, std::string name) {
  if (m < 1) throw UsageError("surface: dimension must be positive");
  if (!(l > 0.0)) throw UsageError("surface: l must be positive");
  AnalyticSurface s;
  s.m = m;
  s.name = std::move(name);
  s.jet_fn = [m, l, extra](const Eigen::VectorXd& x) {
    if (x.size() != m) throw UsageError("surface: point dimension mismatch");
    const double f = std::sqrt(l * l + x.squaredNorm());
    CartesianJet j{f, x / f, (Eigen::MatrixXd::Identity(m, m) - x * x.transpose() / (f * f)) / f};
    if (extra) {
      const CartesianJet e = extra(x);
      j.f += e.f;
      j.df += e.df;
      j.ddf += e.ddf;
    }
    return j;
  };
  if (extra_profile || !extra)
    s.profile = [l, extra_profile](double r) {
      const double f = std::sqrt(l * l + r * r);
      std::pair<double, double> p{f, r / f};
      if (extra_profile) {
        const auto e = extra_profile(r);
        p.first += e.first;
        p.second += e.second;
      }
      return p;
    };
  return s;
}

inline AnalyticSurface hyperboloid_surface(int m, double l = 1.0) {
  std::ostringstream os;
  os << "hyperboloid:l=" << l;
  return hyperboloid_plus(m, l, nullptr, nullptr, os.str());
}

/// Hyperboloid plus eps exp(-|x|^2 / width^2).
inline AnalyticSurface perturbed_hyperboloid(int m, double eps, double width = 1.0, double l = 1.0) {
  if (!(width > 0.0)) throw UsageError("perturbed: width must be positive");
  const double c = 1.0 / (width * width);
  auto bump = [m, eps, c](const Eigen::VectorXd& x) {
    const double e = eps * std::exp(-c * x.squaredNorm());
    return CartesianJet{e, -2.0 * c * e * x,
                        e * (4.0 * c * c * x * x.transpose() - 2.0 * c * Eigen::MatrixXd::Identity(m, m))};
  };
  auto bump_profile = [eps, c](double r) {
    const double e = eps * std::exp(-c * r * r);
    return std::pair<double, double>{e, -2.0 * c * r * e};
  };
  std::ostringstream os;
  os << "perturbed:eps=" << eps << ",width=" << width << ",l=" << l;
  return hyperboloid_plus(m, l, bump, bump_profile, os.str());
}

/// Hyperboloid plus eps (x_0^2 - x_1^2) exp(-|x|^2 / width^2): a saddle
/// region around the origin when eps is large enough.
inline AnalyticSurface saddle_surface(int m, double eps = 0.6, double width = 0.5, double l = 1.0) {
  if (m < 2) throw UsageError("saddle: needs m >= 2");
  const double c = 1.0 / (width * width);
  auto extra = [m, eps, c](const Eigen::VectorXd& x) {
    const double q = x[0] * x[0] - x[1] * x[1];
    const double e = std::exp(-c * x.squaredNorm());
    Eigen::VectorXd dq = Eigen::VectorXd::Zero(m);
    dq[0] = 2.0 * x[0];
    dq[1] = -2.0 * x[1];
    Eigen::MatrixXd ddq = Eigen::MatrixXd::Zero(m, m);
    ddq(0, 0) = 2.0;
    ddq(1, 1) = -2.0;
    const Eigen::VectorXd de = -2.0 * c * e * x;
    const Eigen::MatrixXd dde = e * (4.0 * c * c * x * x.transpose() - 2.0 * c * Eigen::MatrixXd::Identity(m, m));
    return CartesianJet{eps * q * e, eps * (dq * e + q * de),
                        eps * (ddq * e + dq * de.transpose() + de * dq.transpose() + q * dde)};
  };
  std::ostringstream os;
  os << "saddle:eps=" << eps << ",width=" << width << ",l=" << l;
  return hyperboloid_plus(m, l, extra, nullptr, os.str());
}

/// f = c + a.x with |a| < 1.
inline AnalyticSurface affine_surface(const Eigen::VectorXd& a, double c = 0.0) {
  if (!(a.norm() < 1.0)) throw NotSpacelikeError("affine: |slope| must be < 1");
  AnalyticSurface s;
  s.m = static_cast<int>(a.size());
  s.jet_fn = [a, c](const Eigen::VectorXd& x) {
    return CartesianJet{c + a.dot(x), a, Eigen::MatrixXd::Zero(a.size(), a.size())};
  };
  std::ostringstream os;
  os << "affine:|a|=" << a.norm();
  s.name = os.str();
  return s;
}

/// Parses hyperboloid[:l=], perturbed[:eps=,width=,l=], saddle[:eps=,width=,l=], affine[:a=,c=].
inline AnalyticSurface parse_surface(const std::string& spec, int m) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const auto opts = parse_options(colon == std::string::npos ? "" : spec.substr(colon + 1), kind);
  auto get = [&](const std::string& k, double def) {
    const auto it = opts.find(k);
    return it == opts.end() ? def : parse_real(it->second, kind + " " + k);
  };
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : opts)
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        throw UsageError(kind + ": unknown option '" + k + "'");
  };
  if (kind == "hyperboloid") {
    allow({"l"});
    return hyperboloid_surface(m, get("l", 1.0));
  }
  if (kind == "perturbed") {
    allow({"eps", "width", "l"});
    return perturbed_hyperboloid(m, get("eps", 0.05), get("width", 1.0), get("l", 1.0));
  }
  if (kind == "saddle") {
    allow({"eps", "width", "l"});
    return saddle_surface(m, get("eps", 0.6), get("width", 0.5), get("l", 1.0));
  }
  if (kind == "affine") {
    allow({"a", "c"});
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
    a[0] = get("a", 0.5);
    return affine_surface(a, get("c", 0.0));
  }
  throw UsageError("unknown surface '" + spec + "' (expected hyperboloid, perturbed, saddle or affine)");
}

// ---------------------------------------------------------------------------
// Box grids and fields

struct BoxGrid {
  int m = 2;
  std::vector<double> R;  // half-extent per axis
  std::vector<int> n;     // nodes per axis, including both ends

  BoxGrid() = default;
  BoxGrid(int dim, double r, int nodes) : m(dim), R(dim, r), n(dim, nodes) { validate(); }
  BoxGrid(std::vector<double> r, std::vector<int> nodes) : m(static_cast<int>(r.size())), R(std::move(r)), n(std::move(nodes)) {
    validate();
  }

  void validate() const {
    if (m < 1 || static_cast<int>(R.size()) != m || static_cast<int>(n.size()) != m)
      throw UsageError("BoxGrid: extents and node counts must match the dimension");
    for (int a = 0; a < m; ++a) {
      if (!(R[a] > 0.0) || !std::isfinite(R[a])) throw UsageError("BoxGrid: R must be positive");
      if (n[a] < 3) throw UsageError("BoxGrid: need at least 3 nodes per axis");
    }
  }

  double spacing(int a) const { return 2.0 * R[a] / (n[a] - 1); }
  std::size_t size() const {
    std::size_t s = 1;
    for (int v : n) s *= static_cast<std::size_t>(v);
    return s;
  }
  /// Row-major multi-index (last axis fastest).
  std::vector<int> multi(std::size_t k) const {
    std::vector<int> idx(m);
    for (int a = m - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(k % n[a]);
      k /= n[a];
    }
    return idx;
  }
  std::size_t linear(const std::vector<int>& idx) const {
    std::size_t k = 0;
    for (int a = 0; a < m; ++a) k = k * n[a] + static_cast<std::size_t>(idx[a]);
    return k;
  }
  Eigen::VectorXd coord(const std::vector<int>& idx) const {
    Eigen::VectorXd x(m);
    for (int a = 0; a < m; ++a) x[a] = -R[a] + idx[a] * spacing(a);
    return x;
  }
  Eigen::VectorXd coord(std::size_t k) const { return coord(multi(k)); }
  bool interior(const std::vector<int>& idx) const {
    for (int a = 0; a < m; ++a)
      if (idx[a] <= 0 || idx[a] >= n[a] - 1) return false;
    return true;
  }
  bool operator==(const BoxGrid& o) const { return m == o.m && R == o.R && n == o.n; }
};

struct CartesianField {
  BoxGrid grid;
  std::vector<double> values;
  double margin = 1e-3;

  CartesianField() = default;
  explicit CartesianField(const BoxGrid& g) : grid(g), values(g.size(), 0.0) {}
};

inline CartesianField sample_cartesian(const BoxGrid& g, const std::function<double(const Eigen::VectorXd&)>& f) {
  CartesianField out(g);
  parallel_for(g.size(), [&](std::size_t k) { out.values[k] = f(g.coord(k)); });
  return out;
}

inline CartesianField sample_cartesian(const BoxGrid& g, const AnalyticSurface& s) {
  return sample_cartesian(g, std::function<double(const Eigen::VectorXd&)>([&](const Eigen::VectorXd& x) { return s.value(x); }));
}

/// Centered second-order jet at an interior node.
inline CartesianJet field_jet(const CartesianField& f, const std::vector<int>& idx) {
  const auto& g = f.grid;
  if (!g.interior(idx)) throw DomainError("field_jet: node on the boundary");
  const int m = g.m;
  CartesianJet j;
  j.f = f.values[g.linear(idx)];
  j.df.resize(m);
  j.ddf.resize(m, m);
  auto at = [&](int a, int da, int b, int db) {
    std::vector<int> k = idx;
    k[a] += da;
    k[b] += db;
    return f.values[g.linear(k)];
  };
  for (int a = 0; a < m; ++a) {
    const double h = g.spacing(a);
    j.df[a] = (at(a, 1, a, 0) - at(a, -1, a, 0)) / (2.0 * h);
    j.ddf(a, a) = (at(a, 1, a, 0) - 2.0 * j.f + at(a, -1, a, 0)) / (h * h);
    for (int b = 0; b < a; ++b) {
      const double hb = g.spacing(b);
      j.ddf(a, b) = j.ddf(b, a) = (at(a, 1, b, 1) - at(a, 1, b, -1) - at(a, -1, b, 1) + at(a, -1, b, -1)) / (4.0 * h * hb);
    }
  }
  return j;
}

/// Largest discrete |grad f| over interior nodes.
inline double max_discrete_gradient(const CartesianField& f) {
  return parallel_max(f.grid.size(), [&](std::size_t k) {
    const auto idx = f.grid.multi(k);
    if (!f.grid.interior(idx)) return 0.0;
    return field_jet(f, idx).df.norm();
  });
}

inline void check_spacelike(const CartesianField& f) {
  const double g = max_discrete_gradient(f);
  if (!(g <= 1.0 - f.margin)) {
    std::ostringstream os;
    os << "field not spacelike: max |grad f| = " << g << " exceeds 1 - margin = " << 1.0 - f.margin;
    throw NotSpacelikeError(os.str());
  }
}

/// Fraction of random node pairs with |f(x) - f(y)| < |x - y|.
inline double lipschitz_pair_fraction(const CartesianField& f, std::size_t pairs, unsigned seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, f.grid.size() - 1);
  std::size_t ok = 0, tried = 0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t a = pick(rng), b = pick(rng);
    if (a == b) continue;
    ++tried;
    if (std::abs(f.values[a] - f.values[b]) < (f.grid.coord(a) - f.grid.coord(b)).norm()) ++ok;
  }
  return tried == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(tried);
}

// IO: header "m", "R r_1 .. r_m", "n n_1 .. n_m", then row-major values.

inline void write_cartesian_field(const std::string& path, const CartesianField& f, bool json = false) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  if (json) {
    os << nlohmann::json{{"m", f.grid.m}, {"R", f.grid.R}, {"n", f.grid.n}, {"values", f.values}}.dump(1) << "\n";
  } else {
    os << "m " << f.grid.m << "\nR";
    for (double r : f.grid.R) os << " " << format_double(r);
    os << "\nn";
    for (int v : f.grid.n) os << " " << v;
    os << "\n";
    for (double v : f.values) os << format_double(v) << "\n";
  }
  if (!os) throw IoError("write failed for " + path);
}

inline CartesianField read_cartesian_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path);
  is >> std::ws;
  CartesianField f;
  if (is.peek() == '{') {
    try {
      nlohmann::json j;
      is >> j;
      const int m = j.at("m").get<int>();
      f = CartesianField(BoxGrid(j.at("R").get<std::vector<double>>(), j.at("n").get<std::vector<int>>()));
      if (f.grid.m != m) throw UsageError("cartesian field: dimension mismatch");
      f.values = j.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("cartesian field " + path + ": " + e.what());
    }
  } else {
    std::string key;
    int m = 0;
    if (!(is >> key >> m) || key != "m" || m < 1) throw UsageError("cartesian field " + path + ": bad 'm' header");
    std::vector<double> R(m);
    std::vector<int> n(m);
    if (!(is >> key) || key != "R") throw UsageError("cartesian field " + path + ": missing 'R' header");
    for (auto& r : R)
      if (!(is >> r)) throw UsageError("cartesian field " + path + ": bad R");
    if (!(is >> key) || key != "n") throw UsageError("cartesian field " + path + ": missing 'n' header");
    for (auto& v : n)
      if (!(is >> v)) throw UsageError("cartesian field " + path + ": bad n");
    f = CartesianField(BoxGrid(R, n));
    for (auto& v : f.values)
      if (!(is >> v)) throw UsageError("cartesian field " + path + ": expected " + std::to_string(f.grid.size()) + " values");
    std::string extra;
    if (is >> extra) throw UsageError("cartesian field " + path + ": trailing data");
  }
  if (f.values.size() != f.grid.size()) throw UsageError("cartesian field " + path + ": value count mismatch");
  return f;
}

// ---------------------------------------------------------------------------
// ALC decay

struct AlcDecayOptions {
  double r_min = 0.0;   // shells below r_min are reported but not judged
  double tol = 1e-3;    // |limit| <= tol for an ALC verdict
  int fit_shells = 0;   // outer shells used for the limit fit (0: a fifth, at least 4)
};

struct AlcDecayReport {
  std::vector<double> shell_r;      // inner radius of each shell
  std::vector<double> sup_residual; // sup of f(x) - |x| over the shell
  std::vector<double> r_at_sup;     // |x| at the maximizing node
  bool monotone_decreasing = false;
  double limit = 0.0;               // extrapolated shell supremum as r -> infinity
  bool alc = false;
};

/// Shell suprema of f(x) - |x| with shell width one grid spacing, over shells
/// inside the inscribed ball of the box. The limit is the intercept of a
/// least-squares line in 1/r through the outer shells.
inline AlcDecayReport alc_decay_check(const CartesianField& f, const AlcDecayOptions& opt = {}) {
  const auto& g = f.grid;
  double dr = std::numeric_limits<double>::infinity(), rin = dr;
  for (int a = 0; a < g.m; ++a) {
    dr = std::min(dr, g.spacing(a));
    rin = std::min(rin, g.R[a]);
  }
  const int n_shells = static_cast<int>(std::floor(rin / dr + 1e-9));
  if (n_shells < 2) throw UsageError("alc_decay_check: box too coarse for two shells");
  AlcDecayReport rep;
  rep.sup_residual.assign(n_shells, -std::numeric_limits<double>::infinity());
  rep.r_at_sup.assign(n_shells, 0.0);
  for (int k = 0; k < n_shells; ++k) rep.shell_r.push_back(k * dr);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Eigen::VectorXd x = g.coord(k);
    const double r = x.norm();
    const double d = f.values[k] - r;
    if (!(d > 0.0)) {
      std::ostringstream os;
      os << "alc_decay_check: f <= |x| at x = (" << x.transpose() << "), the graph leaves I+(0)";
      throw DomainError(os.str());
    }
    const int s = static_cast<int>(std::floor(r / dr));
    if (s >= n_shells) continue;
    if (d > rep.sup_residual[s]) {
      rep.sup_residual[s] = d;
      rep.r_at_sup[s] = r;
    }
  }
  rep.monotone_decreasing = true;
  for (int k = 1; k < n_shells; ++k) {
    if (rep.shell_r[k - 1] < opt.r_min) continue;
    if (rep.sup_residual[k] > rep.sup_residual[k - 1] * (1.0 + 1e-12)) rep.monotone_decreasing = false;
  }
  const int nf = std::clamp(opt.fit_shells > 0 ? opt.fit_shells : std::max(4, n_shells / 5), 2, n_shells - 1);
  Eigen::MatrixXd A(nf, 2);
  Eigen::VectorXd y(nf);
  for (int k = 0; k < nf; ++k) {
    const int s = n_shells - nf + k;
    A(k, 0) = 1.0;
    A(k, 1) = 1.0 / std::max(rep.r_at_sup[s], dr);
    y[k] = rep.sup_residual[s];
  }
  rep.limit = A.colPivHouseholderQr().solve(y)[0];
  rep.alc = rep.monotone_decreasing && std::abs(rep.limit) <= opt.tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Radial -> Cartesian

/// Resamples the radial graph {q e^{U(q)}} over a box: per node x the
/// height f solves ln l(f, x) = U(q(f, x)) on the vertical line, by
/// bisection (the line crosses the graph once by spacelikeness).
/// `s_limit` is the hyperbolic radius of the sampled domain of U.
inline CartesianField radial_to_cartesian(const std::function<double(const LorentzVec&)>& U, const BoxGrid& g,
                                          double s_limit = 30.0, double tol = 1e-12) {
  CartesianField out(g);
  const double C = std::cosh(s_limit);
  parallel_for(g.size(), [&](std::size_t k) {
    const Eigen::VectorXd x = g.coord(k);
    const double r = x.norm();
    auto miss = [&](double t) {
      const double l = std::sqrt(t * t - r * r);
      Eigen::VectorXd c(g.m + 1);
      c[0] = t / l;
      c.tail(g.m) = x / l;
      return std::log(l) - U(LorentzVec(c));
    };
    // lowest admissible t: hyperbolic radius s_limit along the line
    double lo = r > 0.0 ? C * r / std::sqrt(C * C - 1.0) : 0.0;
    if (r == 0.0) lo = std::exp(-40.0);
    lo = std::max(lo, r * (1.0 + 1e-15) + 1e-300);
    if (miss(lo) >= 0.0) throw DomainError("radial_to_cartesian: vertical line misses the sampled domain");
    double hi = std::max(2.0 * lo, lo + 1.0);
    for (int it = 0; miss(hi) <= 0.0; ++it) {
      if (it > 200) throw DomainError("radial_to_cartesian: no crossing on the vertical line");
      hi = 2.0 * hi;
    }
    while (hi - lo > tol * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      (miss(mid) < 0.0 ? lo : hi) = mid;
    }
    out.values[k] = 0.5 * (lo + hi);
  });
  return out;
}

template <class Chart>
CartesianField radial_to_cartesian(const AnalyticGraph<Chart>& graph, const BoxGrid& g, double s_limit = 30.0) {
  if constexpr (std::is_same_v<Chart, PoincareChart>) {
    return radial_to_cartesian(
        [&](const LorentzVec& q) { return graph.value(q.c.tail(q.c.size() - 1) / (1.0 + q.c[0])); }, g, s_limit);
  } else {
    return radial_to_cartesian(
        [&](const LorentzVec& q) {
          Eigen::VectorXd p(2);
          p << std::acosh(std::max(1.0, q[0])), std::atan2(q[2], q[1]);
          return graph.value(p);
        },
        g, s_limit);
  }
}

inline CartesianField radial_to_cartesian(const ScalarField& u, const BoxGrid& g) {
  if (g.m != 2) throw UsageError("radial_to_cartesian: polar fields are two dimensional");
  return radial_to_cartesian(
      [&](const LorentzVec& q) { return interpolate(u, std::acosh(std::max(1.0, q[0])), std::atan2(q[2], q[1])); }, g,
      u.grid.s_max);
}

}  // namespace lpmc
