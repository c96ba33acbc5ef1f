#pragma once

// Curvature integrals over spacelike graphs: the Willmore-type functional,
// the local Gauss-map estimate, L^p growth series and the Sigma+ mask.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "lpmc/cartesian_graph.hpp"
#include "lpmc/errors.hpp"
#include "lpmc/parallel.hpp"
#include "lpmc/radial_graph.hpp"

namespace lpmc {

/// |B^m| = pi^{m/2} / Gamma(m/2 + 1).
inline double unit_ball_volume(int m) { return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0); }

/// |S^{m-1}| = m |B^m|.
inline double unit_sphere_area(int m) { return m * unit_ball_volume(m); }

/// Positive definiteness of the shape operator (strict).
inline bool in_sigma_plus(const CurvatureSample& c) { return c.principal.size() > 0 && c.principal.minCoeff() > 0.0; }

inline std::vector<bool> sigma_plus_mask(const std::vector<CurvatureSample>& samples) {
  std::vector<bool> mask(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) mask[k] = in_sigma_plus(samples[k]);
  return mask;
}

/// Integrals over a region of the graph, all with respect to dv.
struct BallMoments {
  double area = 0.0;        // |B|
  double lp = 0.0;          // int |H|^p dv
  double hm = 0.0;          // int |H|^m dv
  double gauss_plus = 0.0;  // int_{B+} K dv
  double willmore = 0.0;    // int |H|^m phi^{-m-1} dv
  double plus_area = 0.0;   // |B+|

  BallMoments& operator+=(const BallMoments& o) {
    area += o.area;
    lp += o.lp;
    hm += o.hm;
    gauss_plus += o.gauss_plus;
    willmore += o.willmore;
    plus_area += o.plus_area;
    return *this;
  }
  BallMoments scaled(double s) const { return {area * s, lp * s, hm * s, gauss_plus * s, willmore * s, plus_area * s}; }
  /// Componentwise |a - b|.
  static BallMoments gap(const BallMoments& a, const BallMoments& b) {
    return {std::abs(a.area - b.area), std::abs(a.lp - b.lp),         std::abs(a.hm - b.hm),
            std::abs(a.gauss_plus - b.gauss_plus), std::abs(a.willmore - b.willmore), std::abs(a.plus_area - b.plus_area)};
  }
};

/// Integrand contributions at one point, weighted by dx.
inline BallMoments point_moments(const CurvatureSample& c, int m, double p, double dx) {
  const double dv = dx * volume_element(c.w);
  const double h = std::abs(c.H);
  const double hm = std::pow(h, m);
  BallMoments b;
  b.area = dv;
  b.lp = std::pow(h, p) * dv;
  b.hm = hm * dv;
  b.willmore = hm * std::pow(c.w, -(m + 1)) * dv;
  if (in_sigma_plus(c)) {
    b.gauss_plus = c.K * dv;
    b.plus_area = dv;
  }
  return b;
}

// ---------------------------------------------------------------------------
// Quadrature on Euclidean balls for closed-form surfaces

struct BallQuadrature {
  int n_r = 1024;   // Simpson panels in xi, r = sinh(xi); even
  int n_ang = 24;   // angular nodes (m = 2) or Gauss-Legendre nodes in cos(theta) (m = 3)
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), w};
}

namespace detail {

/// int_{|x| <= R} of moments, r = sinh(xi) composite Simpson, spectral angular rule.
inline BallMoments ball_moments(const AnalyticSurface& s, double R, double p, int n_r, int n_ang) {
  const int m = s.m;
  if (m != 2 && m != 3) throw UsageError("curvature integrals need m in {2, 3}");
  if (n_r < 2 || n_r % 2) throw UsageError("BallQuadrature: n_r must be even and >= 2");
  if (n_ang < 4) throw UsageError("BallQuadrature: n_ang must be >= 4");
  const double xi_max = std::asinh(R);
  const double dxi = xi_max / n_r;
  std::vector<Eigen::VectorXd> dirs;
  std::vector<double> dw;
  if (m == 2) {
    for (int j = 0; j < n_ang; ++j) {
      const double a = 2.0 * std::numbers::pi * j / n_ang;
      dirs.push_back((Eigen::VectorXd(2) << std::cos(a), std::sin(a)).finished());
      dw.push_back(2.0 * std::numbers::pi / n_ang);
    }
  } else {
    const auto [mu, wmu] = gauss_legendre(n_ang);
    const int n_phi = 2 * n_ang;
    for (int i = 0; i < n_ang; ++i)
      for (int j = 0; j < n_phi; ++j) {
        const double a = 2.0 * std::numbers::pi * j / n_phi;
        const double st = std::sqrt(std::max(0.0, 1.0 - mu[i] * mu[i]));
        dirs.push_back((Eigen::VectorXd(3) << st * std::cos(a), st * std::sin(a), mu[i]).finished());
        dw.push_back(wmu[i] * 2.0 * std::numbers::pi / n_phi);
      }
  }
  std::vector<BallMoments> shell(static_cast<std::size_t>(n_r) + 1);
  parallel_for(shell.size(), [&](std::size_t i) {
    if (i == 0) return;  // r^{m-1} weight vanishes at the center
    const double xi = i * dxi;
    const double r = std::sinh(xi);
    const double jac = std::pow(r, m - 1) * std::cosh(xi);
    const double simpson = (i == static_cast<std::size_t>(n_r)) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    BallMoments acc;
    for (std::size_t d = 0; d < dirs.size(); ++d)
      acc += point_moments(s.curvature(r * dirs[d]), m, p, dw[d] * jac * simpson * dxi / 3.0);
    shell[i] = acc;
  });
  BallMoments total;
  for (const auto& b : shell) total += b;
  return total;
}

}  // namespace detail

/// Moments with a Richardson-type tolerance: |I(n) - I(n/2)| per component.
struct MomentsEstimate {
  BallMoments value;
  BallMoments tolerance;
};

inline MomentsEstimate ball_moments(const AnalyticSurface& s, double R, double p = 2.0, const BallQuadrature& q = {}) {
  if (!(R > 0.0)) throw UsageError("ball radius must be positive");
  MomentsEstimate e;
  e.value = detail::ball_moments(s, R, p, q.n_r, q.n_ang);
  const int half_r = std::max(2, (q.n_r / 2) & ~1);
  const BallMoments coarse = detail::ball_moments(s, R, p, half_r, std::max(4, q.n_ang / 2));
  e.tolerance = BallMoments::gap(e.value, coarse);
  return e;
}

/// Euclidean radius of the geodesic ball of radius rho about the origin on a
/// rotationally symmetric graph: int_0^r sqrt(1 - f'(s)^2) ds = rho.
inline double geodesic_to_euclidean_radius(const AnalyticSurface& s, double rho) {
  if (!s.radial()) throw UsageError("geodesic_to_euclidean_radius: surface is not rotationally symmetric");
  if (!(rho >= 0.0)) throw UsageError("geodesic radius must be nonnegative");
  // march in xi with r = sinh(xi), Simpson per step
  auto speed = [&](double xi) {
    const double fp = s.profile(std::sinh(xi)).second;
    if (!(std::abs(fp) < 1.0)) throw NotSpacelikeError("radial profile has |f'| >= 1");
    return std::sqrt(1.0 - fp * fp) * std::cosh(xi);
  };
  auto step_len = [&](double a, double b) { return (b - a) / 6.0 * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b)); };
  const double h = 1e-3;
  double xi = 0.0, len = 0.0;
  for (;;) {
    const double inc = step_len(xi, xi + h);
    if (len + inc >= rho) break;
    len += inc;
    xi += h;
    if (xi > 700.0) throw DomainError("geodesic ball radius exceeds the representable range");
  }
  double lo = xi, hi = xi + h;
  for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (len + step_len(xi, mid) < rho ? lo : hi) = mid;
  }
  return std::sinh(0.5 * (lo + hi));
}

// ---------------------------------------------------------------------------
// Grid samplings (discrete surfaces, or closed forms without symmetry)

struct SurfaceSampling {
  BoxGrid grid;
  std::vector<double> f;
  std::vector<CurvatureSample> curv;  // valid at interior nodes only
  std::vector<char> interior;
};

inline SurfaceSampling sample_surface(const CartesianField& field) {
  check_spacelike(field);
  SurfaceSampling s{field.grid, field.values, std::vector<CurvatureSample>(field.grid.size()),
                    std::vector<char>(field.grid.size(), 0)};
  parallel_for(field.grid.size(), [&](std::size_t k) {
    const auto idx = field.grid.multi(k);
    if (!field.grid.interior(idx)) return;
    s.interior[k] = 1;
    s.curv[k] = curvature_cartesian(field_jet(field, idx));
  });
  return s;
}

inline SurfaceSampling sample_surface(const AnalyticSurface& a, const BoxGrid& g) {
  if (a.m != g.m) throw UsageError("sample_surface: dimension mismatch");
  SurfaceSampling s{g, std::vector<double>(g.size()), std::vector<CurvatureSample>(g.size()), std::vector<char>(g.size(), 0)};
  parallel_for(g.size(), [&](std::size_t k) {
    const auto idx = g.multi(k);
    const Eigen::VectorXd x = g.coord(idx);
    const CartesianJet j = a.jet(x);
    s.f[k] = j.f;
    if (!g.interior(idx)) return;
    s.interior[k] = 1;
    s.curv[k] = curvature_cartesian(j);
  });
  return s;
}

/// Node nearest to the origin.
inline std::size_t center_node(const BoxGrid& g) {
  std::vector<int> idx(g.m);
  for (int a = 0; a < g.m; ++a) idx[a] = static_cast<int>(std::lround(g.R[a] / g.spacing(a)));
  return g.linear(idx);
}

/// Shortest-path distance from `source` on the grid graph. Neighbours are all
/// offsets in {-1,0,1}^m, plus the (1,2) knight moves when m = 2; the edge
/// length is the induced length sqrt(|dx|^2 - df^2) of the chord.
inline std::vector<double> geodesic_distances(const SurfaceSampling& s, std::size_t source) {
  const auto& g = s.grid;
  std::vector<std::vector<int>> offs;
  std::vector<int> o(g.m, -2);
  const int lim = g.m == 2 ? 2 : 1;
  std::function<void(int)> rec = [&](int a) {
    if (a == g.m) {
      int amax = 0, nz = 0, n2 = 0;
      for (int v : o) {
        amax = std::max(amax, std::abs(v));
        nz += v != 0;
        n2 += std::abs(v) == 2;
      }
      if (amax == 0) return;
      if (amax == 2 && !(g.m == 2 && nz == 2 && n2 == 1)) return;
      offs.push_back(o);
      return;
    }
    for (int v = -lim; v <= lim; ++v) {
      o[a] = v;
      rec(a + 1);
    }
  };
  rec(0);
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    const auto [d, k] = pq.top();
    pq.pop();
    if (d > dist[k]) continue;
    const auto idx = g.multi(k);
    for (const auto& off : offs) {
      std::vector<int> nb = idx;
      double dx2 = 0.0;
      bool inside = true;
      for (int a = 0; a < g.m; ++a) {
        nb[a] += off[a];
        if (nb[a] < 0 || nb[a] >= g.n[a]) inside = false;
        dx2 += std::pow(off[a] * g.spacing(a), 2);
      }
      if (!inside) continue;
      const std::size_t kn = g.linear(nb);
      const double df = s.f[kn] - s.f[k];
      const double len = std::sqrt(std::max(dx2 - df * df, 0.0));
      if (d + len < dist[kn]) {
        dist[kn] = d + len;
        pq.push({dist[kn], kn});
      }
    }
  }
  return dist;
}

namespace detail {

/// Trapezoid sum over interior nodes accepted by `in`, optionally on the stride-2 subgrid.
inline BallMoments grid_moments(const SurfaceSampling& s, double p, const std::function<bool(std::size_t)>& in, int stride) {
  const auto& g = s.grid;
  double cell = 1.0;
  for (int a = 0; a < g.m; ++a) cell *= g.spacing(a) * stride;
  const std::size_t c = center_node(g);
  const auto cidx = g.multi(c);
  std::vector<BallMoments> partial((g.size() + kChunk - 1) / kChunk);
  parallel_chunks(g.size(), [&](std::size_t b, std::size_t e, std::size_t chunk) {
    BallMoments acc;
    for (std::size_t k = b; k < e; ++k) {
      if (!s.interior[k] || !in(k)) continue;
      if (stride > 1) {
        const auto idx = g.multi(k);
        bool on = true;
        for (int a = 0; a < g.m; ++a) on = on && ((idx[a] - cidx[a]) % stride == 0);
        if (!on) continue;
      }
      acc += point_moments(s.curv[k], g.m, p, cell);
    }
    partial[chunk] = acc;
  });
  BallMoments total;
  for (const auto& b : partial) total += b;
  return total;
}

}  // namespace detail

/// Moments over the geodesic ball of radius rho about the center node.
/// Throws if the ball reaches the boundary ring of the grid.
inline MomentsEstimate geodesic_ball_moments(const SurfaceSampling& s, const std::vector<double>& dist, double rho, double p) {
  for (std::size_t k = 0; k < dist.size(); ++k)
    if (!s.interior[k] && dist[k] <= rho) throw DomainError("geodesic ball reaches the grid boundary; enlarge the grid");
  auto in = [&](std::size_t k) { return dist[k] <= rho; };
  MomentsEstimate e;
  e.value = detail::grid_moments(s, p, in, 1);
  e.tolerance = BallMoments::gap(e.value, detail::grid_moments(s, p, in, 2));
  return e;
}

// ---------------------------------------------------------------------------
// Willmore-type functional

struct WillmoreReport {
  int m = 2;
  double R = 0.0;
  double integral = 0.0;             // int_{|x| <= R} |H|^m phi^{-m-1} dv
  double lower_bound = 0.0;          // |B^m|
  double tail_estimate = 0.0;        // int_{|x| > R}; closed forms add an annulus quadrature before the r^{-m-2} model
  double quadrature_tolerance = 0.0;
  double sigma_plus_fraction = 0.0;  // |Sigma+ within |x| <= R| / |{|x| <= R}|, both in dv

  /// The inequality holds up to quadrature and truncation error.
  bool bound_holds() const { return integral + quadrature_tolerance + tail_estimate >= lower_bound; }
};

inline WillmoreReport willmore_integral(const AnalyticSurface& s, double R, const BallQuadrature& q = {}) {
  const MomentsEstimate e = ball_moments(s, R, static_cast<double>(s.m), q);
  WillmoreReport rep;
  rep.m = s.m;
  rep.R = R;
  rep.integral = e.value.willmore;
  rep.lower_bound = unit_ball_volume(s.m);
  // integrand (in dx) on a sphere, averaged over directions
  const int n_dir = s.m == 2 ? 64 : 32;
  std::vector<Eigen::VectorXd> dirs;
  if (s.m == 2) {
    for (int j = 0; j < n_dir; ++j) {
      const double a = 2.0 * std::numbers::pi * j / n_dir;
      dirs.push_back((Eigen::VectorXd(2) << std::cos(a), std::sin(a)).finished());
    }
  } else {
    const auto [mu, w] = gauss_legendre(n_dir / 2);
    for (int i = 0; i < mu.size(); ++i)
      for (int j = 0; j < n_dir; ++j) {
        const double a = 2.0 * std::numbers::pi * j / n_dir, st = std::sqrt(1.0 - mu[i] * mu[i]);
        dirs.push_back((Eigen::VectorXd(3) << st * std::cos(a), st * std::sin(a), mu[i]).finished());
      }
  }
  auto model_tail = [&](double r) {
    double outer = 0.0;
    for (const auto& d : dirs) {
      const auto c = s.curvature(r * d);
      outer += std::pow(std::abs(c.H), s.m) * std::pow(c.w, -(s.m + 2));
    }
    outer /= static_cast<double>(dirs.size());
    return unit_sphere_area(s.m) * outer * std::pow(r, s.m) / 2.0;
  };
  // the annulus R < |x| < 100 R by quadrature, beyond it the r^{-m-2} model
  const double R_far = 100.0 * R;
  const MomentsEstimate far = ball_moments(s, R_far, static_cast<double>(s.m), q);
  rep.tail_estimate = std::max(0.0, far.value.willmore - e.value.willmore) + model_tail(R_far);
  rep.quadrature_tolerance = e.tolerance.willmore + far.tolerance.willmore;
  rep.sigma_plus_fraction = e.value.area > 0.0 ? std::clamp(e.value.plus_area / e.value.area, 0.0, 1.0) : 0.0;
  return rep;
}

inline WillmoreReport willmore_integral(const CartesianField& f, double R) {
  const SurfaceSampling s = sample_surface(f);
  const auto& g = s.grid;
  for (int a = 0; a < g.m; ++a)
    if (R > g.R[a] - g.spacing(a)) throw UsageError("willmore_integral: truncation radius exceeds the interior of the grid");
  if (g.m != 2 && g.m != 3) throw UsageError("curvature integrals need m in {2, 3}");
  auto in = [&](std::size_t k) { return g.coord(k).norm() <= R; };
  WillmoreReport rep;
  rep.m = g.m;
  rep.R = R;
  const BallMoments fine = detail::grid_moments(s, g.m, in, 1);
  rep.integral = fine.willmore;
  rep.quadrature_tolerance = std::abs(fine.willmore - detail::grid_moments(s, g.m, in, 2).willmore);
  rep.lower_bound = unit_ball_volume(g.m);
  double h = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.m; ++a) h = std::min(h, g.spacing(a));
  KahanSum outer;
  std::size_t n_outer = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!s.interior[k]) continue;
    const double r = g.coord(k).norm();
    if (r <= R && r >= R - h) {
      outer.add(std::pow(std::abs(s.curv[k].H), g.m) * std::pow(s.curv[k].w, -(g.m + 2)));
      ++n_outer;
    }
  }
  if (n_outer > 0) rep.tail_estimate = unit_sphere_area(g.m) * outer.value() / n_outer * std::pow(R, g.m) / 2.0;
  rep.sigma_plus_fraction = fine.area > 0.0 ? std::clamp(fine.plus_area / fine.area, 0.0, 1.0) : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Local Gauss-map estimate

struct GaussEstimate {
  double rho = 0.0;
  double lhs = 0.0;        // ||H||_{L^m(B_rho)}
  double rhs = 0.0;        // (int_{B_rho+} K dv)^{1/m}
  double area = 0.0;       // |B_rho|
  double tolerance = 0.0;  // quadrature tolerance on lhs and rhs
  bool holds() const { return lhs >= rhs - tolerance; }
};

struct GridOptions {
  double spacing = 0.02;  // node spacing for surfaces without rotational symmetry
};

namespace detail {

inline GaussEstimate gauss_from_moments(double rho, int m, const MomentsEstimate& e) {
  GaussEstimate g;
  g.rho = rho;
  g.lhs = std::pow(e.value.hm, 1.0 / m);
  g.rhs = std::pow(std::max(e.value.gauss_plus, 0.0), 1.0 / m);
  g.area = e.value.area;
  // first-order propagation through the 1/m power
  auto root_err = [m](double v, double dv) {
    if (v <= 0.0) return std::pow(dv, 1.0 / m);
    return std::pow(v, 1.0 / m - 1.0) * dv / m;
  };
  g.tolerance = std::max(root_err(e.value.hm, e.tolerance.hm), root_err(std::max(e.value.gauss_plus, 0.0), e.tolerance.gauss_plus));
  return g;
}

/// Sampling of a non-symmetric closed-form surface on a box that contains the geodesic ball.
inline std::pair<SurfaceSampling, std::vector<double>> enclosing_sampling(const AnalyticSurface& s, double rho, const GridOptions& go) {
  double R = std::max(rho, 4.0 * go.spacing) + 2.0 * go.spacing;
  for (int attempt = 0; attempt < 12; ++attempt, R *= 2.0) {
    const int n = 2 * static_cast<int>(std::ceil(R / go.spacing)) + 1;
    const BoxGrid g(s.m, 0.5 * (n - 1) * go.spacing, n);
    SurfaceSampling smp = sample_surface(s, g);
    std::vector<double> d = geodesic_distances(smp, center_node(g));
    bool touches = false;
    for (std::size_t k = 0; k < d.size() && !touches; ++k) touches = !smp.interior[k] && d[k] <= rho;
    if (!touches) return {std::move(smp), std::move(d)};
  }
  throw DomainError("geodesic ball does not fit any sampled box");
}

}  // namespace detail

inline GaussEstimate local_gauss_estimate(const AnalyticSurface& s, double rho, const BallQuadrature& q = {},
                                          const GridOptions& go = {}) {
  if (s.m != 2 && s.m != 3) throw UsageError("curvature integrals need m in {2, 3}");
  if (!(rho > 0.0)) throw UsageError("geodesic radius must be positive");
  if (s.radial()) return detail::gauss_from_moments(rho, s.m, ball_moments(s, geodesic_to_euclidean_radius(s, rho), s.m, q));
  const auto [smp, dist] = detail::enclosing_sampling(s, rho, go);
  return detail::gauss_from_moments(rho, s.m, geodesic_ball_moments(smp, dist, rho, s.m));
}

inline GaussEstimate local_gauss_estimate(const CartesianField& f, double rho) {
  if (f.grid.m != 2 && f.grid.m != 3) throw UsageError("curvature integrals need m in {2, 3}");
  if (!(rho > 0.0)) throw UsageError("geodesic radius must be positive");
  const SurfaceSampling smp = sample_surface(f);
  const auto dist = geodesic_distances(smp, center_node(f.grid));
  return detail::gauss_from_moments(rho, f.grid.m, geodesic_ball_moments(smp, dist, rho, f.grid.m));
}

// ---------------------------------------------------------------------------
// L^p growth

struct GrowthSeries {
  int m = 2;
  double p = 2.0;
  std::vector<double> radii;
  std::vector<double> lp_integrals;         // int_{B_rho} |H|^p dv
  std::vector<double> lp_norms;             // ||H||_{L^p(B_rho)}
  std::vector<double> gauss_image_measure;  // int_{B_rho+} K dv
  std::vector<double> areas;                // |B_rho|
  std::vector<double> tolerances;           // quadrature tolerance on lp_integrals
  bool nondecreasing = true;
  bool lower_bound_ok = true;  // ||H||_{L^m} >= |N(B+)|^{1/m}, checked when p == m
  bool holder_ok = true;       // |N(B+)|^{1/m} <= |B|^{(1-m/p)/m} ||H||_{L^p}, checked when p > m
  bool plateau = false;        // last relative increment below 1e-3
};

namespace detail {

inline void finish_growth(GrowthSeries& gs, const std::vector<MomentsEstimate>& es) {
  const int m = gs.m;
  const double p = gs.p;
  for (const auto& e : es) {
    gs.lp_integrals.push_back(e.value.lp);
    gs.lp_norms.push_back(std::pow(e.value.lp, 1.0 / p));
    gs.gauss_image_measure.push_back(e.value.gauss_plus);
    gs.areas.push_back(e.value.area);
    gs.tolerances.push_back(e.tolerance.lp);
    const double nm = std::pow(std::max(e.value.gauss_plus, 0.0), 1.0 / m);
    const double slack = 1e-9 + std::pow(e.tolerance.gauss_plus + e.tolerance.lp + e.tolerance.hm + 1e-300, 1.0 / m);
    if (p == m && std::pow(e.value.hm, 1.0 / m) < nm - slack) gs.lower_bound_ok = false;
    if (p > m) {
      const double rhs = std::pow(e.value.area, (1.0 - m / p) / m) * std::pow(e.value.lp, 1.0 / p);
      if (nm > rhs + slack) gs.holder_ok = false;
    }
  }
  for (std::size_t k = 1; k < gs.lp_integrals.size(); ++k) {
    const double tol = gs.tolerances[k] + gs.tolerances[k - 1];
    if (gs.lp_integrals[k] < gs.lp_integrals[k - 1] - tol) gs.nondecreasing = false;
    if (gs.gauss_image_measure[k] < gs.gauss_image_measure[k - 1] - tol - 1e-12 * gs.gauss_image_measure[k]) gs.nondecreasing = false;
  }
  const std::size_t n = gs.lp_integrals.size();
  if (n >= 2 && gs.lp_integrals[n - 1] > 0.0)
    gs.plateau = (gs.lp_integrals[n - 1] - gs.lp_integrals[n - 2]) / gs.lp_integrals[n - 1] < 1e-3;
}

inline void check_radii(const std::vector<double>& radii, double p) {
  if (!(p >= 1.0)) throw UsageError("lp_growth: p must be >= 1");
  if (radii.empty()) throw UsageError("lp_growth: empty radius list");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw UsageError("lp_growth: radii must be positive");
    if (k && !(radii[k] > radii[k - 1])) throw UsageError("lp_growth: radii must be increasing");
  }
}

}  // namespace detail

inline GrowthSeries lp_growth(const AnalyticSurface& s, double p, const std::vector<double>& radii, const BallQuadrature& q = {},
                              const GridOptions& go = {}) {
  if (s.m != 2 && s.m != 3) throw UsageError("curvature integrals need m in {2, 3}");
  detail::check_radii(radii, p);
  GrowthSeries gs;
  gs.m = s.m;
  gs.p = p;
  gs.radii = radii;
  std::vector<MomentsEstimate> es;
  if (s.radial()) {
    for (double rho : radii) es.push_back(ball_moments(s, geodesic_to_euclidean_radius(s, rho), p, q));
  } else {
    const auto [smp, dist] = detail::enclosing_sampling(s, radii.back(), go);
    for (double rho : radii) es.push_back(geodesic_ball_moments(smp, dist, rho, p));
  }
  detail::finish_growth(gs, es);
  return gs;
}

inline GrowthSeries lp_growth(const CartesianField& f, double p, const std::vector<double>& radii) {
  if (f.grid.m != 2 && f.grid.m != 3) throw UsageError("curvature integrals need m in {2, 3}");
  detail::check_radii(radii, p);
  GrowthSeries gs;
  gs.m = f.grid.m;
  gs.p = p;
  gs.radii = radii;
  const SurfaceSampling smp = sample_surface(f);
  const auto dist = geodesic_distances(smp, center_node(f.grid));
  std::vector<MomentsEstimate> es;
  for (double rho : radii) es.push_back(geodesic_ball_moments(smp, dist, rho, p));
  detail::finish_growth(gs, es);
  return gs;
}

}  // namespace lpmc
