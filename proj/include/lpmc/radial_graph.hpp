#pragma once

// Extrinsic geometry of spacelike radial graphs
//
//     Sigma_u = { q e^{u(q)} : q in H^m },
//
// evaluated pointwise from a jet of u in a chart of H^m. Jets carry partial
// derivatives; covariant derivatives with respect to h are formed here.
//
// Two independent routes to the mean curvature are provided:
//   divergence form:  m (e^u H - w) = w Lap_h u + w^3 D^2u(Du, Du)
//   intrinsic form:   m w e^{-u} H  = Lap_g u + 2 |grad u|_g^2 + m e^{-2u}
// The second uses only the graph metric g and its Christoffel symbols.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lpmc/chart.hpp"
#include "lpmc/errors.hpp"
#include "lpmc/lorentz.hpp"

namespace lpmc {

/// Value and chart partial derivatives of a height function at one point.
struct Jet {
  double u = 0.0;
  Eigen::VectorXd du;   // d_i u
  Eigen::MatrixXd ddu;  // d_i d_j u
};

/// Per-point extrinsic data of a spacelike hypersurface.
struct CurvatureSample {
  double w = 1.0;               // tilt: -<N, T> (radial) or -<N, E0> (Cartesian)
  LorentzVec N;                 // future unit normal
  double H = 0.0;               // mean curvature (normalized trace)
  double K = 0.0;               // Gauss-Kronecker curvature
  Eigen::MatrixXd II;           // second fundamental form in chart components
  Eigen::VectorXd principal;    // eigenvalues of the shape operator, ascending
};

struct GraphMetric {
  Eigen::MatrixXd g;
  Eigen::MatrixXd ginv;
};

/// |Du|_h^2 for a covector du.
inline double grad_norm2(const Eigen::VectorXd& du, const Eigen::MatrixXd& hinv) { return du.dot(hinv * du); }

/// Tilt w = (1 - |Du|_h^2)^{-1/2}.
inline double tilt(const Eigen::VectorXd& du, const Eigen::MatrixXd& hinv) {
  const double n2 = grad_norm2(du, hinv);
  if (!(n2 < 1.0)) {
    std::ostringstream os;
    os << "tilt: |Du|_h = " << std::sqrt(n2) << " >= 1";
    throw NotSpacelikeError(os.str());
  }
  return 1.0 / std::sqrt(1.0 - n2);
}

/// g_ij = e^{2u}(h_ij - u_i u_j) and g^ij = e^{-2u}(h^ij + u^i u^j / (1 - |Du|^2)).
inline GraphMetric graph_metric(double u, const Eigen::VectorXd& du, const Eigen::MatrixXd& h,
                                const Eigen::MatrixXd& hinv) {
  const double n2 = grad_norm2(du, hinv);
  if (!(n2 < 1.0)) throw NotSpacelikeError("graph_metric: |Du|_h >= 1");
  const Eigen::VectorXd up = hinv * du;
  GraphMetric gm;
  gm.g = std::exp(2.0 * u) * (h - du * du.transpose());
  gm.ginv = std::exp(-2.0 * u) * (hinv + up * up.transpose() / (1.0 - n2));
  return gm;
}

/// D^2 u = d_i d_j u - Gamma^k_ij d_k u.
inline Eigen::MatrixXd covariant_hessian(const Jet& jet, const ChartGeometry& geo) {
  Eigen::MatrixXd D2 = jet.ddu;
  for (Eigen::Index k = 0; k < jet.du.size(); ++k) D2 -= jet.du[k] * geo.gamma[k];
  return D2;
}

/// II = w e^u (D^2u + h - du (x) du).
inline Eigen::MatrixXd second_fundamental_form(double u, const Eigen::VectorXd& du, const Eigen::MatrixXd& D2u,
                                               const Eigen::MatrixXd& h, const Eigen::MatrixXd& hinv) {
  const double w = tilt(du, hinv);
  Eigen::MatrixXd II = w * std::exp(u) * (D2u + h - du * du.transpose());
  return 0.5 * (II + II.transpose());
}

/// N = w (T + e^{-u} Du); at F(q) = q e^u the radial field T equals q and
/// e^{-u} Du is the h-gradient pushed forward by the embedding of H^m.
template <class Chart>
LorentzVec unit_normal(const Chart& chart, const Eigen::VectorXd& p, const Jet& jet) {
  const ChartGeometry geo = chart.geometry(p);
  const double w = tilt(jet.du, geo.hinv);
  const LorentzVec q = chart.embed(p);
  const Eigen::VectorXd grad = chart.embed_jacobian(p) * (geo.hinv * jet.du);
  return LorentzVec(w * (q.c + grad));
}

/// Divergence-form mean curvature from u, Du and the covariant Hessian.
inline double mean_curvature_divergence_form(double u, const Eigen::VectorXd& du, const Eigen::MatrixXd& D2u,
                                             const Eigen::MatrixXd& hinv) {
  const double w = tilt(du, hinv);
  const auto m = static_cast<double>(du.size());
  const Eigen::VectorXd up = hinv * du;
  const double lap = (hinv.cwiseProduct(D2u)).sum();
  const double div = w * lap + w * w * w * up.dot(D2u * up);
  return (div / m + w) * std::exp(-u);
}

/// Intrinsic mean curvature: Lap_g assembled from g^{-1} and the Christoffel
/// symbols of g; w recovered from w^2 = 1 + e^{2u} |grad u|_g^2.
inline double mean_curvature_intrinsic(const Jet& jet, const ChartGeometry& geo) {
  const auto m = jet.du.size();
  const double e2u = std::exp(2.0 * jet.u);
  const Eigen::MatrixXd g = e2u * (geo.h - jet.du * jet.du.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw NotSpacelikeError("mean_curvature_intrinsic: graph metric not positive");
  const Eigen::MatrixXd ginv = llt.solve(Eigen::MatrixXd::Identity(m, m));
  std::vector<Eigen::MatrixXd> dg(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::VectorXd uk = jet.ddu.col(k);
    dg[k] = 2.0 * jet.du[k] * g + e2u * (geo.dh[k] - uk * jet.du.transpose() - jet.du * uk.transpose());
  }
  const auto gam = christoffel(ginv, dg);
  Eigen::MatrixXd hess = jet.ddu;
  for (Eigen::Index k = 0; k < m; ++k) hess -= jet.du[k] * gam[k];
  const double lap_g = ginv.cwiseProduct(hess).sum();
  const double grad2 = jet.du.dot(ginv * jet.du);
  const double w = std::sqrt(1.0 + e2u * grad2);
  const double md = static_cast<double>(m);
  return (lap_g + 2.0 * grad2 + md / e2u) * std::exp(jet.u) / (md * w);
}

/// Principal curvatures: eigenvalues of g^{-1/2} II g^{-1/2}.
inline Eigen::VectorXd principal_curvatures(const Eigen::MatrixXd& g, const Eigen::MatrixXd& II) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::MatrixXd ghalf_inv =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd S = ghalf_inv * II * ghalf_inv;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  return ss.eigenvalues();
}

/// Full extrinsic sample of a radial graph at chart point p.
template <class Chart>
CurvatureSample radial_curvature(const Chart& chart, const Eigen::VectorXd& p, const Jet& jet) {
  const ChartGeometry geo = chart.geometry(p);
  CurvatureSample cs;
  cs.w = tilt(jet.du, geo.hinv);
  cs.N = unit_normal(chart, p, jet);
  const Eigen::MatrixXd D2 = covariant_hessian(jet, geo);
  cs.II = second_fundamental_form(jet.u, jet.du, D2, geo.h, geo.hinv);
  const GraphMetric gm = graph_metric(jet.u, jet.du, geo.h, geo.hinv);
  const auto m = static_cast<double>(jet.du.size());
  cs.H = gm.ginv.cwiseProduct(cs.II).sum() / m;
  cs.K = (gm.ginv * cs.II).determinant();
  cs.principal = principal_curvatures(gm.g, cs.II);
  return cs;
}

/// Height function given by closures in a chart of H^m, with a declared
/// spacelike margin checked whenever a jet is requested.
template <class Chart>
struct AnalyticGraph {
  Chart chart;
  std::function<Jet(const Eigen::VectorXd&)> jet_fn;
  double margin = 1e-3;

  Jet jet(const Eigen::VectorXd& p) const {
    Jet j = jet_fn(p);
    const ChartGeometry geo = chart.geometry(p);
    const double n = std::sqrt(grad_norm2(j.du, geo.hinv));
    if (n > 1.0 - margin) {
      std::ostringstream os;
      os << "AnalyticGraph: |Du|_h = " << n << " exceeds 1 - margin = " << 1.0 - margin;
      throw NotSpacelikeError(os.str());
    }
    return j;
  }

  double value(const Eigen::VectorXd& p) const { return jet_fn(p).u; }

  CurvatureSample curvature(const Eigen::VectorXd& p) const { return radial_curvature(chart, p, jet(p)); }

  double tilt_at(const Eigen::VectorXd& p) const { return tilt(jet(p).du, chart.geometry(p).hinv); }

  double mean_curvature(const Eigen::VectorXd& p) const {
    const Jet j = jet(p);
    const ChartGeometry geo = chart.geometry(p);
    return mean_curvature_divergence_form(j.u, j.du, covariant_hessian(j, geo), geo.hinv);
  }

  double mean_curvature_intrinsic_at(const Eigen::VectorXd& p) const {
    return mean_curvature_intrinsic(jet(p), chart.geometry(p));
  }

  /// Immersion F_u(p) = q(p) e^{u(p)}.
  LorentzVec immersion(const Eigen::VectorXd& p) const { return std::exp(value(p)) * chart.embed(p); }
};

/// Constant height ln(l): the hyperboloid H^m(l).
template <class Chart>
AnalyticGraph<Chart> constant_graph(Chart chart, double value) {
  const int m = chart.dim();
  return {chart, [value, m](const Eigen::VectorXd&) {
            return Jet{value, Eigen::VectorXd::Zero(m), Eigen::MatrixXd::Zero(m, m)};
          }};
}

// ---------------------------------------------------------------------------
// Differential identities

/// LHS - RHS of the Laplacian identity for the tilt function,
///
///   Lap_g w - w|II|^2 + m g(T^T, grad H)
///     = w(m e^{-2u} + 3|grad u|^2) - m H e^{-u}(w^2 + 1) - 2 e^u II(grad u, grad u),
///
/// where Lap_g w and grad H come from centered differences of step `step` in
/// chart coordinates and everything else is evaluated from the jet at p.
/// The 3|grad u|^2 collects w g^ij h_ij plus the two cross terms
/// hbar(N, e_j) = e^{-u} w u_j produced by d(tau) (.) hbar.
template <class Chart>
double laplacian_w_residual(const AnalyticGraph<Chart>& graph, const Eigen::VectorXd& p, double step) {
  const Jet jet = graph.jet(p);
  const ChartGeometry geo = graph.chart.geometry(p);
  const auto m = jet.du.size();
  const double md = static_cast<double>(m);
  const double u = jet.u;
  const double e2u = std::exp(2.0 * u);

  const GraphMetric gm = graph_metric(u, jet.du, geo.h, geo.hinv);
  const Eigen::MatrixXd& ginv = gm.ginv;
  std::vector<Eigen::MatrixXd> dg(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::VectorXd uk = jet.ddu.col(k);
    dg[k] = 2.0 * jet.du[k] * gm.g + e2u * (geo.dh[k] - uk * jet.du.transpose() - jet.du * uk.transpose());
  }
  const auto gam_g = christoffel(ginv, dg);

  const double w = tilt(jet.du, geo.hinv);
  const Eigen::MatrixXd II = second_fundamental_form(u, jet.du, covariant_hessian(jet, geo), geo.h, geo.hinv);
  const double H = ginv.cwiseProduct(II).sum() / md;

  auto wf = [&](const Eigen::VectorXd& x) { return graph.tilt_at(x); };
  auto Hf = [&](const Eigen::VectorXd& x) { return graph.mean_curvature(x); };

  Eigen::VectorXd dw(m), dH(m);
  Eigen::MatrixXd ddw(m, m);
  const double w0 = wf(p);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::VectorXd ei = Eigen::VectorXd::Zero(m);
    ei[i] = step;
    const double wp = wf(p + ei), wm = wf(p - ei);
    dw[i] = (wp - wm) / (2.0 * step);
    ddw(i, i) = (wp - 2.0 * w0 + wm) / (step * step);
    dH[i] = (Hf(p + ei) - Hf(p - ei)) / (2.0 * step);
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(m);
      ej[j] = step;
      ddw(i, j) = ddw(j, i) = (wf(p + ei + ej) - wf(p + ei - ej) - wf(p - ei + ej) + wf(p - ei - ej)) / (4.0 * step * step);
    }
  }
  Eigen::MatrixXd hess_w = ddw;
  for (Eigen::Index k = 0; k < m; ++k) hess_w -= dw[k] * gam_g[k];
  const double lap_w = ginv.cwiseProduct(hess_w).sum();

  const Eigen::VectorXd grad_u = ginv * jet.du;  // raised with g
  const double grad_u2 = jet.du.dot(grad_u);
  const double II2 = (ginv * II * ginv * II).trace();
  const double t_dot_gradH = -std::exp(u) * grad_u.dot(dH);  // g(T^T, grad H), T^T = -e^u grad u
  const double II_uu = grad_u.dot(II * grad_u);

  const double lhs = lap_w - w * II2 + md * t_dot_gradH;
  const double rhs = w * (md / e2u + 3.0 * grad_u2) - md * H * std::exp(-u) * (w * w + 1.0) - 2.0 * std::exp(u) * II_uu;
  return lhs - rhs;
}

/// Max-norm of (finite-difference ambient Hessian of tau = ln l) - (-dtau^2 - hbar)
/// at p in I+(0), with hbar = e^{-2 tau} eta + dtau^2 the pullback of h by the
/// radial projection.
inline double hessian_tau_residual(const LorentzVec& p, double step) {
  if (!is_timelike_future(p)) throw DomainError("hessian_tau_residual: point not in I+(0)");
  const auto n = p.c.size();
  auto tau = [](const Eigen::VectorXd& x) {
    const double l2 = x[0] * x[0] - x.tail(x.size() - 1).squaredNorm();
    return 0.5 * std::log(l2);
  };
  const double l2 = -inner(p, p);
  Eigen::VectorXd dtau(n);
  for (Eigen::Index mu = 0; mu < n; ++mu) dtau[mu] = (mu == 0 ? p.c[0] : -p.c[mu]) / l2;
  Eigen::MatrixXd eta = Eigen::MatrixXd::Identity(n, n);
  eta(0, 0) = -1.0;
  const Eigen::MatrixXd expected = -2.0 * dtau * dtau.transpose() - eta / l2;

  double worst = 0.0;
  const Eigen::VectorXd& x = p.c;
  const double t0 = tau(x);
  for (Eigen::Index a = 0; a < n; ++a) {
    Eigen::VectorXd ea = Eigen::VectorXd::Zero(n);
    ea[a] = step;
    for (Eigen::Index b = 0; b <= a; ++b) {
      double d2;
      if (a == b) {
        d2 = (tau(x + ea) - 2.0 * t0 + tau(x - ea)) / (step * step);
      } else {
        Eigen::VectorXd eb = Eigen::VectorXd::Zero(n);
        eb[b] = step;
        d2 = (tau(x + ea + eb) - tau(x + ea - eb) - tau(x - ea + eb) + tau(x - ea - eb)) / (4.0 * step * step);
      }
      worst = std::max(worst, std::abs(d2 - expected(a, b)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// ALC sandwich criterion

/// One sample of a height function: value and |Du|_h, plus a label for
/// diagnostics.
struct HeightSample {
  double u = 0.0;
  double grad_norm = 0.0;
  std::string where;
};

struct SandwichResult {
  bool alc = false;
  std::size_t violations = 0;
  std::optional<std::string> first_failure;
};

/// A spacelike radial graph with ln l <= u <= ln L lies between two
/// hyperboloids, hence is ALC.
inline SandwichResult alc_sandwich_check(const std::vector<HeightSample>& samples, double l, double L) {
  if (!(l > 0.0 && l <= L)) throw UsageError("alc_sandwich_check: need 0 < l <= L");
  const double lo = std::log(l), hi = std::log(L);
  SandwichResult r;
  for (const auto& s : samples) {
    std::string why;
    if (s.u < lo) why = "u below ln l";
    else if (s.u > hi) why = "u above ln L";
    else if (!(s.grad_norm < 1.0)) why = "not spacelike";
    if (!why.empty()) {
      ++r.violations;
      if (!r.first_failure) {
        std::ostringstream os;
        os << why << " at " << s.where << " (u = " << s.u << ", |Du| = " << s.grad_norm << ")";
        r.first_failure = os.str();
      }
    }
  }
  r.alc = !samples.empty() && r.violations == 0;
  return r;
}

template <class Chart>
std::vector<HeightSample> sample_heights(const AnalyticGraph<Chart>& graph, const std::vector<Eigen::VectorXd>& points) {
  std::vector<HeightSample> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const Jet j = graph.jet_fn(p);
    const ChartGeometry geo = graph.chart.geometry(p);
    std::ostringstream os;
    os << "chart point (" << p.transpose() << ")";
    out.push_back({j.u, std::sqrt(grad_norm2(j.du, geo.hinv)), os.str()});
  }
  return out;
}

}  // namespace lpmc
