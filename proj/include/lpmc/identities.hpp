#pragma once

// Convergence suites for the differential identities: the tilt Laplacian
// identity and the Hessian of tau under step halving on smooth test graphs,
// and the Poincare-model residual of converged solutions under grid refinement.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lpmc/pmc_solver.hpp"
#include "lpmc/radial_graph.hpp"

namespace lpmc {

struct ConvergenceSeries {
  std::string name;
  std::vector<double> steps;      // halving sequence
  std::vector<double> residuals;  // max-norm residual per step
  std::vector<double> orders;     // log2(r_k / r_{k+1})

  double min_order() const {
    double m = std::numeric_limits<double>::infinity();
    for (double o : orders) m = std::min(m, o);
    return m;
  }
};

inline ConvergenceSeries convergence_series(std::string name, const std::function<double(double)>& residual, double step0,
                                            int levels = 3) {
  if (levels < 2) throw UsageError("convergence_series: need at least two levels");
  ConvergenceSeries c;
  c.name = std::move(name);
  for (int k = 0; k < levels; ++k) {
    const double h = step0 / std::pow(2.0, k);
    c.steps.push_back(h);
    c.residuals.push_back(std::abs(residual(h)));
  }
  for (int k = 0; k + 1 < levels; ++k) c.orders.push_back(std::log2(c.residuals[k] / c.residuals[k + 1]));
  return c;
}

/// u = a + b.x + x^T C x + d x_0^3 in the Poincare chart.
inline AnalyticGraph<PoincareChart> poincare_polynomial_graph() {
  const Eigen::Vector2d b(0.1, -0.05);
  Eigen::Matrix2d C;
  C << 0.2, 0.05, 0.05, -0.1;
  const double a = 0.05, d = 0.3;
  return {PoincareChart(2), [=](const Eigen::VectorXd& x) {
            Jet j;
            j.u = a + b.dot(x) + x.dot(C * x) + d * x[0] * x[0] * x[0];
            j.du = b + 2.0 * C * x;
            j.du[0] += 3.0 * d * x[0] * x[0];
            j.ddu = 2.0 * C;
            j.ddu(0, 0) += 6.0 * d * x[0];
            return j;
          }};
}

/// u = 0.1 exp(-s^2) in geodesic polar coordinates.
inline AnalyticGraph<PolarChart> polar_bump_graph() {
  return {PolarChart(), [](const Eigen::VectorXd& q) {
            const double s = q[0], e = std::exp(-s * s);
            Jet j;
            j.u = 0.1 * e;
            j.du = Eigen::Vector2d(-0.2 * s * e, 0.0);
            j.ddu = Eigen::Matrix2d::Zero();
            j.ddu(0, 0) = (-0.2 + 0.4 * s * s) * e;
            return j;
          }};
}

/// u = 0.15 exp(-|x - c|^2 / 0.1) in the Poincare chart, off center.
inline AnalyticGraph<PoincareChart> poincare_gaussian_graph() {
  const Eigen::Vector2d c(0.2, -0.1);
  const double k = 1.0 / 0.1;
  return {PoincareChart(2), [=](const Eigen::VectorXd& x) {
            const Eigen::Vector2d y = x - c;
            const double e = 0.15 * std::exp(-k * y.squaredNorm());
            Jet j;
            j.u = e;
            j.du = -2.0 * k * e * y;
            j.ddu = e * (4.0 * k * k * y * y.transpose() - 2.0 * k * Eigen::Matrix2d::Identity());
            return j;
          }};
}

struct IdentitySuiteReport {
  std::vector<ConvergenceSeries> series;
  double threshold = 1.9;

  double min_order() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : series) m = std::min(m, s.min_order());
    return m;
  }
  bool passed() const { return min_order() >= threshold; }
};

/// Tilt-Laplacian and Hessian-of-tau residuals on three smooth graphs.
inline IdentitySuiteReport kernel_identity_suite() {
  IdentitySuiteReport rep;
  const auto poly = poincare_polynomial_graph();
  const auto bump = polar_bump_graph();
  const auto gauss = poincare_gaussian_graph();
  const Eigen::Vector2d xp(0.2, -0.1), sp(0.7, 0.3), xg(0.3, 0.05);
  rep.series.push_back(convergence_series("laplacian_w/poincare_polynomial",
                                          [&](double h) { return laplacian_w_residual(poly, xp, h); }, 0.02));
  rep.series.push_back(convergence_series("laplacian_w/polar_bump",
                                          [&](double h) { return laplacian_w_residual(bump, sp, h); }, 0.02));
  rep.series.push_back(convergence_series("laplacian_w/poincare_gaussian",
                                          [&](double h) { return laplacian_w_residual(gauss, xg, h); }, 0.01));
  const LorentzVec p1{2.0, 1.0, 0.0}, p2{1.5, 0.3, -0.7}, p3{3.0, -1.2, 1.5};
  rep.series.push_back(convergence_series("hessian_tau/a", [&](double h) { return hessian_tau_residual(p1, h); }, 0.02));
  rep.series.push_back(convergence_series("hessian_tau/b", [&](double h) { return hessian_tau_residual(p2, h); }, 0.02));
  rep.series.push_back(convergence_series("hessian_tau/c", [&](double h) { return hessian_tau_residual(p3, h); }, 0.02));
  return rep;
}

/// Poincare residual of converged solutions on grids n_s x 2 n_s for n_s =
/// n0, 2 n0, 4 n0, evaluated at the nodes of the coarsest grid in [s_lo, s_hi].
inline ConvergenceSeries poincare_refinement(const PrescribedCurvature& H, double s_max = 3.0, int n0 = 32, double s_lo = 0.25,
                                             double s_hi = 1.5, int levels = 3) {
  ConvergenceSeries c;
  c.name = "poincare/" + H.name;
  for (int k = 0; k < levels; ++k) {
    const int ns = n0 << k;
    auto [u, rep] = solve_dirichlet(H, PolarGrid(ns, 2 * ns, s_max));
    if (!rep.converged) throw DomainError("poincare_refinement: solve did not converge on " + std::to_string(ns) + " rings");
    c.steps.push_back(s_max / ns);
    c.residuals.push_back(poincare_residual(u, H, s_lo, s_hi, 1 << k).max_residual);
  }
  for (int k = 0; k + 1 < levels; ++k) c.orders.push_back(std::log2(c.residuals[k] / c.residuals[k + 1]));
  return c;
}

/// Admissible off-center bump used by the refinement suite.
inline PrescribedCurvature offcenter_bump_curvature() {
  RationalParams p;
  p.a = 0.2;
  p.center = Eigen::Vector2d(0.3, 0.1);
  return rational_curvature(p);
}

}  // namespace lpmc
