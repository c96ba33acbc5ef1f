#pragma once

// Coordinate charts on the hyperbolic space H^m = {q : <q,q> = -1, q^0 > 0}.
//
// A chart supplies the embedding p -> q(p) into L^{m+1}, its Jacobian, the
// pulled-back metric h, the partial derivatives of h and its Christoffel
// symbols. Two charts are provided: geodesic polar coordinates (s, theta) on
// H^2, used by the grid solver, and the Poincare ball, valid for any m.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "lpmc/errors.hpp"
#include "lpmc/lorentz.hpp"

namespace lpmc {

/// Metric data of a chart at one point. dh[k] = d_k h, gamma[k](i,j) = Gamma^k_ij.
struct ChartGeometry {
  Eigen::MatrixXd h;
  Eigen::MatrixXd hinv;
  std::vector<Eigen::MatrixXd> dh;
  std::vector<Eigen::MatrixXd> gamma;
};

/// Levi-Civita symbols from a metric and its first partials.
inline std::vector<Eigen::MatrixXd> christoffel(const Eigen::MatrixXd& ginv, const std::vector<Eigen::MatrixXd>& dg) {
  const auto m = ginv.rows();
  std::vector<Eigen::MatrixXd> gam(m, Eigen::MatrixXd::Zero(m, m));
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i; j < m; ++j) {
        double acc = 0.0;
        for (Eigen::Index l = 0; l < m; ++l) acc += ginv(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        gam[k](i, j) = gam[k](j, i) = 0.5 * acc;
      }
  return gam;
}

/// Geodesic polar chart (s, theta) on H^2 about E0: h = ds^2 + sinh^2(s) dtheta^2.
/// Singular at s = 0.
struct PolarChart {
  int dim() const { return 2; }

  LorentzVec embed(const Eigen::VectorXd& p) const { return hyperboloid_point(p[0], p[1]); }

  Eigen::MatrixXd embed_jacobian(const Eigen::VectorXd& p) const {
    const double s = p[0], th = p[1];
    Eigen::MatrixXd J(3, 2);
    J << std::sinh(s), 0.0,
         std::cosh(s) * std::cos(th), -std::sinh(s) * std::sin(th),
         std::cosh(s) * std::sin(th), std::sinh(s) * std::cos(th);
    return J;
  }

  ChartGeometry geometry(const Eigen::VectorXd& p) const {
    const double s = p[0];
    if (!(s > 0.0)) throw DomainError("PolarChart: geometry undefined at the pole");
    const double sh = std::sinh(s), ch = std::cosh(s);
    ChartGeometry g;
    g.h = Eigen::Vector2d(1.0, sh * sh).asDiagonal();
    g.hinv = Eigen::Vector2d(1.0, 1.0 / (sh * sh)).asDiagonal();
    g.dh = {Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
    g.dh[0](1, 1) = 2.0 * sh * ch;
    g.gamma = {Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
    g.gamma[0](1, 1) = -sh * ch;
    g.gamma[1](0, 1) = g.gamma[1](1, 0) = ch / sh;
    return g;
  }

  DiskPoint to_disk(const Eigen::VectorXd& p) const { return geodesic_polar_to_disk(p[0], p[1]); }
};

/// Poincare ball chart on H^m: h = lambda^2 delta, lambda = 2 / (1 - |x|^2).
struct PoincareChart {
  int m = 2;

  explicit PoincareChart(int dim = 2) : m(dim) {
    if (dim < 1) throw UsageError("PoincareChart: dimension must be positive");
  }

  int dim() const { return m; }

  LorentzVec embed(const Eigen::VectorXd& x) const { return inverse_stereographic(DiskPoint(x)); }

  /// d(lambda - 1, lambda x)/dx_i with d_i lambda = lambda^2 x_i.
  Eigen::MatrixXd embed_jacobian(const Eigen::VectorXd& x) const {
    const double lam = 2.0 / (1.0 - x.squaredNorm());
    Eigen::MatrixXd J(m + 1, m);
    J.row(0) = lam * lam * x.transpose();
    J.bottomRows(m) = lam * Eigen::MatrixXd::Identity(m, m) + lam * lam * x * x.transpose();
    return J;
  }

  ChartGeometry geometry(const Eigen::VectorXd& x) const {
    const double r2 = x.squaredNorm();
    if (!(r2 < 1.0)) throw DomainError("PoincareChart: point outside the unit ball");
    const double lam = 2.0 / (1.0 - r2);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
    ChartGeometry g;
    g.h = lam * lam * id;
    g.hinv = id / (lam * lam);
    g.dh.resize(m);
    for (int k = 0; k < m; ++k) g.dh[k] = 2.0 * lam * lam * lam * x[k] * id;
    g.gamma = christoffel(g.hinv, g.dh);
    return g;
  }

  DiskPoint to_disk(const Eigen::VectorXd& x) const { return DiskPoint(x); }
};

}  // namespace lpmc
