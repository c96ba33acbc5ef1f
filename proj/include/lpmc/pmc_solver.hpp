#pragma once

// Dirichlet problem for prescribed mean curvature radial graphs over a
// geodesic ball B_r in H^2:
//
//     div_h(w Du) = m (Theta(u, q) - w)  in B_r,     u = b on dB_r,
//
// with Theta(t, q) = e^t Hbar(q e^t) and w = (1 - |Du|_h^2)^{-1/2}.
//
// Finite volumes on the geodesic-polar grid. Ring cells span
// [s_{i-1/2}, s_{i+1/2}] x [theta_{j-1/2}, theta_{j+1/2}]; the pole cell is the
// disk of radius ds/2. Face fluxes carry w evaluated from the face-normal
// difference and an averaged tangential slope. Row residuals are divided by
// the cell area, so they approximate the pointwise equation. The pole tilt
// comes from the least-squares quadratic fit of polar_grid.hpp.
//
// Newton's method uses the exact Jacobian of the discrete residual, built
// with forward-mode automatic differentiation over each row's stencil.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/AutoDiff>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lpmc/chart.hpp"
#include "lpmc/errors.hpp"
#include "lpmc/lorentz.hpp"
#include "lpmc/parallel.hpp"
#include "lpmc/polar_grid.hpp"
#include "lpmc/prescribed_curvature.hpp"
#include "lpmc/radial_graph.hpp"

namespace lpmc {

using AD9 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 9, 1>>;
using ADX = Eigen::AutoDiffScalar<Eigen::VectorXd>;

inline constexpr int kSolverDim = 2;

struct SolveOptions {
  double tol = 1e-10;        // max-norm of the residual
  int max_iters = 50;
  double theta_min = 1e-3;   // spacelike margin |Du| <= 1 - theta_min
  double boundary = 0.0;     // Dirichlet value on dB_r
  int max_halvings = 40;
};

struct SolveReport {
  int iterations = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
  double max_w = 1.0;
  double min_u = 0.0;
  double max_u = 0.0;
  bool converged = false;
  int damping_events = 0;
  std::string message;
  double discretization_error = -1.0;  // < 0 when not estimated
};

struct ResidualResult {
  ScalarField residual;
  bool needs_damping = false;
  double max_grad = 0.0;  // largest discrete |Du|_h
};

/// The discrete operator on one grid for one curvature and boundary value.
class DirichletDiscretization {
 public:
  DirichletDiscretization(const PolarGrid& grid, const PrescribedCurvature& H, double boundary = 0.0)
      : g_(grid), H_(H), b_(boundary) {
    g_.validate();
    if (!H_.Hbar) throw UsageError("DirichletDiscretization: curvature has no Hbar closure");
    const double ds = g_.ds(), dt = g_.dth();
    sh_.resize(g_.n_s + 1);
    sh_half_.resize(g_.n_s + 1);
    area_.resize(g_.n_s + 1);
    for (int i = 0; i <= g_.n_s; ++i) {
      sh_[i] = std::sinh(g_.s(i));
      sh_half_[i] = std::sinh(g_.s(i) + 0.5 * ds);  // face i + 1/2
    }
    area_[0] = 2.0 * std::numbers::pi * (std::cosh(0.5 * ds) - 1.0);
    for (int i = 1; i <= g_.n_s; ++i) area_[i] = dt * (std::cosh(g_.s(i) + 0.5 * ds) - std::cosh(g_.s(i) - 0.5 * ds));
    x_.resize(g_.size());
    x_[0] = g_.disk_point(0, 0);
    for (int i = 1; i <= g_.n_s; ++i)
      for (int j = 0; j < g_.n_th; ++j) x_[g_.index(i, j)] = g_.disk_point(i, j);
    const Eigen::MatrixXd W = pole_fit_weights(g_);
    grad_w_ = W.middleRows(1, 2);
  }

  const PolarGrid& grid() const { return g_; }
  double boundary() const { return b_; }
  const PrescribedCurvature& curvature() const { return H_; }
  std::size_t size() const { return g_.size(); }

  double theta_at(double u, std::size_t k) const { return H_.theta(u, x_[k]); }
  double dtheta_at(double u, std::size_t k) const { return H_.dtheta(u, x_[k]); }

  /// Residual of row k, with node values supplied by get(i, j).
  template <class T, class Get>
  T row(std::size_t k, Get&& get) const {
    const auto [i, j] = g_.node(k);
    if (i == g_.n_s) return T(get(i, j)) - b_;
    if (i == 0) return pole_row<T>(get);
    return ring_row<T>(i, j, get);
  }

  /// Largest discrete slope over nodes and faces; infinity if undefined.
  double max_slope(const std::vector<double>& u) const {
    auto get = [&](int i, int j) { return u[g_.index(i, j)]; };
    const double ds = g_.ds(), dt = g_.dth();
    double worst = pole_gradient(u).norm();
    for (int i = 1; i < g_.n_s; ++i)
      for (int j = 0; j < g_.n_th; ++j) {
        const double c = (get(i + 1, j) - get(i - 1, j)) / (2.0 * ds);
        const double t = tau<double>(i, j, get);
        const double a = (get(i + 1, j) - get(i, j)) / ds;
        const double bf = 0.5 * (t + tau<double>(i + 1, j, get));
        const double gb = (get(i, j + 1) - get(i, j)) / (dt * sh_[i]);
        const double ga = 0.5 * (c + (get(i + 1, j + 1) - get(i - 1, j + 1)) / (2.0 * ds));
        worst = std::max({worst, std::hypot(c, t), std::hypot(a, bf), std::hypot(ga, gb)});
        if (i == 1) {
          const double a0 = (get(1, j) - get(0, 0)) / ds;
          const double b0 = 0.5 * (3.0 * t - tau<double>(2, j, get));
          worst = std::max(worst, std::hypot(a0, b0));
        }
      }
    return worst;
  }

  Eigen::Vector2d pole_gradient(const std::vector<double>& u) const {
    Eigen::VectorXd v(1 + 2 * g_.n_th);
    v[0] = u[0];
    for (int i = 1; i <= 2; ++i)
      for (int j = 0; j < g_.n_th; ++j) v[1 + (i - 1) * g_.n_th + j] = u[g_.index(i, j)];
    return grad_w_ * v;
  }

  /// Tilt at every node from centered slopes (pole from the fit).
  std::vector<double> node_tilts(const std::vector<double>& u) const {
    std::vector<double> w(u.size(), 1.0);
    auto get = [&](int i, int j) { return u[g_.index(i, j)]; };
    const double pg = pole_gradient(u).squaredNorm();
    w[0] = pg < 1.0 ? 1.0 / std::sqrt(1.0 - pg) : std::numeric_limits<double>::infinity();
    const double ds = g_.ds();
    for (int i = 1; i <= g_.n_s; ++i)
      for (int j = 0; j < g_.n_th; ++j) {
        double c;
        if (i < g_.n_s) c = (get(i + 1, j) - get(i - 1, j)) / (2.0 * ds);
        else c = (3.0 * get(i, j) - 4.0 * get(i - 1, j) + get(i - 2, j)) / (2.0 * ds);
        const double t = tau<double>(i, j, get);
        const double n2 = c * c + t * t;
        w[g_.index(i, j)] = n2 < 1.0 ? 1.0 / std::sqrt(1.0 - n2) : std::numeric_limits<double>::infinity();
      }
    return w;
  }

  std::vector<double> residual(const std::vector<double>& u) const {
    std::vector<double> r(u.size());
    auto get = [&](int i, int j) { return u[g_.index(i, j)]; };
    parallel_for(u.size(), [&](std::size_t k) { r[k] = row<double>(k, get); });
    return r;
  }

  Eigen::SparseMatrix<double> jacobian(const std::vector<double>& u) const {
    const std::size_t n = u.size();
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<std::vector<Eigen::Triplet<double>>> parts(n_chunks);
    parallel_chunks(n, [&](std::size_t b, std::size_t e, std::size_t c) {
      auto& out = parts[c];
      for (std::size_t k = b; k < e; ++k) jacobian_row(u, k, out);
    });
    std::vector<Eigen::Triplet<double>> all;
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    J.setFromTriplets(all.begin(), all.end());
    return J;
  }

 private:
  PolarGrid g_;
  PrescribedCurvature H_;
  double b_;
  std::vector<double> sh_, sh_half_, area_;
  std::vector<DiskPoint> x_;
  Eigen::MatrixXd grad_w_;  // rows of the pole-fit pseudo-inverse giving (g_x, g_y)

  template <class T, class Get>
  T tau(int i, int j, Get& get) const {
    return (T(get(i, j + 1)) - get(i, j - 1)) / (2.0 * g_.dth() * sh_[i]);
  }

  double theta_val(double u, std::size_t k) const { return theta_at(u, k); }
  template <class D>
  Eigen::AutoDiffScalar<D> theta_val(const Eigen::AutoDiffScalar<D>& u, std::size_t k) const {
    return Eigen::AutoDiffScalar<D>(theta_at(u.value(), k), dtheta_at(u.value(), k) * u.derivatives());
  }

  template <class T>
  static T flux(const T& a, const T& b) {
    using std::sqrt;
    const T q = 1.0 - a * a - b * b;
    if (!(value_of(q) > 0.0)) throw NotSpacelikeError("discrete slope reached the light cone");
    return T(a / sqrt(q));
  }
  static double value_of(double x) { return x; }
  template <class D>
  static double value_of(const Eigen::AutoDiffScalar<D>& x) { return x.value(); }

  template <class T, class Get>
  T ring_row(int i, int j, Get& get) const {
    using std::sqrt;
    const double ds = g_.ds(), dt = g_.dth();
    const T uij = get(i, j);
    auto c = [&](int ii, int jj) { return T((T(get(ii + 1, jj)) - get(ii - 1, jj)) / (2.0 * ds)); };
    const T tij = tau<T>(i, j, get);
    // radial faces
    const T a_out = (T(get(i + 1, j)) - uij) / ds;
    const T b_out = 0.5 * (tij + tau<T>(i + 1, j, get));
    const T F_out = flux(a_out, b_out);
    T a_in, b_in;
    if (i == 1) {
      a_in = (uij - get(0, 0)) / ds;
      b_in = 0.5 * (3.0 * tij - tau<T>(2, j, get));
    } else {
      a_in = (uij - get(i - 1, j)) / ds;
      b_in = 0.5 * (tij + tau<T>(i - 1, j, get));
    }
    const T F_in = flux(a_in, b_in);
    // angular faces
    const T cij = c(i, j);
    const T gb_p = (T(get(i, j + 1)) - uij) / (dt * sh_[i]);
    const T G_p = flux(gb_p, T(0.5 * (cij + c(i, j + 1))));
    const T gb_m = (uij - get(i, j - 1)) / (dt * sh_[i]);
    const T G_m = flux(gb_m, T(0.5 * (cij + c(i, j - 1))));
    const T div = (sh_half_[i] * dt * F_out - sh_half_[i - 1] * dt * F_in + ds * (G_p - G_m)) / area_[i];
    const T q = 1.0 - cij * cij - tij * tij;
    if (!(value_of(q) > 0.0)) throw NotSpacelikeError("discrete slope reached the light cone");
    const T w = 1.0 / sqrt(q);
    return div - kSolverDim * (theta_val(uij, g_.index(i, j)) - w);
  }

  template <class T, class Get>
  T pole_row(Get& get) const {
    using std::sqrt;
    const double ds = g_.ds(), dt = g_.dth();
    const T u0 = get(0, 0);
    T sum = T(0.0 * u0);
    for (int j = 0; j < g_.n_th; ++j) {
      const T a = (T(get(1, j)) - u0) / ds;
      const T b = 0.5 * (3.0 * tau<T>(1, j, get) - tau<T>(2, j, get));
      sum += flux(a, b);
    }
    const T div = sh_half_[0] * dt * sum / area_[0];
    T gx = T(0.0 * u0), gy = T(0.0 * u0);
    gx += grad_w_(0, 0) * u0;
    gy += grad_w_(1, 0) * u0;
    for (int i = 1; i <= 2; ++i)
      for (int j = 0; j < g_.n_th; ++j) {
        const T v = get(i, j);
        const Eigen::Index col = 1 + (i - 1) * g_.n_th + j;
        gx += grad_w_(0, col) * v;
        gy += grad_w_(1, col) * v;
      }
    const T q = 1.0 - gx * gx - gy * gy;
    if (!(value_of(q) > 0.0)) throw NotSpacelikeError("pole gradient reached the light cone");
    const T w = 1.0 / sqrt(q);
    return div - kSolverDim * (theta_val(u0, 0) - w);
  }

  void jacobian_row(const std::vector<double>& u, std::size_t k, std::vector<Eigen::Triplet<double>>& out) const {
    const auto [i, j] = g_.node(k);
    const auto row_i = static_cast<int>(k);
    if (i == g_.n_s) {
      out.emplace_back(row_i, row_i, 1.0);
      return;
    }
    if (i == 0) {
      const int nd = 1 + 2 * g_.n_th;
      auto get = [&](int ii, int jj) {
        const int slot = ii == 0 ? 0 : 1 + (ii - 1) * g_.n_th + g_.wrap(jj);
        return ADX(u[g_.index(ii, jj)], nd, slot);
      };
      const ADX r = pole_row<ADX>(get);
      out.emplace_back(row_i, 0, r.derivatives()[0]);
      for (int ii = 1; ii <= 2; ++ii)
        for (int jj = 0; jj < g_.n_th; ++jj)
          out.emplace_back(row_i, static_cast<int>(g_.index(ii, jj)), r.derivatives()[1 + (ii - 1) * g_.n_th + jj]);
      return;
    }
    std::array<std::size_t, 9> cols{};
    int n = 0;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const std::size_t c = g_.index(i + di, j + dj);
        if (std::find(cols.begin(), cols.begin() + n, c) == cols.begin() + n) cols[n++] = c;
      }
    auto get = [&](int ii, int jj) {
      const std::size_t c = g_.index(ii, jj);
      const int slot = static_cast<int>(std::find(cols.begin(), cols.begin() + n, c) - cols.begin());
      if (slot >= n) throw DomainError("jacobian_row: stencil escaped its 3x3 neighbourhood");
      return AD9(u[c], 9, slot);
    };
    const AD9 r = ring_row<AD9>(i, j, get);
    for (int s = 0; s < n; ++s) out.emplace_back(row_i, static_cast<int>(cols[s]), r.derivatives()[s]);
  }
};

// ---------------------------------------------------------------------------
// Residual, Jacobian check, Newton

inline ResidualResult assemble_residual(const ScalarField& u, const PrescribedCurvature& H, double boundary = 0.0,
                                        double theta_min = 1e-3) {
  const DirichletDiscretization D(u.grid, H, boundary);
  ResidualResult out;
  out.residual = ScalarField(u.grid);
  out.max_grad = D.max_slope(u.values);
  out.needs_damping = !(out.max_grad <= 1.0 - theta_min);
  if (!(out.max_grad < 1.0)) {
    std::fill(out.residual.values.begin(), out.residual.values.end(), std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  out.residual.values = D.residual(u.values);
  return out;
}

/// max |J_analytic - J_fd| / max |J_fd| with central differences of step h.
inline double jacobian_fd_check(const ScalarField& u, const PrescribedCurvature& H, double boundary = 0.0,
                                double h = 1e-6) {
  const DirichletDiscretization D(u.grid, H, boundary);
  const Eigen::MatrixXd Ja = Eigen::MatrixXd(D.jacobian(u.values));
  const auto n = static_cast<Eigen::Index>(u.values.size());
  Eigen::MatrixXd Jf(n, n);
  std::vector<double> v = u.values;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double x = v[c];
    v[c] = x + h;
    const auto rp = D.residual(v);
    v[c] = x - h;
    const auto rm = D.residual(v);
    v[c] = x;
    for (Eigen::Index r = 0; r < n; ++r) Jf(r, c) = (rp[r] - rm[r]) / (2.0 * h);
  }
  return (Ja - Jf).cwiseAbs().maxCoeff() / std::max(1e-300, Jf.cwiseAbs().maxCoeff());
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline void fill_field_stats(const DirichletDiscretization& D, const ScalarField& u, SolveReport& rep) {
  const auto w = D.node_tilts(u.values);
  rep.max_w = *std::max_element(w.begin(), w.end());
  rep.min_u = *std::min_element(u.values.begin(), u.values.end());
  rep.max_u = *std::max_element(u.values.begin(), u.values.end());
}

/// Damped Newton iteration from `initial` on the grid of `initial`.
inline std::pair<ScalarField, SolveReport> solve_dirichlet(const PrescribedCurvature& H, ScalarField initial,
                                                           const SolveOptions& opt = {}) {
  if (!(opt.tol > 0.0) || opt.max_iters < 0 || !(opt.theta_min > 0.0 && opt.theta_min < 1.0))
    throw UsageError("solve_dirichlet: invalid options");
  const DirichletDiscretization D(initial.grid, H, opt.boundary);
  ScalarField u = std::move(initial);
  SolveReport rep;
  const double cap = 1.0 - opt.theta_min;
  if (!(D.max_slope(u.values) <= cap)) {
    rep.message = "initial guess violates the spacelike margin";
    fill_field_stats(D, u, rep);
    return {u, rep};
  }
  std::vector<double> r = D.residual(u.values);
  rep.residual_norm = max_abs(r);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  while (rep.residual_norm > opt.tol && rep.iterations < opt.max_iters) {
    const Eigen::SparseMatrix<double> J = D.jacobian(u.values);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      rep.message = "sparse factorization failed";
      break;
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (!delta.allFinite()) {
      rep.message = "linear solve produced non-finite update";
      break;
    }
    double alpha = 1.0;
    std::vector<double> trial(u.values.size());
    std::vector<double> rt;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      for (std::size_t k = 0; k < trial.size(); ++k) trial[k] = u.values[k] + alpha * delta[static_cast<Eigen::Index>(k)];
      if (D.max_slope(trial) <= cap) {
        rt = D.residual(trial);
        const double nt = max_abs(rt);
        // accept any decrease; after 10 halvings accept the spacelike step
        if (nt < rep.residual_norm || h >= 10) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
      ++rep.damping_events;
    }
    if (!accepted) {
      rep.message = "step-capped: spacelike margin repeatedly violated";
      break;
    }
    u.values.swap(trial);
    r.swap(rt);
    rep.residual_norm = max_abs(r);
    ++rep.iterations;
  }
  rep.converged = rep.residual_norm <= opt.tol;
  if (!rep.converged && rep.message.empty()) rep.message = "no convergence after " + std::to_string(rep.iterations) + " iterations";
  fill_field_stats(D, u, rep);
  return {u, rep};
}

inline std::pair<ScalarField, SolveReport> solve_dirichlet(const PrescribedCurvature& H, const PolarGrid& grid,
                                                           const SolveOptions& opt = {}) {
  return solve_dirichlet(H, ScalarField(grid, opt.boundary), opt);
}

/// Restriction of a fine field to the nodes of the grid with half the
/// resolution in each direction.
inline ScalarField restrict_to_half(const ScalarField& fine) {
  const auto& g = fine.grid;
  if (g.n_s % 2 != 0 || g.n_th % 4 != 0) throw UsageError("restrict_to_half: need even n_s and n_th divisible by 4");
  ScalarField c(PolarGrid(g.n_s / 2, g.n_th / 2, g.s_max));
  c.values[0] = fine.pole();
  for (int i = 1; i <= c.grid.n_s; ++i)
    for (int j = 0; j < c.grid.n_th; ++j) c.at(i, j) = fine.at(2 * i, 2 * j);
  return c;
}

/// Solves on `grid` and on the half-resolution grid; the Richardson estimate
/// max|u_h - u_2h| / 3 becomes report.discretization_error.
inline std::pair<ScalarField, SolveReport> solve_with_error_estimate(const PrescribedCurvature& H, const PolarGrid& grid,
                                                                     const SolveOptions& opt = {}) {
  auto [u, rep] = solve_dirichlet(H, grid, opt);
  const ScalarField uc = restrict_to_half(u);
  const auto [v, rv] = solve_dirichlet(H, uc.grid, opt);
  if (rep.converged && rv.converged) {
    double d = 0.0;
    for (std::size_t k = 0; k < v.values.size(); ++k) d = std::max(d, std::abs(v.values[k] - uc.values[k]));
    rep.discretization_error = d / 3.0;
  }
  return {u, rep};
}

// ---------------------------------------------------------------------------
// Radial ODE oracle

struct OdeOptions {
  int m = 2;
  double boundary = 0.0;
  double l = 0.5;  // shooting bracket [ln l - 1, ln L + 1]
  double L = 2.0;
};

/// Radial profile on a uniform grid with Hermite interpolation.
struct RadialProfile {
  double s_max = 0.0;
  double h = 0.0;
  std::vector<double> u, up;
  double u0 = 0.0;
  double error_estimate = 0.0;

  double operator()(double s) const {
    if (s < 0.0 || s > s_max * (1.0 + 1e-12)) throw DomainError("RadialProfile: s outside [0, s_max]");
    const auto n = static_cast<int>(u.size()) - 1;
    int k = std::min(n - 1, static_cast<int>(s / h));
    const double t = (s - k * h) / h;
    const double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
    const double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
    return h00 * u[k] + h10 * h * up[k] + h01 * u[k + 1] + h11 * h * up[k + 1];
  }
};

namespace detail {
/// u'' for the radial equation; the s = 0 value is the regular limit.
inline double radial_rhs(const PrescribedCurvature& H, int m, double s, double u, double up) {
  const double q = 1.0 - up * up;
  if (!(q > 0.0)) throw NotSpacelikeError("radial profile reached the light cone");
  const double w = 1.0 / std::sqrt(q);
  const double th = H.theta(u, geodesic_polar_to_disk(s, 0.0));
  if (s == 0.0) return th - 1.0;
  return (m * (th - w) - w * (m - 1) * up / std::tanh(s)) / (w * w * w);
}

/// RK4 from the pole with u(0) = a, u'(0) = 0. Returns false if the
/// profile left the spacelike region; `sign` then holds the sign of u'.
inline bool shoot(const PrescribedCurvature& H, int m, double a, double s_max, int n, std::vector<double>* u,
                  std::vector<double>* up, double& end, int& sign) {
  const double h = s_max / n;
  double y = a, yp = 0.0;
  if (u) {
    u->assign(n + 1, 0.0);
    up->assign(n + 1, 0.0);
    (*u)[0] = a;
  }
  try {
    for (int k = 0; k < n; ++k) {
      const double s = k * h;
      const double k1 = yp, l1 = radial_rhs(H, m, s, y, yp);
      const double k2 = yp + 0.5 * h * l1, l2 = radial_rhs(H, m, s + 0.5 * h, y + 0.5 * h * k1, k2);
      const double k3 = yp + 0.5 * h * l2, l3 = radial_rhs(H, m, s + 0.5 * h, y + 0.5 * h * k2, k3);
      const double k4 = yp + h * l3, l4 = radial_rhs(H, m, s + h, y + h * k3, k4);
      y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      yp += h / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4);
      if (!std::isfinite(y) || !(std::abs(yp) < 1.0)) {
        sign = yp > 0.0 ? 1 : -1;
        return false;
      }
      if (u) {
        (*u)[k + 1] = y;
        (*up)[k + 1] = yp;
      }
    }
  } catch (const NotSpacelikeError&) {
    sign = yp > 0.0 ? 1 : -1;
    return false;
  }
  end = y;
  return true;
}

inline RadialProfile shoot_profile(const PrescribedCurvature& H, double s_max, int n, const OdeOptions& o) {
  auto miss = [&](double a) {
    double end = 0.0;
    int sign = 0;
    if (!shoot(H, o.m, a, s_max, n, nullptr, nullptr, end, sign)) return sign > 0 ? 1.0 : -1.0;
    return end - o.boundary;
  };
  double lo = std::log(o.l) - 1.0, hi = std::log(o.L) + 1.0;
  double flo = miss(lo), fhi = miss(hi);
  if (!(flo < 0.0 && fhi > 0.0)) throw DomainError("radial_ode_oracle: shooting bracket not found");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = miss(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    if (fm < 0.0) lo = mid;
    else hi = mid;
  }
  RadialProfile p;
  p.s_max = s_max;
  p.h = s_max / n;
  p.u0 = 0.5 * (lo + hi);
  double end = 0.0;
  int sign = 0;
  if (!shoot(H, o.m, p.u0, s_max, n, &p.u, &p.up, end, sign))
    throw DomainError("radial_ode_oracle: converged shot left the spacelike region");
  return p;
}
}  // namespace detail

/// Shooting on u(0) with RK4 of step about `step`; the error estimate is the
/// max difference against the half-step profile.
inline RadialProfile radial_ode_oracle(const PrescribedCurvature& H, double s_max, double step = 1e-3,
                                       const OdeOptions& o = {}) {
  if (!H.radial) throw UsageError("radial_ode_oracle: curvature is not radially symmetric");
  if (!(s_max > 0.0) || !(step > 0.0) || o.m < 2) throw UsageError("radial_ode_oracle: invalid arguments");
  const int n = std::max(8, static_cast<int>(std::ceil(s_max / step)));
  RadialProfile p = detail::shoot_profile(H, s_max, n, o);
  const RadialProfile q = detail::shoot_profile(H, s_max, 2 * n, o);
  double e = 0.0;
  for (int k = 0; k <= n; ++k) e = std::max(e, std::abs(p.u[k] - q.u[2 * k]));
  p.error_estimate = e;
  return p;
}

// ---------------------------------------------------------------------------
// Poincare-ball residual

struct PoincareReport {
  double max_residual = 0.0;   // max |Pu - f_H|
  double max_form_gap = 0.0;   // max |w^3 (Pu - f_H) - (divergence-form residual)|
  std::size_t evaluated = 0;
  std::size_t excluded = 0;    // nodes dropped for lambda above the cap
};

/// Pu - f_H at a disk point from a Poincare-chart jet, plus the divergence
/// form residual div(w grad u) - m lambda^2 (e^u H - w) + (m - 2) lambda w grad u.x.
inline std::pair<double, double> poincare_pointwise(const Eigen::VectorXd& x, const Jet& jet, double theta_val) {
  const auto m = static_cast<double>(x.size());
  const double lam = 2.0 / (1.0 - x.squaredNorm());
  const Eigen::VectorXd& z = jet.du;
  const double z2 = z.squaredNorm();
  const double q = 1.0 - z2 / (lam * lam);
  if (!(q > 0.0)) throw NotSpacelikeError("poincare_residual: gradient reached the light cone");
  const Eigen::MatrixXd a = q * Eigen::MatrixXd::Identity(x.size(), x.size()) + z * z.transpose() / (lam * lam);
  const Eigen::VectorXd b = lam * ((m - 2.0) - (m - 1.0) * z2 / (lam * lam)) * x;
  const double Pu = a.cwiseProduct(jet.ddu).sum() + b.dot(z);
  const double f = m * lam * lam * (std::pow(q, 1.5) * theta_val - q);
  const double w = 1.0 / std::sqrt(q);
  const double lap = jet.ddu.trace();
  const double div = w * lap + w * w * w / (lam * lam) * z.dot(jet.ddu * z) - (w * w * w - w) * lam * z.dot(x);
  const double conf = div - m * lam * lam * (theta_val - w) + (m - 2.0) * lam * w * z.dot(x);
  return {Pu - f, w * w * w * (Pu - f) - conf};
}

/// Non-divergence Poincare residual of a polar-grid field at ring nodes with
/// s_lo <= s <= s_hi, i < n_s, and i, j multiples of `stride`.
inline PoincareReport poincare_residual(const ScalarField& u, const PrescribedCurvature& H, double s_lo, double s_hi,
                                        int stride = 1, double lambda_cap = 1e6) {
  if (stride < 1) throw UsageError("poincare_residual: stride must be positive");
  const auto& g = u.grid;
  PoincareReport rep;
  for (int i = stride; i < g.n_s; i += stride) {
    const double s = g.s(i);
    if (s < s_lo - 1e-12 || s > s_hi + 1e-12) continue;
    for (int j = 0; j < g.n_th; j += stride) {
      const DiskPoint x = g.disk_point(i, j);
      if (x.lambda() > lambda_cap) {
        ++rep.excluded;
        continue;
      }
      const Jet pj = polar_to_poincare_jet(polar_jet(u, i, j), s, g.theta(j));
      const auto [res, gap] = poincare_pointwise(x.x, pj, H.theta(pj.u, x));
      rep.max_residual = std::max(rep.max_residual, std::abs(res));
      rep.max_form_gap = std::max(rep.max_form_gap, std::abs(gap));
      ++rep.evaluated;
    }
  }
  return rep;
}

/// Same residual for an analytic graph in the Poincare chart.
inline PoincareReport poincare_residual(const AnalyticGraph<PoincareChart>& graph, const PrescribedCurvature& H,
                                        const std::vector<Eigen::VectorXd>& points, double lambda_cap = 1e6) {
  PoincareReport rep;
  for (const auto& x : points) {
    const DiskPoint d(x);
    if (d.norm2() >= 1.0 || d.lambda() > lambda_cap) {
      ++rep.excluded;
      continue;
    }
    const Jet j = graph.jet(x);
    const auto [res, gap] = poincare_pointwise(x, j, H.theta(j.u, d));
    rep.max_residual = std::max(rep.max_residual, std::abs(res));
    rep.max_form_gap = std::max(rep.max_form_gap, std::abs(gap));
    ++rep.evaluated;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Exhaustion

struct ExhaustionOptions {
  double inner = 1.0;      // s_0, radius of the compact ball for deltas
  int per_unit = 32;       // radial nodes per unit of s (fixed ds across radii)
  int n_th = 128;
  double psi_lambda = 1.0; // lambda in psi = w e^{+-lambda u}
  SolveOptions solve;
};

struct PsiLocation {
  double value = 0.0;
  double s = 0.0;
  double theta = 0.0;
};

struct RadiusRun {
  double radius = 0.0;
  SolveReport report;
  PsiLocation psi_plus;
  PsiLocation psi_minus;
};

struct ExhaustionReport {
  std::vector<RadiusRun> runs;
  std::vector<double> compact_deltas;  // max_{B_{s_0}} |u_{j+1} - u_j|
  std::vector<double> tilt_series;     // max_w per radius
  std::optional<std::size_t> failed_index;
  std::vector<ScalarField> fields;
};

inline PsiLocation psi_max(const ScalarField& u, const std::vector<double>& w, double lambda) {
  PsiLocation best{-std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    const double v = w[k] * std::exp(lambda * u.values[k]);
    if (v > best.value) {
      const auto [i, j] = u.grid.node(k);
      best = {v, u.grid.s(i), i == 0 ? 0.0 : u.grid.theta(j)};
    }
  }
  return best;
}

inline ExhaustionReport exhaustion(const PrescribedCurvature& H, const std::vector<double>& radii,
                                   const ExhaustionOptions& opt = {}) {
  if (radii.empty()) throw UsageError("exhaustion: no radii");
  if (!(opt.inner > 0.0 && opt.inner <= radii.front())) throw UsageError("exhaustion: need 0 < s_0 <= s_1");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] > radii[k - 1])) throw UsageError("exhaustion: radii must be strictly increasing");
  if (opt.per_unit < 1) throw UsageError("exhaustion: per_unit must be positive");
  std::vector<int> ns;
  for (double r : radii) {
    const double x = r * opt.per_unit;
    if (std::abs(x - std::round(x)) > 1e-9) throw UsageError("exhaustion: radius * per_unit must be an integer");
    ns.push_back(static_cast<int>(std::round(x)));
  }
  ExhaustionReport rep;
  ScalarField prev;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const PolarGrid g(ns[k], opt.n_th, radii[k]);
    ScalarField guess(g, opt.solve.boundary);
    if (k > 0)
      for (int i = 0; i <= prev.grid.n_s; ++i)
        for (int j = 0; j < g.n_th; ++j) guess.at(i, j) = prev.at(i, j);
    auto [u, sr] = solve_dirichlet(H, std::move(guess), opt.solve);
    RadiusRun run;
    run.radius = radii[k];
    run.report = sr;
    const DirichletDiscretization D(g, H, opt.solve.boundary);
    const auto w = D.node_tilts(u.values);
    run.psi_plus = psi_max(u, w, opt.psi_lambda);
    run.psi_minus = psi_max(u, w, -opt.psi_lambda);
    rep.runs.push_back(run);
    rep.tilt_series.push_back(sr.max_w);
    if (!sr.converged) {
      rep.failed_index = k;
      rep.fields.push_back(std::move(u));
      break;
    }
    if (k > 0) {
      const int n_in = static_cast<int>(std::floor(opt.inner * opt.per_unit + 1e-9));
      double d = std::abs(u.pole() - prev.pole());
      for (int i = 1; i <= n_in; ++i)
        for (int j = 0; j < g.n_th; ++j) d = std::max(d, std::abs(u.at(i, j) - prev.at(i, j)));
      rep.compact_deltas.push_back(d);
    }
    prev = u;
    rep.fields.push_back(std::move(u));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Uniqueness probe

struct UniquenessReport {
  double max_distance = 0.0;
  std::vector<bool> converged;
  std::size_t excluded = 0;
};

/// Initial guesses: constants 0, +0.3, -0.3 and a smooth bump.
inline std::vector<ScalarField> standard_guesses(const PolarGrid& g) {
  std::vector<ScalarField> out;
  for (double c : {0.0, 0.3, -0.3}) out.emplace_back(g, c);
  out.push_back(sample_field(g, [&](double s, double th) {
    return 0.2 * std::exp(-s * s) * (1.0 + 0.5 * std::cos(th) * std::tanh(s));
  }));
  return out;
}

inline UniquenessReport uniqueness_probe(const PrescribedCurvature& H, const std::vector<ScalarField>& guesses,
                                         const SolveOptions& opt = {}) {
  UniquenessReport rep;
  std::vector<ScalarField> sols;
  for (const auto& g : guesses) {
    const auto [u, sr] = solve_dirichlet(H, g, opt);
    rep.converged.push_back(sr.converged);
    if (sr.converged) sols.push_back(u);
    else ++rep.excluded;
  }
  for (std::size_t a = 0; a < sols.size(); ++a)
    for (std::size_t b = a + 1; b < sols.size(); ++b)
      for (std::size_t k = 0; k < sols[a].values.size(); ++k)
        rep.max_distance = std::max(rep.max_distance, std::abs(sols[a].values[k] - sols[b].values[k]));
  return rep;
}

}  // namespace lpmc
