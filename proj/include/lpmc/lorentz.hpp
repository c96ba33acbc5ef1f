#pragma once

// Minkowski space L^{m+1} with signature (-,+,...,+), causal classification,
// time separation and the hyperboloid <-> Poincare ball correspondence.

#include <Eigen/Dense>
#include <cmath>
#include <initializer_list>
#include <string>

#include "lpmc/errors.hpp"

namespace lpmc {

/// Tolerance for membership of the future unit hyperboloid: |<q,q> + 1|.
inline constexpr double kHyperboloidTol = 1e-9;

/// Point or vector of L^{m+1}; coordinate 0 is time.
struct LorentzVec {
  Eigen::VectorXd c;

  LorentzVec() = default;
  explicit LorentzVec(Eigen::VectorXd coords) : c(std::move(coords)) {}
  LorentzVec(std::initializer_list<double> coords) : c(coords.size()) {
    Eigen::Index i = 0;
    for (double v : coords) c[i++] = v;
  }

  static LorentzVec zero(int space_dim) { return LorentzVec(Eigen::VectorXd::Zero(space_dim + 1)); }
  static LorentzVec e0(int space_dim) {
    LorentzVec v = zero(space_dim);
    v.c[0] = 1.0;
    return v;
  }

  /// Space dimension m of the ambient L^{m+1}.
  int space_dim() const { return static_cast<int>(c.size()) - 1; }
  double time() const { return c[0]; }
  Eigen::VectorXd spatial() const { return c.tail(c.size() - 1); }

  double operator[](Eigen::Index i) const { return c[i]; }
  double& operator[](Eigen::Index i) { return c[i]; }

  friend LorentzVec operator+(const LorentzVec& a, const LorentzVec& b) { return LorentzVec(a.c + b.c); }
  friend LorentzVec operator-(const LorentzVec& a, const LorentzVec& b) { return LorentzVec(a.c - b.c); }
  friend LorentzVec operator-(const LorentzVec& a) { return LorentzVec(-a.c); }
  friend LorentzVec operator*(double s, const LorentzVec& a) { return LorentzVec(s * a.c); }
  friend LorentzVec operator*(const LorentzVec& a, double s) { return LorentzVec(s * a.c); }
};

enum class CausalClass { Spacelike, TimelikeFuture, TimelikePast, NullFuture, NullPast };

inline std::string to_string(CausalClass c) {
  switch (c) {
    case CausalClass::Spacelike: return "spacelike";
    case CausalClass::TimelikeFuture: return "timelike-future";
    case CausalClass::TimelikePast: return "timelike-past";
    case CausalClass::NullFuture: return "null-future";
    case CausalClass::NullPast: return "null-past";
  }
  return "unknown";
}

/// Minkowski product -v0 w0 + sum_i vi wi.
inline double inner(const LorentzVec& v, const LorentzVec& w) {
  if (v.c.size() != w.c.size() || v.c.size() < 2)
    throw UsageError("inner: dimension mismatch (" + std::to_string(v.c.size()) + " vs " +
                     std::to_string(w.c.size()) + ")");
  return -v.c[0] * w.c[0] + v.c.tail(v.c.size() - 1).dot(w.c.tail(w.c.size() - 1));
}

/// The zero vector counts as spacelike. Null means <v,v> == 0 exactly.
inline CausalClass classify(const LorentzVec& v) {
  const double n = inner(v, v);
  if (v.c.isZero(0.0) || n > 0.0) return CausalClass::Spacelike;
  const bool future = v.c[0] > 0.0;
  if (n < 0.0) return future ? CausalClass::TimelikeFuture : CausalClass::TimelikePast;
  return future ? CausalClass::NullFuture : CausalClass::NullPast;
}

inline bool is_timelike_future(const LorentzVec& v) { return classify(v) == CausalClass::TimelikeFuture; }

/// Time separation l_o(q) = sqrt(-<q-o, q-o>) for q in I+(o).
inline double lorentz_distance(const LorentzVec& o, const LorentzVec& q) {
  const LorentzVec d = q - o;
  if (!is_timelike_future(d)) throw DomainError("lorentz_distance: q is not in the chronological future of o");
  return std::sqrt(-inner(d, d));
}

/// Point of the Poincare ball B^m.
struct DiskPoint {
  Eigen::VectorXd x;

  DiskPoint() = default;
  explicit DiskPoint(Eigen::VectorXd v) : x(std::move(v)) {}
  DiskPoint(std::initializer_list<double> coords) : x(coords.size()) {
    Eigen::Index i = 0;
    for (double v : coords) x[i++] = v;
  }

  int dim() const { return static_cast<int>(x.size()); }
  double norm2() const { return x.squaredNorm(); }
  /// Conformal factor 2 / (1 - |x|^2) of the Poincare metric lambda^2 delta.
  double lambda() const { return 2.0 / (1.0 - norm2()); }
};

inline bool on_unit_hyperboloid(const LorentzVec& q, double tol = kHyperboloidTol) {
  return q.c[0] > 0.0 && std::abs(inner(q, q) + 1.0) <= tol;
}

/// Hyperbolic stereographic projection Phi(q) = (q^1..q^m) / (1 + q^0).
inline DiskPoint stereographic(const LorentzVec& q) {
  if (!on_unit_hyperboloid(q)) throw DomainError("stereographic: point is not on the future unit hyperboloid");
  return DiskPoint(q.spatial() / (1.0 + q.c[0]));
}

/// Phi^{-1}(x) = (lambda - 1, lambda x).
inline LorentzVec inverse_stereographic(const DiskPoint& x) {
  const double r2 = x.norm2();
  if (!(r2 < 1.0)) throw DomainError("inverse_stereographic: |x| >= 1");
  const double lam = 2.0 / (1.0 - r2);
  Eigen::VectorXd c(x.dim() + 1);
  c[0] = lam - 1.0;
  c.tail(x.dim()) = lam * x.x;
  return LorentzVec(std::move(c));
}

/// Geodesic polar coordinates (s, theta) on H^2 to the Poincare disk:
/// Euclidean radius tanh(s/2), same angle.
inline DiskPoint geodesic_polar_to_disk(double s, double theta) {
  if (s < 0.0) throw DomainError("geodesic_polar_to_disk: s < 0");
  const double rho = std::tanh(0.5 * s);
  return DiskPoint{rho * std::cos(theta), rho * std::sin(theta)};
}

/// Point of H^2 at geodesic polar coordinates (s, theta) about the vertex E0.
inline LorentzVec hyperboloid_point(double s, double theta) {
  return LorentzVec{std::cosh(s), std::sinh(s) * std::cos(theta), std::sinh(s) * std::sin(theta)};
}

/// Hyperbolic distance between two points of H^m.
inline double hyperbolic_distance(const LorentzVec& p, const LorentzVec& q) {
  return std::acosh(std::max(1.0, -inner(p, q)));
}

/// Hyperbolic radius of a disk point: 2 artanh |x|.
inline double disk_radius(const DiskPoint& x) { return 2.0 * std::atanh(std::sqrt(x.norm2())); }

}  // namespace lpmc
