#include <gtest/gtest.h>

#include "lpmc/curvature_integrals.hpp"
#include "oracles.hpp"

using namespace lpmc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(v.size());
  int k = 0;
  for (double a : v) x[k++] = a;
  return x;
}

std::vector<CurvatureSample> interior_samples(const SurfaceSampling& s) {
  std::vector<CurvatureSample> out;
  for (std::size_t k = 0; k < s.curv.size(); ++k)
    if (s.interior[k]) out.push_back(s.curv[k]);
  return out;
}

double relerr(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Constants, BallAndSphere) {
  EXPECT_NEAR(unit_ball_volume(2), oracle::pi, 1e-15);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 * oracle::pi / 3.0, 1e-14);
  EXPECT_NEAR(unit_sphere_area(2), 2.0 * oracle::pi, 1e-14);
  EXPECT_NEAR(unit_sphere_area(3), 4.0 * oracle::pi, 1e-14);
}

TEST(Constants, GaussLegendreExactness) {
  const auto [x, w] = gauss_legendre(5);
  for (int d = 0; d <= 9; ++d) {
    double q = 0.0;
    for (int i = 0; i < 5; ++i) q += w[i] * std::pow(x[i], d);
    EXPECT_NEAR(q, d % 2 ? 0.0 : 2.0 / (d + 1), 1e-14) << d;
  }
}

TEST(SigmaPlus, Masks) {
  const BoxGrid g(2, 2.0, 21);
  for (bool b : sigma_plus_mask(interior_samples(sample_surface(hyperboloid_surface(2), g)))) EXPECT_TRUE(b);
  for (bool b : sigma_plus_mask(interior_samples(sample_surface(affine_surface(vec({0.3, 0.1})), g)))) EXPECT_FALSE(b);
  const auto sad = sigma_plus_mask(interior_samples(sample_surface(saddle_surface(2), BoxGrid(2, 3.0, 61))));
  const auto n_in = std::count(sad.begin(), sad.end(), true);
  EXPECT_GT(n_in, 0);
  EXPECT_LT(static_cast<std::size_t>(n_in), sad.size());
  CurvatureSample degenerate;
  degenerate.principal = vec({1.0, 0.0});
  EXPECT_FALSE(in_sigma_plus(degenerate));
  EXPECT_FALSE(in_sigma_plus(CurvatureSample{}));
}

TEST(BallMoments, HyperboloidClosedForms) {
  for (int m : {2, 3})
    for (double l : {0.5, 1.0, 2.0}) {
      const double R = 3.0;
      const MomentsEstimate e = ball_moments(hyperboloid_surface(m, l), R, 2.0);
      EXPECT_LT(relerr(e.value.willmore, oracle::hyperboloid_willmore(m, R, l)), 1e-8) << m << " " << l;
      // |{|x| <= R}| in dv is the hyperbolic ball of radius l asinh(R / l)
      const double rho = l * std::asinh(R / l);
      const double area = m == 2 ? oracle::hyperbolic_disk_area(rho, l) : oracle::hyperbolic_ball_volume(rho, l);
      EXPECT_LT(relerr(e.value.area, area), 1e-8);
      EXPECT_LT(relerr(e.value.lp, area / (l * l)), 1e-8);
      EXPECT_LT(relerr(e.value.gauss_plus, area * std::pow(l, -m)), 1e-8);
      EXPECT_DOUBLE_EQ(e.value.plus_area, e.value.area);
      EXPECT_LT(e.tolerance.willmore, 1e-6 * e.value.willmore);
    }
  EXPECT_THROW(ball_moments(hyperboloid_surface(2), 0.0), UsageError);
  EXPECT_THROW(ball_moments(hyperboloid_surface(2), 1.0, 2.0, BallQuadrature{7, 24}), UsageError);
  EXPECT_THROW(ball_moments(hyperboloid_surface(2), 1.0, 2.0, BallQuadrature{8, 2}), UsageError);
  EXPECT_THROW(ball_moments(hyperboloid_surface(4), 1.0), UsageError);
}

TEST(BallMoments, GeodesicRadiusOnHyperboloid) {
  for (double l : {0.5, 1.0, 2.0})
    for (double rho : {0.0, 0.3, 1.0, 4.0}) EXPECT_NEAR(geodesic_to_euclidean_radius(hyperboloid_surface(2, l), rho), l * std::sinh(rho / l), 1e-9 * std::max(1.0, l * std::sinh(rho / l)));
  EXPECT_THROW(geodesic_to_euclidean_radius(saddle_surface(2), 1.0), UsageError);
  EXPECT_THROW(geodesic_to_euclidean_radius(hyperboloid_surface(2), -1.0), UsageError);
}

TEST(Willmore, HyperboloidAttainsEquality) {
  for (int m : {2, 3})
    for (double l : {0.5, 1.0, 2.0}) {
      const double R = 50.0;
      const WillmoreReport r = willmore_integral(hyperboloid_surface(m, l), R);
      EXPECT_LT(relerr(r.integral, oracle::hyperboloid_willmore(m, R, l)), 1e-8);
      EXPECT_NEAR(r.lower_bound, unit_ball_volume(m), 1e-14);
      EXPECT_LT(r.integral, r.lower_bound);
      const double tail = r.lower_bound - oracle::hyperboloid_willmore(m, R, l);
      EXPECT_LT(relerr(r.tail_estimate, tail), 1e-3);
      EXPECT_LT(std::abs(r.integral + r.tail_estimate - r.lower_bound), 1e-7);
      EXPECT_TRUE(r.bound_holds());
      EXPECT_EQ(r.sigma_plus_fraction, 1.0);
    }
}

TEST(Willmore, PerturbationsAreStrictAndMonotone) {
  double prev = 0.0;
  for (double eps : {0.05, 0.1, 0.2}) {
    const WillmoreReport r = willmore_integral(perturbed_hyperboloid(2, eps), 1000.0);
    const double gap = r.integral + r.tail_estimate - r.lower_bound;
    EXPECT_GT(gap, 10.0 * (r.quadrature_tolerance + 1e-6)) << eps;
    EXPECT_GT(gap, prev);
    prev = gap;
  }
  const WillmoreReport r3 = willmore_integral(perturbed_hyperboloid(3, 0.1), 200.0);
  EXPECT_GT(r3.integral + r3.tail_estimate, r3.lower_bound);
}

TEST(Willmore, AffineAndSaddleFractions) {
  const WillmoreReport a = willmore_integral(affine_surface(vec({0.2, 0.0})), 5.0);
  EXPECT_EQ(a.integral, 0.0);
  EXPECT_EQ(a.sigma_plus_fraction, 0.0);
  EXPECT_FALSE(a.bound_holds());
  const WillmoreReport s = willmore_integral(saddle_surface(2), 20.0);
  EXPECT_GT(s.sigma_plus_fraction, 0.0);
  EXPECT_LT(s.sigma_plus_fraction, 1.0);
}

TEST(Willmore, FieldMatchesClosedForm) {
  const CartesianField f = sample_cartesian(BoxGrid(2, 10.0, 201), hyperboloid_surface(2));
  const WillmoreReport r = willmore_integral(f, 9.0);
  EXPECT_LT(relerr(r.integral, oracle::hyperboloid_willmore(2, 9.0)), 1e-3);
  EXPECT_LT(r.quadrature_tolerance, 1e-2);
  EXPECT_EQ(r.sigma_plus_fraction, 1.0);
  EXPECT_LT(relerr(r.tail_estimate, oracle::pi / 82.0), 0.05);
  EXPECT_THROW(willmore_integral(f, 10.0), UsageError);
}

TEST(GaussEstimate, HyperboloidIsSharp) {
  for (double l : {0.5, 1.0, 2.0}) {
    for (double rho : {0.5, 2.0}) {
      const GaussEstimate g2 = local_gauss_estimate(hyperboloid_surface(2, l), rho);
      const double area = oracle::hyperbolic_disk_area(rho, l);
      EXPECT_LT(relerr(g2.area, area), 1e-8);
      EXPECT_LT(relerr(g2.lhs, std::sqrt(area) / l), 1e-8);
      EXPECT_LT(relerr(g2.rhs, g2.lhs), 1e-12);
      EXPECT_TRUE(g2.holds());
    }
    const GaussEstimate g3 = local_gauss_estimate(hyperboloid_surface(3, l), 1.0);
    EXPECT_LT(relerr(g3.area, oracle::hyperbolic_ball_volume(1.0, l)), 1e-8);
    EXPECT_LT(relerr(g3.rhs, g3.lhs), 1e-12);
    EXPECT_TRUE(g3.holds());
  }
}

TEST(GaussEstimate, SaddleAndAffine) {
  const GaussEstimate s = local_gauss_estimate(saddle_surface(2), 1.5, {}, GridOptions{0.02});
  EXPECT_TRUE(s.holds());
  EXPECT_GT(s.lhs, s.rhs + s.tolerance);
  EXPECT_GT(s.area, 0.0);
  const GaussEstimate a = local_gauss_estimate(affine_surface(vec({0.5, 0.0})), 1.0, {}, GridOptions{0.02});
  EXPECT_EQ(a.rhs, 0.0);
  EXPECT_EQ(a.lhs, 0.0);
  EXPECT_LT(relerr(a.area, oracle::pi), 0.05);
  EXPECT_TRUE(a.holds());
}

TEST(GaussEstimate, FieldPath) {
  const CartesianField f = sample_cartesian(BoxGrid(2, 3.0, 121), hyperboloid_surface(2));
  const GaussEstimate g = local_gauss_estimate(f, 1.5);
  const double area = oracle::hyperbolic_disk_area(1.5);
  EXPECT_LT(relerr(g.area, area), 0.08);
  EXPECT_LT(relerr(g.rhs, g.lhs), 1e-3);
  EXPECT_TRUE(g.holds());
  EXPECT_THROW(local_gauss_estimate(f, 10.0), DomainError);
  EXPECT_THROW(local_gauss_estimate(f, 0.0), UsageError);
  EXPECT_THROW(local_gauss_estimate(hyperboloid_surface(2), -1.0), UsageError);
}

TEST(Growth, HyperboloidSeries) {
  const std::vector<double> radii{0.5, 1.0, 2.0, 4.0};
  const GrowthSeries g = lp_growth(hyperboloid_surface(2), 2.0, radii);
  ASSERT_EQ(g.lp_integrals.size(), radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double area = oracle::hyperbolic_disk_area(radii[k]);
    EXPECT_LT(relerr(g.lp_integrals[k], area), 1e-8);
    EXPECT_LT(relerr(g.lp_norms[k], std::sqrt(area)), 1e-8);
    EXPECT_LT(relerr(g.gauss_image_measure[k], area), 1e-8);
    EXPECT_LT(relerr(g.areas[k], area), 1e-8);
  }
  EXPECT_TRUE(g.nondecreasing);
  EXPECT_TRUE(g.lower_bound_ok);
  EXPECT_FALSE(g.plateau);
  const GrowthSeries g3 = lp_growth(hyperboloid_surface(2, 2.0), 3.0, radii);
  EXPECT_TRUE(g3.holder_ok);
  EXPECT_TRUE(g3.nondecreasing);
}

TEST(Growth, NonSymmetricAndFieldSeries) {
  const GrowthSeries s = lp_growth(saddle_surface(2), 2.0, {0.5, 1.0, 1.5}, {}, GridOptions{0.025});
  EXPECT_TRUE(s.nondecreasing);
  EXPECT_TRUE(s.lower_bound_ok);
  const CartesianField f = sample_cartesian(BoxGrid(2, 3.0, 121), perturbed_hyperboloid(2, 0.1));
  const GrowthSeries gf = lp_growth(f, 3.0, {0.5, 1.0, 1.5});
  EXPECT_TRUE(gf.nondecreasing);
  EXPECT_TRUE(gf.holder_ok);
  EXPECT_GT(gf.lp_integrals.back(), gf.lp_integrals.front());
}

TEST(Growth, Plateau) {
  // a Gaussian bump over a spacelike plane: the L^2 mass of H saturates
  const CartesianField f = sample_cartesian(BoxGrid(2, 6.0, 241), [](const Eigen::VectorXd& x) { return 0.2 * std::exp(-x.squaredNorm()); });
  const GrowthSeries b = lp_growth(f, 2.0, {1.0, 4.0, 5.0});
  EXPECT_TRUE(b.nondecreasing);
  EXPECT_TRUE(b.plateau);
  EXPECT_GT(b.lp_integrals.back(), 0.0);
  const GrowthSeries a = lp_growth(parse_surface("affine:a=0.0", 2), 2.0, {1.0, 2.0}, {}, GridOptions{0.05});
  EXPECT_FALSE(a.plateau);
  EXPECT_EQ(a.lp_integrals.back(), 0.0);
  EXPECT_FALSE(lp_growth(hyperboloid_surface(2), 2.0, {1.0, 8.0, 9.0}).plateau);
}

TEST(Growth, Errors) {
  const auto s = hyperboloid_surface(2);
  EXPECT_THROW(lp_growth(s, 0.5, {1.0}), UsageError);
  EXPECT_THROW(lp_growth(s, 2.0, {}), UsageError);
  EXPECT_THROW(lp_growth(s, 2.0, {1.0, 1.0}), UsageError);
  EXPECT_THROW(lp_growth(s, 2.0, {-1.0}), UsageError);
  EXPECT_THROW(lp_growth(hyperboloid_surface(4), 2.0, {1.0}), UsageError);
}
