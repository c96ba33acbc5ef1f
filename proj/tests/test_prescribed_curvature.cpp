#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lpmc/prescribed_curvature.hpp"
#include "oracles.hpp"

using namespace lpmc;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("lpmc_curv_" + name)).string();
}

const DiskPoint kCenter{0.0, 0.0};
const DiskPoint kOff{0.4, -0.2};

}  // namespace

TEST(Builtins, Constant) {
  const auto H = constant_curvature(1.5);
  EXPECT_DOUBLE_EQ(H.Hbar(0.3, kOff), 1.5);
  EXPECT_NEAR(H.theta(0.3, kOff), 1.5 * std::exp(0.3), 1e-15);
  EXPECT_NEAR(H.dtheta(0.3, kOff), 1.5 * std::exp(0.3), 1e-15);
  EXPECT_TRUE(H.radial);
}

TEST(Builtins, InverseDistance) {
  const auto H = inverse_distance_curvature();
  for (double t : {-1.0, 0.0, 0.7}) {
    EXPECT_NEAR(H.theta(t, kOff), 1.0, 1e-15);
    EXPECT_EQ(H.dtheta(t, kOff), 0.0);
  }
}

TEST(Builtins, RationalFamily) {
  const auto H = rational_curvature({});
  // Hbar = 2l/(1+l^2) equals 1 on the unit hyperboloid
  EXPECT_NEAR(H.Hbar(0.0, kOff), 1.0, 1e-15);
  for (double t : {-1.0, 0.0, 0.5}) {
    const double e = std::exp(2 * t);
    EXPECT_NEAR(H.theta(t, kOff), 2 * e / (1 + e), 1e-14);
    EXPECT_NEAR(H.dtheta(t, kOff), 4 * e / ((1 + e) * (1 + e)), 1e-14);
    EXPECT_GT(H.dtheta(t, kOff), 0.0);
  }
  EXPECT_TRUE(H.radial);

  RationalParams p;
  p.a = 0.2;
  p.w = 0.5;
  const auto B = rational_curvature(p);
  EXPECT_TRUE(B.radial);
  EXPECT_NEAR(B.Hbar(0.0, kCenter), 1.2, 1e-14);
  const double s = disk_radius(kOff);
  EXPECT_NEAR(B.Hbar(0.0, kOff), 1.0 + 0.2 * std::exp(-(s / 0.5) * (s / 0.5)), 1e-13);

  p.center = Eigen::Vector2d(0.3, 0.1);
  const auto C = rational_curvature(p);
  EXPECT_FALSE(C.radial);
  EXPECT_NEAR(C.Hbar(0.0, DiskPoint{0.3, 0.1}), 1.2, 1e-12);
}

TEST(Builtins, RationalValidation) {
  RationalParams p;
  p.w = 0.0;
  EXPECT_THROW(rational_curvature(p), UsageError);
  p = {};
  p.center = Eigen::Vector2d(1.0, 0.0);
  EXPECT_THROW(rational_curvature(p), UsageError);
  p = {};
  p.a = -0.6;
  EXPECT_THROW(rational_curvature(p), UsageError);
}

TEST(Builtins, FiniteDifferenceThetaDerivative) {
  auto H = rational_curvature({0.3, 0.8, Eigen::Vector2d::Zero()});
  const double analytic = H.dtheta(0.4, kOff);
  H.dTheta_dt = nullptr;
  EXPECT_NEAR(H.dtheta(0.4, kOff), analytic, 1e-9);
}

TEST(Parse, Builtins) {
  EXPECT_DOUBLE_EQ(parse_curvature("const:2").Hbar(0.0, kCenter), 2.0);
  EXPECT_NEAR(parse_curvature("inv").theta(0.5, kOff), 1.0, 1e-15);
  EXPECT_NEAR(parse_curvature("rational").Hbar(0.0, kOff), 1.0, 1e-15);
  const auto r = parse_curvature("rational:a=0.2,w=0.5,cx=0.1,cy=-0.1");
  EXPECT_FALSE(r.radial);
  EXPECT_NEAR(r.Hbar(0.0, DiskPoint{0.1, -0.1}), 1.2, 1e-12);
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse_curvature("const:-1"), UsageError);
  EXPECT_THROW(parse_curvature("const:0"), UsageError);
  EXPECT_THROW(parse_curvature("const:abc"), UsageError);
  EXPECT_THROW(parse_curvature("const:1x"), UsageError);
  EXPECT_THROW(parse_curvature("const"), UsageError);
  EXPECT_THROW(parse_curvature("inv:2"), UsageError);
  EXPECT_THROW(parse_curvature("rational:bogus=1"), UsageError);
  EXPECT_THROW(parse_curvature("rational:a"), UsageError);
  EXPECT_THROW(parse_curvature("rational:a=nan"), UsageError);
  EXPECT_THROW(parse_curvature("rational:cx=2"), UsageError);
  EXPECT_THROW(parse_curvature("cubic:1"), UsageError);
  EXPECT_THROW(parse_curvature("table:"), UsageError);
  EXPECT_THROW(parse_curvature("table:" + temp_path("missing.csv")), IoError);
}

TEST(Table, RoundTripAndInterpolation) {
  CurvatureTable tab;
  for (int k = 0; k <= 8; ++k) tab.t.push_back(-1.0 + 0.25 * k);
  for (int i = 0; i <= 10; ++i) tab.s.push_back(0.5 * i);
  tab.H.resize(9, 11);
  // linear data is reproduced exactly by Catmull-Rom away from the edges
  auto lin = [](double t, double s) { return 1.0 + 0.2 * t - 0.03 * s; };
  for (int k = 0; k <= 8; ++k)
    for (int i = 0; i <= 10; ++i) tab.H(k, i) = lin(tab.t[k], tab.s[i]);
  const std::string path = temp_path("tab.csv");
  write_curvature_table(path, tab);
  const CurvatureTable back = read_curvature_table(path);
  EXPECT_EQ(back.t, tab.t);
  EXPECT_EQ(back.s, tab.s);
  EXPECT_EQ((back.H - tab.H).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(back(0.0, 2.0), lin(0.0, 2.0), 1e-14);
  EXPECT_NEAR(back(0.1, 1.3), lin(0.1, 1.3), 1e-14);
  EXPECT_NEAR(back(-0.4, 3.7), lin(-0.4, 3.7), 1e-14);
  // clamped outside the range
  EXPECT_NEAR(back(5.0, 1.0), lin(1.0, 1.0), 1e-14);
  EXPECT_NEAR(back(0.0, 99.0), lin(0.0, 5.0), 1e-14);

  const auto H = parse_curvature("table:" + path);
  EXPECT_TRUE(H.radial);
  EXPECT_DOUBLE_EQ(H.t_min, -1.0);
  EXPECT_DOUBLE_EQ(H.t_max, 1.0);
  const DiskPoint x = geodesic_polar_to_disk(1.3, 0.4);
  EXPECT_NEAR(H.Hbar(0.1, x), lin(0.1, 1.3), 1e-12);
  std::filesystem::remove(path);
}

TEST(Table, SmoothDataConverges) {
  auto fn = [](double t, double s) { return std::exp(-0.3 * t) / (1.0 + 0.1 * s * s); };
  auto err = [&](int n) {
    CurvatureTable tab;
    for (int k = 0; k <= n; ++k) tab.t.push_back(-1.0 + 2.0 * k / n);
    for (int i = 0; i <= n; ++i) tab.s.push_back(4.0 * i / n);
    tab.H.resize(n + 1, n + 1);
    for (int k = 0; k <= n; ++k)
      for (int i = 0; i <= n; ++i) tab.H(k, i) = fn(tab.t[k], tab.s[i]);
    double e = 0.0;
    for (double t : {-0.33, 0.1, 0.57})
      for (double s : {1.1, 2.3, 2.9}) e = std::max(e, std::abs(tab(t, s) - fn(t, s)));
    return e;
  };
  const double e1 = err(8), e2 = err(16);
  EXPECT_LT(e2, 1e-4);
  EXPECT_GT(e1 / e2, 6.0);
}

TEST(Table, Errors) {
  auto write = [](const std::string& name, const std::string& body) {
    const std::string p = temp_path(name);
    std::ofstream(p) << body;
    return p;
  };
  const std::string ragged = write("ragged.csv", "t/s,0,1\n0,1,1\n1,1\n");
  EXPECT_THROW(read_curvature_table(ragged), UsageError);
  const std::string bad = write("bad.csv", "t/s,0,1\n0,1,x\n1,1,1\n");
  EXPECT_THROW(read_curvature_table(bad), UsageError);
  const std::string order = write("order.csv", "t/s,1,0\n0,1,1\n1,1,1\n");
  EXPECT_THROW(read_curvature_table(order), UsageError);
  const std::string small = write("small.csv", "t/s,0,1\n0,1,1\n");
  EXPECT_THROW(read_curvature_table(small), UsageError);
  const std::string comments = write("comments.csv", "# header comment\nt/s,0,1\n\n0,1,1\n1,2,2\n");
  EXPECT_NEAR(read_curvature_table(comments)(0.5, 0.5), 1.5, 1e-14);
  for (const auto& p : {ragged, bad, order, small, comments}) std::filesystem::remove(p);
}

TEST(Hypotheses, Constant) {
  const auto r = check_hypotheses(constant_curvature(1.0));
  EXPECT_TRUE(r.h1);
  EXPECT_TRUE(r.h1_prime);
  EXPECT_GT(r.h1_min, 0.0);
  EXPECT_TRUE(r.h2);
  EXPECT_NEAR(r.h2_Lambda, 1.0, 1e-12);
  EXPECT_TRUE(r.h3);
  EXPECT_TRUE(r.hbar_positive);
  EXPECT_TRUE(certify_h3(constant_curvature(1.0), 0.5, 2.0));
  ASSERT_TRUE(r.h3_l && r.h3_L);
  EXPECT_LE(*r.h3_l, 1.0);
  EXPECT_GE(*r.h3_L, 1.0);
  EXPECT_TRUE(certify_h3(constant_curvature(1.0), *r.h3_l, *r.h3_L));
}

TEST(Hypotheses, RationalFamily) {
  const auto H = rational_curvature({});
  const auto r = check_hypotheses(H);
  EXPECT_TRUE(r.h1);
  EXPECT_TRUE(r.h1_prime);
  EXPECT_TRUE(r.h3);
  for (double l : {0.5, 0.8, 0.95})
    for (double L : {1.05, 1.25, 2.0}) EXPECT_TRUE(certify_h3(H, l, L)) << l << " " << L;
  EXPECT_FALSE(certify_h3(H, 1.0, 1.25));
}

TEST(Hypotheses, InverseDistanceIsBorderline) {
  const auto H = inverse_distance_curvature();
  const auto r = check_hypotheses(H);
  EXPECT_TRUE(r.h1);
  EXPECT_FALSE(r.h1_prime);
  EXPECT_EQ(r.h1_min, 0.0);
  EXPECT_FALSE(r.h3);
  EXPECT_FALSE(certify_h3(H, 0.5, 2.0));
}

TEST(Hypotheses, OffCenterBumpUsesAngularSamples) {
  RationalParams p;
  p.a = 0.2;
  p.center = Eigen::Vector2d(0.3, 0.1);
  const auto H = rational_curvature(p);
  const auto r = check_hypotheses(H);
  EXPECT_TRUE(r.h1_prime);
  EXPECT_TRUE(r.h3);
  EXPECT_TRUE(certify_h3(H, 0.8, 1.25));
  EXPECT_EQ(r.sampling.n_theta, SamplingSpec{}.n_theta);
}

TEST(Hypotheses, DecreasingThetaFailsH1) {
  PrescribedCurvature H;
  H.Hbar = [](double t, const DiskPoint&) { return std::exp(-2.0 * t); };
  H.radial = true;
  const auto r = check_hypotheses(H);
  EXPECT_FALSE(r.h1);
  EXPECT_LT(r.h1_min, 0.0);
}

TEST(Hypotheses, Errors) {
  auto H = constant_curvature(1.0);
  H.t_min = 0.2;
  EXPECT_THROW(check_hypotheses(H), UsageError);
  SamplingSpec sp;
  sp.n_t = 1;
  EXPECT_THROW(check_hypotheses(constant_curvature(1.0), sp), UsageError);
  EXPECT_THROW(certify_h3(constant_curvature(1.0), 1.2, 2.0), UsageError);
  EXPECT_THROW(certify_h3(constant_curvature(1.0), 0.5, 0.9), UsageError);
}
