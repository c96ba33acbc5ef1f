#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lpmc/identities.hpp"
#include "lpmc/polar_grid.hpp"
#include "oracles.hpp"

using namespace lpmc;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("lpmc_polar_" + name)).string();
}

}  // namespace

TEST(PolarGrid, Validation) {
  EXPECT_THROW(PolarGrid(2, 8, 1.0), UsageError);
  EXPECT_THROW(PolarGrid(8, 7, 1.0), UsageError);
  EXPECT_THROW(PolarGrid(8, 2, 1.0), UsageError);
  EXPECT_THROW(PolarGrid(8, 8, 0.0), UsageError);
  EXPECT_THROW(PolarGrid(8, 8, -1.0), UsageError);
  EXPECT_NO_THROW(PolarGrid(3, 4, 0.1));
}

TEST(PolarGrid, Spacing) {
  const PolarGrid g(16, 32, 2.0);
  EXPECT_DOUBLE_EQ(g.ds(), 0.125);
  EXPECT_DOUBLE_EQ(g.dth(), 2 * oracle::pi / 32);
  EXPECT_EQ(g.size(), 1u + 16u * 32u);
  EXPECT_NEAR(disk_radius(g.disk_point(16, 3)), 2.0, 1e-12);
}

TEST(PolarGrid, IndexRoundTripAndSingleValuedPole) {
  const PolarGrid g(5, 8, 1.0);
  for (int j = -3; j < 12; ++j) EXPECT_EQ(g.index(0, j), 0u);
  for (std::size_t k = 1; k < g.size(); ++k) {
    const auto [i, j] = g.node(k);
    EXPECT_EQ(g.index(i, j), k);
    EXPECT_EQ(g.index(i, j + 8), k);
    EXPECT_EQ(g.index(i, j - 8), k);
  }
  ScalarField f(g);
  f.at(0, 5) = 2.5;
  EXPECT_EQ(f.at(0, 0), 2.5);
  EXPECT_EQ(f.pole(), 2.5);
}

TEST(PoleFit, ExactForQuadratics) {
  const PolarGrid g(10, 16, 1.0);
  const double c = 0.3;
  const Eigen::Vector2d gr(0.2, -0.1);
  Eigen::Matrix2d Q;
  Q << 0.4, 0.1, 0.1, -0.3;
  const ScalarField f = sample_field(g, [&](double s, double th) {
    const Eigen::Vector2d y(s * std::cos(th), s * std::sin(th));
    return c + gr.dot(y) + 0.5 * y.dot(Q * y);
  });
  const PoleFit p = pole_fit(f);
  EXPECT_NEAR(p.c, c, 1e-13);
  EXPECT_LT((p.g - gr).norm(), 1e-12);
  EXPECT_LT((p.Q - Q).norm(), 1e-11);
  EXPECT_NEAR(node_grad_norm(f, 0, 0), gr.norm(), 1e-12);
}

TEST(PolarJet, SecondOrderInteriorAndBoundary) {
  // u = 0.2 sinh(s) cos(theta) + 0.1 s^2: exact partials known
  auto u = [](double s, double th) { return 0.2 * std::sinh(s) * std::cos(th) + 0.1 * s * s; };
  auto err = [&](int ns, int i_frac_num) {
    const PolarGrid g(ns, 2 * ns, 2.0);
    const ScalarField f = sample_field(g, u);
    const int i = i_frac_num < 0 ? ns : ns * i_frac_num / 4;
    const int j = 2 * ns / 8;
    const double s = g.s(i), th = g.theta(j);
    const Jet jet = polar_jet(f, i, j);
    const double us = 0.2 * std::cosh(s) * std::cos(th) + 0.2 * s, ut = -0.2 * std::sinh(s) * std::sin(th);
    const double uss = 0.2 * std::sinh(s) * std::cos(th) + 0.2, ust = -0.2 * std::cosh(s) * std::sin(th);
    const double utt = -0.2 * std::sinh(s) * std::cos(th);
    return std::max({std::abs(jet.du[0] - us), std::abs(jet.du[1] - ut), std::abs(jet.ddu(0, 0) - uss),
                     std::abs(jet.ddu(0, 1) - ust), std::abs(jet.ddu(1, 1) - utt)});
  };
  for (int where : {2, -1}) {
    const double e1 = err(32, where), e2 = err(64, where);
    EXPECT_LT(e2, 2e-3);
    EXPECT_GT(e1 / e2, 3.2) << where;
  }
  const ScalarField f(PolarGrid(4, 8, 1.0));
  EXPECT_THROW(polar_jet(f, 0, 0), UsageError);
  EXPECT_THROW(polar_jet(f, 5, 0), UsageError);
}

TEST(PolarJet, PoincareConversion) {
  // u(x) = 0.3 x0 + 0.5 x0 x1 - 0.2 x1^2 in disk coordinates
  auto ux = [](const Eigen::Vector2d& x) { return 0.3 * x[0] + 0.5 * x[0] * x[1] - 0.2 * x[1] * x[1]; };
  const Eigen::Vector2d x0 = geodesic_polar_to_disk(1.0, 0.75 * oracle::pi).x;
  const Eigen::Vector2d du(0.3 + 0.5 * x0[1], 0.5 * x0[0] - 0.4 * x0[1]);
  Eigen::Matrix2d ddu;
  ddu << 0.0, 0.5, 0.5, -0.4;
  double prev = 0.0;
  for (int ns : {32, 64}) {
    const PolarGrid g(ns, 8 * ns / 2, 2.0);
    const ScalarField f = sample_field(g, [&](double s, double th) { return ux(geodesic_polar_to_disk(s, th).x); });
    const int i = ns / 2, j = 3 * g.n_th / 8;
    const Jet pj = polar_to_poincare_jet(polar_jet(f, i, j), g.s(i), g.theta(j));
    const double e = std::max((pj.du - du).cwiseAbs().maxCoeff(), (pj.ddu - ddu).cwiseAbs().maxCoeff());
    EXPECT_LT(e, 5e-3);
    if (prev > 0.0) EXPECT_GT(prev / e, 3.2);
    prev = e;
  }
}

TEST(FieldCurvature, HyperboloidAtPoleAndRings) {
  for (double l : {0.5, 2.0}) {
    const ScalarField f(PolarGrid(8, 16, 2.0), std::log(l));
    for (int i : {0, 1, 4, 8}) {
      const CurvatureSample cs = field_curvature(f, i, 3);
      EXPECT_NEAR(cs.H, 1.0 / l, 1e-12);
      EXPECT_NEAR(cs.K, 1.0 / (l * l), 1e-12);
      EXPECT_NEAR(cs.w, 1.0, 1e-15);
    }
  }
}

TEST(FieldCurvature, BumpConvergesToAnalytic) {
  const auto bump = polar_bump_graph();
  auto err = [&](int ns) {
    const ScalarField f = sample_field(PolarGrid(ns, 2 * ns, 3.0), [&](double s, double) { return bump.value(Eigen::Vector2d(s, 0.0)); });
    double e = 0.0;
    for (int i = ns / 8; i < ns; i += ns / 8) {
      const double s = f.grid.s(i);
      e = std::max(e, std::abs(field_curvature(f, i, 5).H - bump.mean_curvature(Eigen::Vector2d(s, f.grid.theta(5)))));
    }
    return e;
  };
  const double e1 = err(32), e2 = err(64);
  EXPECT_LT(e2, 1e-3);
  EXPECT_GT(e1 / e2, 3.2);
  // pole: H from the quadratic fit, compared with the limit s -> 0 of the analytic graph
  const ScalarField f = sample_field(PolarGrid(128, 256, 3.0), [&](double s, double) { return bump.value(Eigen::Vector2d(s, 0.0)); });
  EXPECT_NEAR(field_curvature(f, 0, 0).H, bump.mean_curvature(Eigen::Vector2d(1e-4, 0.0)), 1e-3);
}

TEST(Interpolate, ExactOnNodesAndLinearInS) {
  const PolarGrid g(8, 16, 2.0);
  const ScalarField f = sample_field(g, [](double s, double th) { return 0.1 * s + 0.05 * std::cos(th) * s; });
  EXPECT_NEAR(interpolate(f, g.s(3), g.theta(5)), f.at(3, 5), 1e-15);
  EXPECT_NEAR(interpolate(f, g.s(3), g.theta(5) + 2 * oracle::pi), f.at(3, 5), 1e-14);
  EXPECT_NEAR(interpolate(f, g.s(3), g.theta(5) - 4 * oracle::pi), f.at(3, 5), 1e-14);
  EXPECT_NEAR(interpolate(f, 0.5 * (g.s(3) + g.s(4)), g.theta(2)), 0.5 * (f.at(3, 2) + f.at(4, 2)), 1e-15);
  EXPECT_NEAR(interpolate(f, 0.0, 1.0), f.pole(), 1e-15);
  EXPECT_NEAR(interpolate(f, 2.0, g.theta(1)), f.at(8, 1), 1e-15);
  EXPECT_THROW(interpolate(f, 2.1, 0.0), DomainError);
  EXPECT_THROW(interpolate(f, -0.1, 0.0), DomainError);
}

TEST(FieldSandwich, ConstantFields) {
  const PolarGrid g(8, 16, 2.0);
  EXPECT_TRUE(alc_sandwich_check(sample_heights(ScalarField(g, 0.0)), 0.5, 2.0).alc);
  const SandwichResult r = alc_sandwich_check(sample_heights(ScalarField(g, std::log(3.0))), 0.5, 2.0);
  EXPECT_FALSE(r.alc);
  EXPECT_EQ(r.violations, g.size());
  EXPECT_NE(r.first_failure->find("node (0, 0)"), std::string::npos);
}

TEST(FieldIo, TextRoundTripIsExact) {
  const ScalarField f = sample_field(PolarGrid(6, 12, 1.7), [](double s, double th) { return std::sin(3 * s) * std::cos(th) / 7.0; });
  const std::string path = temp_path("round.txt");
  write_field(path, f);
  const ScalarField g = read_field(path);
  EXPECT_TRUE(g.grid == f.grid);
  EXPECT_EQ(g.values, f.values);
  std::ifstream is(path);
  std::string first;
  std::getline(is, first);
  EXPECT_EQ(first, "m 2");
  std::filesystem::remove(path);
}

TEST(FieldIo, JsonRoundTripIsExact) {
  const ScalarField f = sample_field(PolarGrid(5, 8, 2.3), [](double s, double th) { return std::exp(-s) * std::sin(th) / 3.0; });
  const std::string path = temp_path("round.json");
  write_field(path, f, true);
  const ScalarField g = read_field(path);
  EXPECT_TRUE(g.grid == f.grid);
  EXPECT_EQ(g.values, f.values);
  std::filesystem::remove(path);
}

TEST(FieldIo, Errors) {
  EXPECT_THROW(read_field(temp_path("does_not_exist")), IoError);
  auto write = [](const std::string& name, const std::string& body) {
    const std::string p = temp_path(name);
    std::ofstream(p) << body;
    return p;
  };
  const std::string truncated = write("trunc.txt", "m 2\nn_s 3\nn_th 4\ns_max 1\n0 0 0\n");
  EXPECT_THROW(read_field(truncated), UsageError);
  const std::string m3 = write("m3.txt", "m 3\nn_s 3\nn_th 4\ns_max 1\n");
  EXPECT_THROW(read_field(m3), UsageError);
  std::string body = "m 2\nn_s 3\nn_th 4\ns_max 1\n";
  for (int k = 0; k < 13; ++k) body += "0\n";
  const std::string ok = write("ok.txt", body);
  EXPECT_NO_THROW(read_field(ok));
  const std::string trailing = write("trail.txt", body + "5\n");
  EXPECT_THROW(read_field(trailing), UsageError);
  const std::string badkey = write("key.txt", "m 2\nrings 3\n");
  EXPECT_THROW(read_field(badkey), UsageError);
  const std::string badjson = write("bad.json", "{\"m\": 2, \"n_s\": 3");
  EXPECT_THROW(read_field(badjson), UsageError);
  const std::string count = write("count.json", "{\"m\": 2, \"n_s\": 3, \"n_th\": 4, \"s_max\": 1, \"values\": [0, 1]}");
  EXPECT_THROW(read_field(count), UsageError);
  for (const auto& p : {truncated, m3, ok, trailing, badkey, badjson, count}) std::filesystem::remove(p);
}
