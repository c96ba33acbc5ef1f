#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <random>

#include "lpmc/curvature_integrals.hpp"
#include "lpmc/parallel.hpp"
#include "lpmc/pmc_solver.hpp"

using namespace lpmc;

namespace {

/// Restores the thread setting on scope exit.
struct ThreadScope {
  explicit ThreadScope(int n) { set_thread_count(n); }
  ~ThreadScope() { set_thread_count(0); }
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<double> spread_values(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> e(-30.0, 30.0), s(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = s(rng) * std::exp(e(rng));
  return v;
}

}  // namespace

TEST(ThreadCount, SettingAndEnvironment) {
  set_thread_count(0);
  unsetenv("PMC_THREADS");
  EXPECT_EQ(thread_count(), 1);
  setenv("PMC_THREADS", "3", 1);
  EXPECT_EQ(thread_count(), 3);
  setenv("PMC_THREADS", "junk", 1);
  EXPECT_EQ(thread_count(), 1);
  {
    ThreadScope t(5);
    EXPECT_EQ(thread_count(), 5);
  }
  unsetenv("PMC_THREADS");
  EXPECT_EQ(thread_count(), 1);
  EXPECT_THROW(set_thread_count(-1), UsageError);
}

TEST(Kahan, RecoversLostLowOrderBits) {
  KahanSum k;
  double naive = 1.0;
  k.add(1.0);
  for (int i = 0; i < 1000000; ++i) {
    k.add(1e-16);
    naive += 1e-16;
  }
  EXPECT_EQ(naive, 1.0);
  EXPECT_NEAR(k.value(), 1.0 + 1e-10, 1e-22);
  KahanSum big;
  for (double x : {1.0, 1e100, 1.0, -1e100}) big.add(x);
  EXPECT_EQ(big.value(), 2.0);
}

TEST(Chunks, EveryIndexOnceWithFixedBoundaries) {
  for (int threads : {1, 2, 7}) {
    ThreadScope t(threads);
    for (std::size_t n : {0u, 1u, 1023u, 1024u, 1025u, 5000u}) {
      std::vector<std::atomic<int>> hits(n);
      std::vector<std::pair<std::size_t, std::size_t>> bounds((n + kChunk - 1) / kChunk);
      parallel_chunks(n, [&](std::size_t b, std::size_t e, std::size_t c) {
        bounds[c] = {b, e};
        for (std::size_t i = b; i < e; ++i) ++hits[i];
      });
      for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(hits[i].load(), 1);
      for (std::size_t c = 0; c < bounds.size(); ++c) {
        EXPECT_EQ(bounds[c].first, c * kChunk);
        EXPECT_EQ(bounds[c].second, std::min(n, (c + 1) * kChunk));
      }
    }
  }
}

TEST(Reductions, BitIdenticalAcrossThreadCounts) {
  for (std::size_t n : {0u, 1u, 1023u, 1025u, 100000u}) {
    const auto v = spread_values(n, static_cast<unsigned>(n) + 1);
    double sum1 = 0.0, max1 = 0.0;
    {
      ThreadScope t(1);
      sum1 = parallel_sum(n, [&](std::size_t i) { return v[i]; });
      max1 = parallel_max(n, [&](std::size_t i) { return v[i]; });
    }
    for (int threads : {2, 3, 8}) {
      ThreadScope t(threads);
      EXPECT_TRUE(same_bits(parallel_sum(n, [&](std::size_t i) { return v[i]; }), sum1)) << n << " " << threads;
      EXPECT_TRUE(same_bits(parallel_max(n, [&](std::size_t i) { return v[i]; }), max1));
    }
  }
  ThreadScope t(4);
  EXPECT_EQ(parallel_sum(0, [](std::size_t) { return 1.0; }), 0.0);
  EXPECT_EQ(parallel_max(0, [](std::size_t) { return 1.0; }), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(parallel_sum(3000, [](std::size_t i) { return static_cast<double>(i); }), 2999.0 * 3000.0 / 2.0);
}

TEST(Kernels, BitIdenticalAcrossThreadCounts) {
  const CartesianField f = sample_cartesian(BoxGrid(2, 4.0, 81), perturbed_hyperboloid(2, 0.1));
  RationalParams p;
  p.a = 0.2;
  const PrescribedCurvature theta = rational_curvature(p);
  auto run = [&](int threads) {
    ThreadScope t(threads);
    const WillmoreReport w = willmore_integral(f, 3.5);
    const MomentsEstimate b = ball_moments(perturbed_hyperboloid(3, 0.1), 2.0, 3.0, BallQuadrature{64, 8});
    const auto [u, rep] = solve_dirichlet(theta, PolarGrid(16, 32, 3.0));
    return std::vector<double>{w.integral, w.tail_estimate, b.value.willmore, b.value.gauss_plus, rep.residual_norm, u.values[37], u.pole()};
  };
  const auto ref = run(1);
  for (int threads : {2, 5}) {
    const auto got = run(threads);
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_TRUE(same_bits(got[k], ref[k])) << k << " " << threads;
  }
}
