#include <gtest/gtest.h>

#include <random>

#include "sononav/stats.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace sononav;
using namespace sononav::stats;

namespace {

const std::vector<double> kA{1, 2, 3, 4, 5};
const std::vector<double> kB{2, 3, 4, 5, 6};
const std::vector<double> kA2{10.1, 9.8, 11.2, 10.5, 9.9, 10.7, 10.0};
const std::vector<double> kB2{9.0, 12.5, 8.1, 11.9, 10.4, 7.7, 13.1, 9.6};
const std::vector<double> kBefore{31.2, 28.4, 35.1, 40.3, 27.9, 33.3, 29.8, 36.4, 30.0, 38.2,
                                  26.5, 34.7, 32.1, 29.3, 37.6, 31.9, 28.8, 35.5, 33.0, 30.7};
const std::vector<double> kAfter{29.0, 27.1, 33.9, 36.8, 28.3, 30.2, 27.5, 35.0, 29.4, 34.1,
                                 25.9, 33.0, 30.3, 28.9, 34.2, 30.8, 27.1, 33.9, 31.2, 29.9};

std::vector<double> normal_sample(std::mt19937_64& rng, std::size_t n, double mean, double sd) {
  std::normal_distribution<double> d(mean, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

}  // namespace

// Reference values computed once with scipy.stats and frozen here.
TEST(StatsReference, StudentTCdf) {
  struct Case {
    double t, df, cdf;
  };
  for (const Case c : {Case{0.5, 3, 0.6742760175759246}, Case{-2.1, 7.5, 0.03561853572903902},
                       Case{3.3, 12, 0.9968296249468565}, Case{0.001, 40, 0.5003964568569713},
                       Case{-0.7, 1, 0.3055998877857853}, Case{12.0, 5, 0.9999645525374142},
                       Case{2.0, 308, 0.9768109617425949}}) {
    EXPECT_NEAR(student_t_cdf(c.t, c.df), c.cdf, 1e-12) << c.t << " " << c.df;
    EXPECT_NEAR(student_t_sf(c.t, c.df), 1.0 - c.cdf, 1e-12);
  }
}

TEST(StatsReference, WelchPooledPaired) {
  auto r = welch_t(kA, kB);
  EXPECT_NEAR(r.t, -1.0, 1e-12);
  EXPECT_NEAR(r.df, 8.0, 1e-12);
  EXPECT_NEAR(r.p, 0.34659350708733416, 1e-12);

  r = welch_t(kA2, kB2);
  EXPECT_NEAR(r.t, 0.03594697561985935, 1e-12);
  EXPECT_NEAR(r.df, 7.984083505942883, 1e-10);
  EXPECT_NEAR(r.p, 0.9722071333043141, 1e-12);

  r = welch_t(kA2, kB2, VarianceModel::Pooled);
  EXPECT_NEAR(r.t, 0.03374609873843976, 1e-12);
  EXPECT_NEAR(r.df, 13.0, 1e-12);
  EXPECT_NEAR(r.p, 0.9735922599475331, 1e-12);

  r = paired_t(kBefore, kAfter);
  EXPECT_NEAR(r.t, 6.710160818168912, 1e-10);
  EXPECT_NEAR(r.df, 19.0, 1e-12);
  EXPECT_NEAR(r.p, 2.0544313205428476e-06, 1e-15);
}

TEST(StatsReference, Tost) {
  auto r = tost(kA2, kB2, {1.5, 1.5});
  EXPECT_NEAR(r.p_lower, 0.03734827368684411, 1e-12);
  EXPECT_NEAR(r.p_upper, 0.04174801957641152, 1e-12);
  EXPECT_NEAR(r.df, 7.984083505942883, 1e-10);
  EXPECT_TRUE(r.equivalent);

  r = tost(kBefore, kAfter, {3.0, 3.0});
  EXPECT_NEAR(r.p_lower, 5.7805513759261004e-05, 1e-14);
  EXPECT_NEAR(r.p_upper, 0.12226533358103404, 1e-12);
  EXPECT_NEAR(r.df, 36.42929354879877, 1e-10);
  EXPECT_FALSE(r.equivalent);
}

TEST(StatsReference, LeastEquivalenceIntervalClosedForm) {
  const double range_a = 13.1 - 7.7;
  EXPECT_NEAR(least_equivalence_interval(kA2, kB2), 1.4127770896176621, 1e-6 * 10.0 * range_a);
  const double range_b = 40.3 - 25.9;
  EXPECT_NEAR(least_equivalence_interval(kBefore, kAfter), 3.5506598907107656, 1e-6 * 10.0 * range_b);
}

TEST(StatsOracle, TCdfMatchesNumericalIntegration) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(-6.0, 6.0), df(1.0, 80.0);
  for (int i = 0; i < 200; ++i) {
    const double tv = t(rng), dv = df(rng);
    ASSERT_NEAR(student_t_cdf(tv, dv), oracle::t_cdf(tv, dv), 1e-9) << tv << " " << dv;
  }
}

TEST(StatsOracle, WelchMatchesDirectFormula) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto a = normal_sample(rng, 5 + i % 20, 0.0, 1.0);
    const auto b = normal_sample(rng, 8 + i % 13, 0.3, 2.0);
    const auto got = welch_t(a, b);
    const auto want = oracle::welch(a, b);
    ASSERT_NEAR(got.t, want.t, 1e-9);
    ASSERT_NEAR(got.df, want.df, 1e-9);
    ASSERT_NEAR(got.p, want.p, 1e-9);
  }
}

TEST(StatsProperty, NullPValuesAreUniform) {
  // Kolmogorov-Smirnov against U(0, 1) at the 1% level.
  std::vector<double> p;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    std::mt19937_64 rng(seed);
    p.push_back(welch_t(normal_sample(rng, 12, 5.0, 1.0), normal_sample(rng, 17, 5.0, 2.5)).p);
  }
  std::sort(p.begin(), p.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double n = static_cast<double>(p.size());
    ks = std::max({ks, static_cast<double>(i + 1) / n - p[i], p[i] - static_cast<double>(i) / n});
  }
  EXPECT_LT(ks, 1.63 / std::sqrt(1000.0));
}

TEST(StatsProperty, LeastEquivalenceIntervalMatchesGridScan) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = normal_sample(rng, 20, 0.0, 1.0);
    const auto b = normal_sample(rng, 25, 0.2, 1.3);
    const double lei = least_equivalence_interval(a, b);
    // Smallest grid point (step 1e-5) that is declared equivalent.
    double grid = 0.0;
    for (double d = 1e-5;; d += 1e-5) {
      if (tost(a, b, {d, d}).equivalent) {
        grid = d;
        break;
      }
    }
    EXPECT_NEAR(lei, grid, 1e-4);
    EXPECT_TRUE(tost(a, b, {lei, lei}).equivalent);
    EXPECT_FALSE(tost(a, b, {lei * (1 - 1e-4), lei * (1 - 1e-4)}).equivalent);
  }
}

TEST(StatsProperty, LeastEquivalenceIntervalShrinksWithSampleSize) {
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n : {10u, 20u, 40u, 80u, 155u, 320u}) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      std::mt19937_64 rng(seed * 1000 + n);
      sum += least_equivalence_interval(normal_sample(rng, n, 0.0, 1.0), normal_sample(rng, n, 0.0, 1.0));
    }
    const double mean = sum / 40.0;
    EXPECT_LT(mean, previous) << n;
    previous = mean;
  }
}

TEST(StatsProperty, IdenticalArmsAreEquivalentAtDesignSize) {
  std::mt19937_64 rng(155);
  const auto a = normal_sample(rng, 155, 1.0, 0.5);
  const auto r = tost(a, a, {0.25, 0.25});
  EXPECT_TRUE(r.equivalent);
  EXPECT_LT(r.p_lower, 0.05);
  EXPECT_LT(r.p_upper, 0.05);
  EXPECT_NEAR(r.p_lower, r.p_upper, 1e-15);
}

TEST(StatsProperty, DisjointSamplesNeedWideInterval) {
  const std::vector<double> a{0.0, 0.1, 0.2, 0.3}, b{10.0, 10.1, 10.2, 10.3};
  const double lei = least_equivalence_interval(a, b);
  EXPECT_GT(lei, 10.0);
  EXPECT_LT(lei, 10.5);
}

TEST(Stats, MeanSd) {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  const auto s = mean_sd(x);
  EXPECT_EQ(s.n, 8u);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.sd, std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_EQ(mean_sd(std::vector<double>{}).n, 0u);
}

TEST(Stats, IncompleteBetaEdges) {
  EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
  // I_x(1, 1) = x and I_x(a, 1) = x^a.
  EXPECT_NEAR(incomplete_beta(1, 1, 0.3), 0.3, 1e-15);
  EXPECT_NEAR(incomplete_beta(2.5, 1, 0.6), std::pow(0.6, 2.5), 1e-14);
  EXPECT_ERROR_CODE(incomplete_beta(0, 1, 0.5), ErrorCode::InvalidArgument);
}

TEST(Stats, Errors) {
  const std::vector<double> one{1.0}, flat{2, 2, 2}, flat2{3, 3, 3};
  EXPECT_ERROR_CODE(welch_t(one, kA), ErrorCode::InvalidArgument);
  EXPECT_ERROR_CODE(welch_t(flat, flat2), ErrorCode::DegenerateVariance);
  EXPECT_ERROR_CODE(paired_t(kA, kA2), ErrorCode::LengthMismatch);
  EXPECT_ERROR_CODE(paired_t(kA, kB), ErrorCode::DegenerateVariance);  // constant nonzero shift
  const auto same = paired_t(kA, kA);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 1.0);
  EXPECT_ERROR_CODE(tost(kA, kB, {0.0, 1.0}), ErrorCode::InvalidArgument);
  EXPECT_ERROR_CODE(tost(kA, kB, {1.0, 1.0}, 1.5), ErrorCode::InvalidArgument);
  const std::vector<double> nan{1.0, std::nan("")};
  EXPECT_ERROR_CODE(welch_t(nan, kA), ErrorCode::InvalidArgument);
  // With df near 1 and a tiny alpha the critical t is far beyond 10x the data range.
  const std::vector<double> a{0.0, 1.0}, b{0.5, 0.6};
  EXPECT_ERROR_CODE(least_equivalence_interval(a, b, 1e-6), ErrorCode::NonBracketable);
  EXPECT_ERROR_CODE(least_equivalence_interval(flat, flat), ErrorCode::NonBracketable);
}
