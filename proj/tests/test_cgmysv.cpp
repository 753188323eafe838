#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cgmysv/cgmysv.hpp"
#include "cgmysv/density.hpp"
#include "support.hpp"

using namespace cgmysv;

namespace {
const CgmysvParams kParams{};  // alpha .52, lambda 25.46/4.604, kappa 1.003, eta .0711, zeta .3443, rho -2.028, v0 .0064
}

TEST(CgmysvCf, NormalisedAtZero) {
  for (double t : {0.01, 0.5, 2.0}) EXPECT_EQ(cgmysv_cf(kParams, 0.0, t), cplx(1.0, 0.0));
}

TEST(CgmysvCf, DeterministicClockLimit) {
  CgmysvParams p = kParams;
  p.rho = 0.0;
  p.zeta = 1e-8;
  p.eta = p.v0;
  const double t = 0.3;
  for (double u = -20.0; u <= 20.0; u += 0.5) {
    const cplx expected = std::exp(p.v0 * t * levy_symbol(p.cgmy(), u));
    EXPECT_LT(std::abs(cgmysv_cf(p, u, t) - expected), 1e-4) << u;
  }
}

TEST(CgmysvCf, ConjugateSymmetryAndBound) {
  for (double u = -60.0; u <= 60.0; u += 0.3) {
    const cplx a = cgmysv_cf(kParams, u, 0.2), b = cgmysv_cf(kParams, -u, 0.2);
    EXPECT_LE(std::abs(a), 1.0 + 1e-12);
    EXPECT_NEAR(std::abs(std::conj(a) - b), 0.0, 1e-13);
  }
}

TEST(CgmysvCf, MatchesMonteCarloAverage) {
  const double t = 10.0 / 252.0;
  const auto ps = generate_paths(kParams, t, 10, 10'000, 1024, StreamSeeds(31));
  const auto L = ps.L.column(10);
  for (double u : {1.0, 5.0, 10.0}) {
    std::vector<double> re(L.size()), im(L.size());
    for (std::size_t n = 0; n < L.size(); ++n) {
      re[n] = std::cos(u * L[n]);
      im[n] = std::sin(u * L[n]);
    }
    const auto mr = testutil::moments(re), mi = testutil::moments(im);
    const cplx phi = cgmysv_cf(kParams, u, t);
    EXPECT_NEAR(mr.mean, phi.real(), 4.0 * mr.se_mean()) << u;
    EXPECT_NEAR(mi.mean, phi.imag(), 4.0 * mi.se_mean()) << u;
  }
}

TEST(MartingaleCorrection, StartsAtLeverageTerm) {
  EXPECT_DOUBLE_EQ(cgmysv_log_mgf_one(kParams, 0.0), kParams.rho * kParams.v0);
  const double m = cgmysv_log_mgf_one(kParams, 0.25);
  EXPECT_TRUE(std::isfinite(m));
  CgmysvParams bad = kParams;
  bad.lambda_plus = 0.9;
  EXPECT_THROW(cgmysv_log_mgf_one(bad, 0.25), ValidationError);
}

TEST(GeneratePaths, InitialValuesAndNonNegativeVariance) {
  auto opts = PathOptions{};
  opts.keep_y = true;
  const auto ps = generate_paths(kParams, 0.5, 50, 200, 256, StreamSeeds(32), opts);
  ASSERT_TRUE(ps.y.has_value());
  for (std::size_t n = 0; n < ps.paths(); ++n) {
    EXPECT_EQ((*ps.y)(n, 0), 0.0);
    EXPECT_DOUBLE_EQ(ps.L(n, 0), kParams.rho * kParams.v0);
    for (std::size_t m = 0; m < ps.times.size(); ++m) {
      ASSERT_GE(ps.v(n, m), 0.0);
      ASSERT_DOUBLE_EQ(ps.L(n, m), (*ps.y)(n, m) + kParams.rho * ps.v(n, m));
    }
  }
}

TEST(GeneratePaths, RejectsEmptyDimensions) {
  EXPECT_THROW(generate_paths(kParams, 0.5, 0, 10, 10, StreamSeeds(1)), ValidationError);
  EXPECT_THROW(generate_paths(kParams, 0.5, 10, 0, 10, StreamSeeds(1)), ValidationError);
  EXPECT_THROW(generate_paths(kParams, 0.5, 10, 10, 0, StreamSeeds(1)), ValidationError);
  EXPECT_THROW(generate_paths(kParams, 0.0, 10, 10, 10, StreamSeeds(1)), ValidationError);
}

TEST(GeneratePaths, BitwiseDeterministicAcrossThreadCounts) {
  const auto a = generate_paths(kParams, 0.4, 40, 300, 512, StreamSeeds(33), {false, 1});
  const auto b = generate_paths(kParams, 0.4, 40, 300, 512, StreamSeeds(33), {false, 1});
  const auto c = generate_paths(kParams, 0.4, 40, 300, 512, StreamSeeds(33), {false, 3});
  EXPECT_EQ(a.L, b.L);
  EXPECT_EQ(a.v, b.v);
  EXPECT_EQ(a.L, c.L);
  EXPECT_EQ(a.v, c.v);
}

TEST(GeneratePaths, SeriesSeedChangesJumpsButNotVariance) {
  const auto a = generate_paths(kParams, 0.4, 40, 100, 512, StreamSeeds(34, 1));
  const auto b = generate_paths(kParams, 0.4, 40, 100, 512, StreamSeeds(34, 2));
  EXPECT_EQ(a.v, b.v);
  EXPECT_NE(a.L, b.L);
}

TEST(GeneratePaths, SymmetricModelHasSymmetricMarginal) {
  CgmysvParams p = kParams;
  p.rho = 0.0;
  p.lambda_plus = p.lambda_minus = 25.46;
  const std::size_t n = 10'000;
  const auto ps = generate_paths(p, 50.0 / 252.0, 50, static_cast<int>(n), 1024, StreamSeeds(35));
  const auto x = ps.L.column(50);
  const auto m = testutil::moments(x);
  // The time change makes L leptokurtic, so the normal-theory sqrt(6/n)
  // understates the sampling error of the skewness.
  EXPECT_LT(std::abs(m.skew), 4.0 * m.se_skew());
  const auto positive = std::count_if(x.begin(), x.end(), [](double v) { return v > 0.0; });
  EXPECT_NEAR(static_cast<double>(positive) / n, 0.5, 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST(GeneratePaths, GridRefinementWithinKsBand) {
  const double T = 100.0 / 252.0;
  const auto cdf = cgmysv_cdf(kParams, T);
  auto ks = [&](int steps, std::uint64_t seed) {
    auto x = generate_paths(kParams, T, steps, 10'000, 1024, StreamSeeds(seed)).L.column(steps);
    std::sort(x.begin(), x.end());
    return ks_test(x, cdf).statistic;
  };
  const double band = 1.358 / std::sqrt(1e4);
  EXPECT_LT(std::abs(ks(100, 36) - ks(200, 37)), band);
}
