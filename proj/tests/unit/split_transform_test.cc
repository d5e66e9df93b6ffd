#include "icbt/split_transform.h"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <functional>
#include <random>

namespace icbt::split {
namespace {

TEST(Matching, MidpointIsZero) {
  EXPECT_NEAR(matching_transform(1.5, 1.0, 2.0), 0.0, 1e-15);
  EXPECT_NEAR(matching_transform(0.0, -3.0, 3.0), 0.0, 1e-15);
}

TEST(Matching, RoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(-5.0, 5.0), frac(0.001, 0.999), width(0.01, 4.0);
  for (int t = 0; t < 1000; ++t) {
    const double lo = unif(rng), hi = lo + width(rng);
    const double x = lo + (hi - lo) * frac(rng);
    EXPECT_NEAR(matching_inverse(matching_transform(x, lo, hi), lo, hi), x, 1e-12);
    const double y = unif(rng);
    const double back = matching_inverse(y, lo, hi);
    EXPECT_GT(back, lo);
    EXPECT_LT(back, hi);
  }
}

TEST(Matching, StrictlyIncreasing) {
  double prev = -INFINITY;
  for (double x = 0.01; x < 1.0; x += 0.01) {
    const double y = matching_transform(x, 0.0, 1.0);
    EXPECT_GT(y, prev);
    prev = y;
  }
}

TEST(Matching, OutsideIntervalIsAnError) {
  EXPECT_THROW(matching_transform(1.0, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(matching_transform(2.5, 1.0, 2.0), std::invalid_argument);
}

TEST(Split, ZeroAuxiliaryIsDegenerate) {
  auto s = split_interior(0.8, 0.0, 0.3, 1.7);
  EXPECT_NEAR(s.low, 0.8, 1e-14);
  EXPECT_NEAR(s.high, 0.8, 1e-14);
  auto r = split_reflected_upper(0.8, 0.0, 0.3);
  EXPECT_NEAR(r.low, 0.8, 1e-14);
  EXPECT_NEAR(r.high, 0.8, 1e-14);
  auto l = split_reflected_lower(-0.8, 0.0, 0.0);
  EXPECT_NEAR(l.low, -0.8, 1e-14);
  EXPECT_NEAR(l.high, -0.8, 1e-14);
}

TEST(Split, LevelsStayOrderedInsideBounds) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> frac(0.01, 0.99);
  std::exponential_distribution<double> ud(0.5);
  for (int t = 0; t < 1000; ++t) {
    const double lo = 0.2, hi = 1.4, x = lo + (hi - lo) * frac(rng), u = ud(rng) + 1e-6;
    auto s = split_interior(x, u, lo, hi);
    EXPECT_LT(lo, s.low);
    EXPECT_LT(s.low, s.high);
    EXPECT_LT(s.high, hi);
    auto r = split_reflected_upper(x, u, lo);
    EXPECT_LT(lo, r.low);
    EXPECT_LT(r.low, r.high);
    EXPECT_LT(r.high, 2 * x - lo);
  }
}

TEST(Split, MergeInvertsSplit) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> frac(0.05, 0.95), ud(0.01, 3.0);
  for (int t = 0; t < 200; ++t) {
    const double lo = -0.5, hi = 2.0, x = lo + (hi - lo) * frac(rng), u = ud(rng);
    auto s = split_interior(x, u, lo, hi);
    auto m = merge_interior(s.low, s.high, lo, hi);
    EXPECT_NEAR(m.level, x, 1e-10);
    EXPECT_NEAR(m.u, u, 1e-9);
    EXPECT_NEAR(m.log_jacobian, s.log_jacobian, 1e-9);

    auto su = split_reflected_upper(x, u, lo);
    auto mu = merge_reflected_upper(su.low, su.high, lo);
    EXPECT_NEAR(mu.level, x, 1e-12);
    EXPECT_NEAR(mu.u, u, 1e-9);
    EXPECT_NEAR(mu.log_jacobian, su.log_jacobian, 1e-9);

    auto sl = split_reflected_lower(x, u, hi);
    auto ml = merge_reflected_lower(sl.low, sl.high, hi);
    EXPECT_NEAR(ml.level, x, 1e-12);
    EXPECT_NEAR(ml.u, u, 1e-9);

    for (std::optional<double> nb : {std::optional<double>(1.3), std::optional<double>(-0.9),
                                     std::optional<double>()}) {
      auto z = split_zero(u, nb, -1);
      auto mz = merge_zero(z.level, nb);
      EXPECT_NEAR(mz.u, u, 1e-9);
      EXPECT_NEAR(mz.log_jacobian, z.log_jacobian, 1e-9);
    }
  }
}

// |det| of the 2x2 Jacobian of (x, u) -> f(x, u) by central differences.
double fd_det(const std::function<std::pair<double, double>(double, double)>& f, double x, double u) {
  const double h = 1e-6;
  auto [a1, b1] = f(x + h, u);
  auto [a0, b0] = f(x - h, u);
  auto [c1, d1] = f(x, u + h);
  auto [c0, d0] = f(x, u - h);
  const double dax = (a1 - a0) / (2 * h), dbx = (b1 - b0) / (2 * h);
  const double dau = (c1 - c0) / (2 * h), dbu = (d1 - d0) / (2 * h);
  return std::abs(dax * dbu - dau * dbx);
}

TEST(Split, AnalyticJacobiansMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> frac(0.1, 0.9), ud(0.05, 2.5);
  for (int t = 0; t < 100; ++t) {
    const double lo = 0.3, hi = 1.9, x = lo + (hi - lo) * frac(rng), u = ud(rng);
    auto interior = [&](double a, double b) {
      auto s = split_interior(a, b, lo, hi);
      return std::pair{s.low, s.high};
    };
    auto upper = [&](double a, double b) {
      auto s = split_reflected_upper(a, b, lo);
      return std::pair{s.low, s.high};
    };
    auto lower = [&](double a, double b) {
      auto s = split_reflected_lower(a, b, hi);
      return std::pair{s.low, s.high};
    };
    const double ji = std::exp(split_interior(x, u, lo, hi).log_jacobian);
    const double ju = std::exp(split_reflected_upper(x, u, lo).log_jacobian);
    const double jl = std::exp(split_reflected_lower(x, u, hi).log_jacobian);
    EXPECT_NEAR(fd_det(interior, x, u) / ji, 1.0, 1e-6);
    EXPECT_NEAR(fd_det(upper, x, u) / ju, 1.0, 1e-6);
    EXPECT_NEAR(fd_det(lower, x, u) / jl, 1.0, 1e-6);

    const double nb = 0.4 + x;
    const double h = 1e-6;
    const double dz = (split_zero(u + h, nb, 1).level - split_zero(u - h, nb, 1).level) / (2 * h);
    EXPECT_NEAR(std::abs(dz) / std::exp(split_zero(u, nb, 1).log_jacobian), 1.0, 1e-6);
  }
}

TEST(Auxiliary, ScaledChiSquareDensity) {
  boost::math::chi_squared chi(1.0);
  for (double u : {0.1, 0.7, 2.0, 5.0}) {
    EXPECT_NEAR(log_scaled_chi2_1(u, 1.0), std::log(boost::math::pdf(chi, u)), 1e-12);
    EXPECT_NEAR(log_scaled_chi2_1(u, 2.5), std::log(boost::math::pdf(chi, u / 2.5) / 2.5), 1e-12);
  }
  EXPECT_EQ(log_scaled_chi2_1(0.0, 1.0), -INFINITY);
}

}  // namespace
}  // namespace icbt::split
