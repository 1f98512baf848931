#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kpo/error.hpp"
#include "kpo/scaling.hpp"

using namespace kpo;

namespace {

// Truncated norm sum_{n<dim} e^-x x^n / n! with terms built from lgamma.
double truncated_norm(double x, std::size_t dim) {
  long double sum = 0.0L;
  for (std::size_t n = 0; n < dim; ++n) {
    const double nd = static_cast<double>(n);
    sum += std::exp(static_cast<long double>(-x + (n == 0 ? 0.0 : nd * std::log(x)) - std::lgamma(nd + 1)));
  }
  return std::sqrt(static_cast<double>(sum));
}

}  // namespace

TEST(FitExponential, ExactExponentialThreePoints) {
  const GapScalingFit f = fit_exponential({{1, std::exp(-6.0)}, {2, std::exp(-12.0)}, {3, std::exp(-18.0)}});
  EXPECT_NEAR(f.delta, 6.0, 1e-12);
  EXPECT_NEAR(f.delta_stderr, 0.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
  EXPECT_NEAR(f.prefactor_log, 0.0, 1e-12);
}

TEST(FitExponential, TwoPointsRecoverPrefactor) {
  const GapScalingFit f = fit_exponential({{1, 2 * std::exp(-6.0)}, {2, 2 * std::exp(-12.0)}});
  EXPECT_NEAR(f.delta, 6.0, 1e-12);
  EXPECT_NEAR(f.prefactor_log, std::log(2.0), 1e-12);
  EXPECT_EQ(f.delta_stderr, 0.0);
}

TEST(FitExponential, PlantedParametersWithNoise) {
  std::mt19937 rng(21);
  std::normal_distribution<double> noise(0.0, 0.01);
  const double delta = 7.3, pre = 1.7;
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 20; ++i) {
    const double ne = 0.5 + 0.2 * i;
    pts.emplace_back(ne, std::exp(pre - delta * ne) * (1 + noise(rng)));
  }
  const GapScalingFit f = fit_exponential(pts);
  EXPECT_LT(std::abs(f.delta - delta), 2 * f.delta_stderr);
  EXPECT_GT(f.delta_stderr, 0.0);
  EXPECT_GT(f.r_squared, 0.999);
  EXPECT_LE(f.r_squared, 1.0);
}

TEST(FitExponential, RejectsBadInput) {
  EXPECT_THROW(fit_exponential({{1, 1e-3}}), InvalidParameter);
  EXPECT_THROW(fit_exponential({{1, 1e-3}, {2, 0.0}}), InvalidParameter);
  EXPECT_THROW(fit_exponential({{1, 1e-3}, {2, -1e-4}}), InvalidParameter);
  EXPECT_THROW(fit_exponential({{1, 1e-3}, {1, 1e-4}}), InvalidParameter);
}

TEST(FitScaling, UsesOnlyConvergedPointsAtFullWidth) {
  std::vector<ScalingPoint> pts;
  for (int i = 1; i <= 5; ++i) {
    ScalingPoint p;
    p.n_e = i;
    // exp(-400 i) is far below the double range.
    p.gap = mp::exp(mp::Float(-400.0 * i, 256));
    p.converged = i != 3;
    pts.push_back(p);
  }
  pts[2].gap = mp::Float(1.0, 256);
  const GapScalingFit f = fit_scaling(pts);
  EXPECT_NEAR(f.delta, 400.0, 1e-9);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f.points.size(), 5u);

  for (auto& p : pts) p.converged = false;
  pts[0].converged = true;
  EXPECT_THROW(fit_scaling(pts), ConvergenceError);
}

TEST(DeltaApp, Values) {
  EXPECT_EQ(delta_app(-30.0), 60.0);
  EXPECT_EQ(delta_app(-50.0), 100.0);
  EXPECT_EQ(delta_app(0.0), 0.0);
  EXPECT_EQ(delta_app(4.0), 8.0);
}

TEST(CoherentState, TruncatedNormMatchesSeries) {
  for (double x : {0.5, 1.0, 5.0, 20.0}) {
    for (std::size_t dim : {4u, 16u, 64u}) {
      const CoherentState s = CoherentState::make(std::sqrt(x), dim);
      EXPECT_NEAR(s.norm(), truncated_norm(x, dim), 1e-12) << x << " " << dim;
    }
  }
  EXPECT_NEAR(CoherentState::make({0.0, 3.0}, 200).norm(), 1.0, 1e-14);
  EXPECT_THROW(CoherentState::make(1.0, 0), InvalidParameter);
}

TEST(CoherentOverlap, MatchesClosedForm) {
  const OverlapResult one = coherent_overlap(-1.0, 1.0, 64);
  EXPECT_NEAR(one.numeric, std::exp(-2.0), 1e-14);
  EXPECT_NEAR(one.analytic, 0.1353352832366127, 1e-15);
  EXPECT_FALSE(one.norm_warning);

  const OverlapResult five = coherent_overlap(-5.0, 1.0, 128);
  EXPECT_NEAR(five.numeric, five.analytic, 1e-12);
  EXPECT_NEAR(five.analytic, std::exp(-10.0), 1e-18);

  const OverlapResult positive = coherent_overlap(2.5, 2.0, 128);
  EXPECT_NEAR(positive.numeric, std::exp(-10.0), 1e-12);
}

TEST(CoherentOverlap, SelfOverlapIsNorm) {
  const CoherentState s = CoherentState::make({1.2, -0.7}, 80);
  EXPECT_NEAR(std::abs(overlap(s, s) - 1.0), 0.0, 1e-14);
}

TEST(CoherentOverlap, DiscrepancyShrinksWithDimension) {
  double previous = 1.0;
  for (std::size_t dim = 2; dim <= 24; dim += 2) {
    const OverlapResult r = coherent_overlap(-3.0, 1.0, dim);
    const double err = std::abs(r.numeric - r.analytic);
    if (previous < 1e-15) break;
    EXPECT_LE(err, previous) << dim;
    previous = err;
  }
  EXPECT_TRUE(coherent_overlap(-3.0, 1.0, 6).norm_warning);
}

TEST(CoherentOverlap, Validation) {
  EXPECT_THROW(coherent_overlap(0.0, 1.0, 32), InvalidParameter);
  EXPECT_THROW(coherent_overlap(-1.0, 0.0, 32), InvalidParameter);
}

TEST(GapScaling, DefaultsFollowParityConvention) {
  EXPECT_EQ(default_gap_index(0.0), 2u);
  EXPECT_EQ(default_gap_index(-30 / std::sqrt(2.0)), 0u);
  const auto grid = default_ne_grid();
  ASSERT_EQ(grid.size(), 8u);
  EXPECT_DOUBLE_EQ(grid.front(), 0.5);
  EXPECT_DOUBLE_EQ(grid.back(), 4.0);
  for (std::size_t i = 2; i < grid.size(); ++i) {
    EXPECT_NEAR(grid[i] / grid[i - 1], grid[1] / grid[0], 1e-12);
  }
}

TEST(GapScaling, SymmetricSweepIsNearlyExponential) {
  const auto points = gap_scaling_sweep(0.0, -4.0, std::nullopt, {1.0, 2.0, 3.0, 4.0});
  ASSERT_EQ(points.size(), 4u);
  for (const ScalingPoint& p : points) {
    EXPECT_TRUE(p.converged) << p.n_e;
    EXPECT_EQ(p.gap_index, 2u);
  }
  const GapScalingFit fit = fit_scaling(points);
  EXPECT_GT(fit.r_squared, 0.98);
  EXPECT_GT(fit.delta, 0.5 * delta_app(-4.0));
  EXPECT_LT(fit.delta, 1.2 * delta_app(-4.0));
}

TEST(GapScaling, DeformedUsesGroundGapAndOverride) {
  const double xi1 = 4 / std::sqrt(2.0);
  const auto points = gap_scaling_sweep(xi1, -4.0, std::nullopt, {1.0, 1.5, 2.0, 2.5});
  for (const ScalingPoint& p : points) EXPECT_EQ(p.gap_index, 0u);
  const auto forced = gap_scaling_sweep(xi1, -4.0, 1, {1.0, 1.5, 2.0, 2.5});
  for (const ScalingPoint& p : forced) EXPECT_EQ(p.gap_index, 1u);
}

TEST(GapScaling, Validation) {
  EXPECT_THROW(gap_scaling_sweep(0.0, -4.0, std::nullopt, {1, 2, 3}), InvalidParameter);
  EXPECT_THROW(gap_scaling_sweep(0.0, -4.0, std::nullopt, {1, 3, 2, 4}), InvalidParameter);
  EXPECT_THROW(gap_scaling_sweep(0.0, -4.0, std::nullopt, {-1, 1, 2, 3}), InvalidParameter);
}
