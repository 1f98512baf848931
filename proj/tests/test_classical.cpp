#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kpo/classical.hpp"
#include "kpo/eigensolver.hpp"
#include "kpo/error.hpp"

using namespace kpo;

namespace {

const double kXi1Deformed = -30 / std::sqrt(2.0);

// Root of q^3 + 40 q - 30 by bisection, the p = 0 stationary point at
// (xi1, xi2) = (-30/sqrt(2), -20).
double bisect_deformed_root() {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid * mid + 40 * mid - 30 > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::array<double, 2> centroid(const Polyline& line) {
  double q = 0.0, p = 0.0;
  const std::size_t n = line.points.size() - (line.closed ? 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    q += line.points[i][0];
    p += line.points[i][1];
  }
  return {q / static_cast<double>(n), p / static_cast<double>(n)};
}

double area(const Polyline& line) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < line.points.size(); ++i) {
    a += line.points[i][0] * line.points[i + 1][1] - line.points[i + 1][0] * line.points[i][1];
  }
  return 0.5 * std::abs(a);
}

double grid_step(const ContourGrid& g) {
  return (g.q_max - g.q_min) / static_cast<double>(g.resolution - 1);
}

}  // namespace

TEST(HClass, ClosedFormValues) {
  EXPECT_EQ(h_class(0, 0, 3.0, -7.0), 0.0);
  EXPECT_NEAR(h_class(std::sqrt(40.0), 0, 0.0, 20.0), -400.0, 1e-12);
  EXPECT_NEAR(h_class(1.0, 2.0, 0.5, 1.5), 25.0 / 4 - 1.5 * (1 - 4) + std::sqrt(2.0) * 0.5, 1e-14);
}

TEST(HClass, ReflectionSymmetries) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 1000; ++i) {
    const double q = u(rng), p = u(rng), xi1 = u(rng), xi2 = u(rng);
    EXPECT_EQ(h_class(q, p, xi1, xi2), h_class(q, -p, xi1, xi2));
    EXPECT_EQ(h_class(q, p, 0.0, xi2), h_class(-q, -p, 0.0, xi2));
  }
}

TEST(HClass, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-5, 5);
  const double h = 1e-5;
  for (int i = 0; i < 200; ++i) {
    const double q = u(rng), p = u(rng), xi1 = u(rng), xi2 = u(rng);
    const auto g = h_gradient(q, p, xi1, xi2);
    const double dq = (h_class(q + h, p, xi1, xi2) - h_class(q - h, p, xi1, xi2)) / (2 * h);
    const double dp = (h_class(q, p + h, xi1, xi2) - h_class(q, p - h, xi1, xi2)) / (2 * h);
    EXPECT_NEAR(g[0], dq, 1e-6 * std::max(1.0, std::abs(dq)));
    EXPECT_NEAR(g[1], dp, 1e-6 * std::max(1.0, std::abs(dp)));

    const auto hess = h_hessian(q, p, xi1, xi2);
    const auto gq = h_gradient(q + h, p, xi1, xi2);
    const auto gm = h_gradient(q - h, p, xi1, xi2);
    EXPECT_NEAR(hess[0], (gq[0] - gm[0]) / (2 * h), 1e-6 * std::max(1.0, std::abs(hess[0])));
    EXPECT_NEAR(hess[1], (gq[1] - gm[1]) / (2 * h), 1e-6 * std::max(1.0, std::abs(hess[1])));
  }
}

TEST(FindExtrema, PositiveTwoPhotonDrive) {
  const auto ex = find_extrema(0.0, 20.0);
  ASSERT_EQ(ex.size(), 3u);
  EXPECT_EQ(ex[0].kind, ExtremumKind::minimum);
  EXPECT_EQ(ex[1].kind, ExtremumKind::minimum);
  EXPECT_EQ(ex[2].kind, ExtremumKind::saddle);
  EXPECT_NEAR(ex[0].point.q, -std::sqrt(40.0), 1e-12);
  EXPECT_NEAR(ex[1].point.q, std::sqrt(40.0), 1e-12);
  EXPECT_NEAR(ex[0].point.energy, -400.0, 1e-10);
  EXPECT_NEAR(ex[1].point.energy, -400.0, 1e-10);
  EXPECT_EQ(ex[2].point.q, 0.0);
  EXPECT_EQ(ex[2].point.energy, 0.0);
}

TEST(FindExtrema, NegativeTwoPhotonDrive) {
  const auto ex = find_extrema(0.0, -20.0);
  ASSERT_EQ(ex.size(), 3u);
  EXPECT_EQ(ex[0].kind, ExtremumKind::minimum);
  EXPECT_EQ(ex[1].kind, ExtremumKind::minimum);
  EXPECT_NEAR(ex[0].point.q, 0.0, 1e-14);
  EXPECT_NEAR(std::abs(ex[0].point.p), std::sqrt(40.0), 1e-12);
  EXPECT_NEAR(ex[0].point.p, -ex[1].point.p, 1e-14);
  EXPECT_NEAR(ex[0].point.energy, -400.0, 1e-10);
  EXPECT_EQ(ex[2].kind, ExtremumKind::saddle);
}

TEST(FindExtrema, DeformedCircleBranch) {
  const auto ex = find_extrema(kXi1Deformed, -20.0);
  ASSERT_EQ(ex.size(), 3u);
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(ex[k].kind, ExtremumKind::minimum);
    EXPECT_NEAR(ex[k].point.q, 0.375, 1e-12);
    EXPECT_NEAR(std::abs(ex[k].point.p), std::sqrt(40.0 - 0.140625), 1e-12);
    EXPECT_NEAR(ex[k].point.energy, -405.625, 1e-10);
  }
  EXPECT_EQ(ex[2].kind, ExtremumKind::saddle);
  const double q0 = bisect_deformed_root();
  EXPECT_NEAR(ex[2].point.q, q0, 1e-12);
  EXPECT_EQ(ex[2].point.p, 0.0);
}

TEST(FindExtrema, QuarticOriginIsDegenerateMinimum) {
  const auto ex = find_extrema(0.0, 0.0);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].kind, ExtremumKind::minimum);
  EXPECT_TRUE(ex[0].degenerate);
  EXPECT_EQ(ex[0].point.q, 0.0);
}

TEST(FindExtrema, StationaryAndConsistentlyClassified) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-40, 40);
  for (int i = 0; i < 500; ++i) {
    const double xi1 = u(rng), xi2 = u(rng);
    const auto ex = find_extrema(xi1, xi2);
    ASSERT_FALSE(ex.empty());
    for (const ClassicalExtremum& e : ex) {
      const auto g = h_gradient(e.point.q, e.point.p, xi1, xi2);
      EXPECT_LT(std::hypot(g[0], g[1]), 1e-10 * std::max(1.0, std::abs(xi2) + std::abs(xi1)))
          << xi1 << " " << xi2;
      EXPECT_EQ(e.point.energy, h_class(e.point.q, e.point.p, xi1, xi2));
      const auto [lo, hi] = e.hessian_eigenvalues;
      if (e.degenerate) continue;
      switch (e.kind) {
        case ExtremumKind::minimum: EXPECT_GT(lo, 0.0); break;
        case ExtremumKind::maximum: EXPECT_LT(hi, 0.0); break;
        case ExtremumKind::saddle: EXPECT_TRUE(lo < 0.0 && hi > 0.0); break;
      }
    }
    // At least one minimum: h is bounded below.
    EXPECT_TRUE(std::any_of(ex.begin(), ex.end(),
                            [](const ClassicalExtremum& e) { return e.kind == ExtremumKind::minimum; }));
  }
}

TEST(FindExtrema, SetClosedUnderReflections) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-30, 30);
  auto contains = [](const std::vector<ClassicalExtremum>& ex, double q, double p) {
    return std::any_of(ex.begin(), ex.end(), [&](const ClassicalExtremum& e) {
      return std::hypot(e.point.q - q, e.point.p - p) < 1e-9;
    });
  };
  for (int i = 0; i < 200; ++i) {
    const double xi1 = u(rng), xi2 = u(rng);
    const auto parity = find_extrema(0.0, xi2);
    for (const auto& e : parity) {
      EXPECT_TRUE(contains(parity, -e.point.q, -e.point.p));
      EXPECT_TRUE(contains(parity, e.point.q, -e.point.p));
    }
    const auto deformed = find_extrema(xi1, xi2);
    for (const auto& e : deformed) EXPECT_TRUE(contains(deformed, e.point.q, -e.point.p));
  }
}

TEST(SeparatrixEnergy, Values) {
  EXPECT_EQ(separatrix_energy(0.0, -20.0), 0.0);
  EXPECT_EQ(separatrix_energy(0.0, 0.1), 0.0);
  const double q0 = bisect_deformed_root();
  EXPECT_NEAR(separatrix_energy(kXi1Deformed, -20.0), h_class(q0, 0.0, kXi1Deformed, -20.0), 1e-10);
  EXPECT_THROW(separatrix_energy(0.0, 0.0), InvalidParameter);
  EXPECT_THROW(separatrix_energy(5.0, -1.0), InvalidParameter);
}

TEST(QuantumClassical, GroundEnergyApproachesClassicalMinimum) {
  for (const auto& [xi1, xi2] : std::vector<std::pair<double, double>>{
           {0.0, -10.0}, {0.0, 10.0}, {2.0, 5.0}, {-3.0, -8.0}, {1.0, 10.0}}) {
    const double ne = 2.0;
    const Spectrum s = diagonalize(build_hamiltonian(make_params(xi1, xi2, ne)), false);
    const double classical = find_extrema(xi1, xi2).front().point.energy;
    EXPECT_NEAR(s.energies[0] / ne, classical, 0.05 * std::abs(classical)) << xi1 << " " << xi2;
  }
}

TEST(Contours, TwoParityWellsJustAboveMinimum) {
  const ContourGrid grid = default_contour_grid(0.0, -20.0);
  EXPECT_NEAR(grid.q_max, 1.5 * std::sqrt(42.0), 1e-12);
  EXPECT_EQ(grid.resolution, 512u);
  const auto sets = contours(0.0, -20.0, {-399.0}, grid);
  ASSERT_EQ(sets.size(), 1u);
  const auto& curves = sets[0].curves;
  ASSERT_EQ(curves.size(), 2u);
  const double step = grid_step(grid);
  for (const Polyline& c : curves) {
    EXPECT_TRUE(c.closed);
    ASSERT_EQ(c.enclosed_minima.size(), 1u);
    const auto m = centroid(c);
    // Each well is symmetric under q -> -q on its own.
    EXPECT_NEAR(m[0], 0.0, step);
  }
  const auto a = centroid(curves[0]);
  const auto b = centroid(curves[1]);
  EXPECT_NEAR(a[1], -b[1], step);
  EXPECT_NEAR(area(curves[0]), area(curves[1]), 0.01 * area(curves[0]));
}

TEST(Contours, DeformedWellsMirrorInMomentumOnly) {
  const double critical = separatrix_energy(kXi1Deformed, -20.0);
  const double e = 0.5 * (critical - 405.625);
  const ContourGrid grid = default_contour_grid(kXi1Deformed, -20.0);
  const auto sets = contours(kXi1Deformed, -20.0, {e}, grid);
  const auto& curves = sets[0].curves;
  ASSERT_EQ(curves.size(), 2u);
  const double step = grid_step(grid);
  const auto a = centroid(curves[0]);
  const auto b = centroid(curves[1]);
  EXPECT_NEAR(a[0], b[0], step);
  EXPECT_NEAR(a[1], -b[1], step);
  EXPECT_GT(std::abs(a[1]), 1.0);
}

TEST(Contours, SingleCurveHighAndNoneBelowMinimum) {
  const ContourGrid grid = default_contour_grid(0.0, -20.0);
  const auto sets = contours(0.0, -20.0, {200.0, -500.0}, grid);
  ASSERT_EQ(sets[0].curves.size(), 1u);
  EXPECT_TRUE(sets[0].curves[0].closed);
  EXPECT_EQ(sets[0].curves[0].enclosed_minima.size(), 2u);
  EXPECT_TRUE(sets[1].curves.empty());
}

TEST(Contours, PointsLieOnTheLevelSet) {
  ContourGrid grid = default_contour_grid(0.0, 20.0);
  grid.resolution = 256;
  const auto sets = contours(0.0, 20.0, {-300.0, -50.0, 100.0}, grid);
  const double step = grid_step(grid);
  for (const ContourSet& set : sets) {
    ASSERT_FALSE(set.curves.empty());
    for (const Polyline& c : set.curves) {
      for (const auto& pt : c.points) {
        const auto g = h_gradient(pt[0], pt[1], 0.0, 20.0);
        const double tol = step * step * 50 * std::max(1.0, std::hypot(g[0], g[1]));
        EXPECT_NEAR(h_class(pt[0], pt[1], 0.0, 20.0), set.energy, tol);
      }
    }
  }
}

TEST(Contours, OpenCurvesWhenLevelLeavesGrid) {
  ContourGrid grid{-4, 4, -4, 4, 64};
  const auto sets = contours(0.0, 20.0, {-100.0}, grid);
  ASSERT_FALSE(sets[0].curves.empty());
  for (const Polyline& c : sets[0].curves) EXPECT_FALSE(c.closed);
}

TEST(Contours, Validation) {
  ContourGrid grid{-1, 1, -1, 1, 15};
  EXPECT_THROW(contours(0, 1, {0.0}, grid), InvalidParameter);
  grid = {1, -1, -1, 1, 32};
  EXPECT_THROW(contours(0, 1, {0.0}, grid), InvalidParameter);
}

TEST(Contours, Deterministic) {
  const ContourGrid grid = default_contour_grid(kXi1Deformed, -20.0);
  const auto a = contours(kXi1Deformed, -20.0, {-300.0, 0.0}, grid);
  const auto b = contours(kXi1Deformed, -20.0, {-300.0, 0.0}, grid);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].curves.size(), b[i].curves.size());
    for (std::size_t k = 0; k < a[i].curves.size(); ++k) {
      EXPECT_EQ(a[i].curves[k].points, b[i].curves[k].points);
    }
  }
}
