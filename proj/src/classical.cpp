#include "kpo/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "kpo/error.hpp"

namespace kpo {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Real roots of q^3 + a q + b = 0.
std::vector<double> depressed_cubic_roots(double a, double b) {
  std::vector<double> roots;
  if (a == 0.0 && b == 0.0) return {0.0};
  const double disc = -(4 * a * a * a + 27 * b * b);
  const double scale = std::max(std::abs(4 * a * a * a), 27 * b * b);
  if (std::abs(disc) <= 1e-14 * scale) {
    // Double root -3b/(2a) and simple root 3b/a.
    roots = {3 * b / a, -1.5 * b / a};
  } else if (disc > 0) {
    const double m = 2 * std::sqrt(-a / 3);
    const double arg = std::clamp(3 * b / (a * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3;
    for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(phi - 2 * std::numbers::pi * k / 3));
  } else {
    const double s = std::sqrt(b * b / 4 + a * a * a / 27);
    roots.push_back(std::cbrt(-b / 2 + s) + std::cbrt(-b / 2 - s));
  }
  for (double& q : roots) {
    for (int it = 0; it < 8; ++it) {
      const double f = (q * q + a) * q + b;
      const double df = 3 * q * q + a;
      if (df == 0.0) break;
      const double step = f / df;
      q -= step;
      if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(q))) break;
    }
  }
  return roots;
}

ClassicalExtremum classify(double q, double p, double xi1, double xi2) {
  ClassicalExtremum e;
  e.point = {q, p, h_class(q, p, xi1, xi2)};
  const auto [hqq, hqp, hpp] = h_hessian(q, p, xi1, xi2);
  const double mean = 0.5 * (hqq + hpp);
  const double radius = std::hypot(0.5 * (hqq - hpp), hqp);
  e.hessian_eigenvalues = {mean - radius, mean + radius};
  const double scale = std::max({1.0, std::abs(hqq), std::abs(hpp), std::abs(xi2)});
  const double tol = 1e-9 * scale;
  const double lo = e.hessian_eigenvalues[0];
  const double hi = e.hessian_eigenvalues[1];
  e.degenerate = std::abs(lo) <= tol || std::abs(hi) <= tol;
  if (lo >= -tol) {
    e.kind = ExtremumKind::minimum;
  } else if (hi <= tol) {
    e.kind = ExtremumKind::maximum;
  } else {
    e.kind = ExtremumKind::saddle;
  }
  return e;
}

}  // namespace

double h_class(double q, double p, double xi1, double xi2) {
  const double r2 = q * q + p * p;
  return 0.25 * r2 * r2 - xi2 * (q * q - p * p) + kSqrt2 * xi1 * q;
}

std::array<double, 2> h_gradient(double q, double p, double xi1, double xi2) {
  const double r2 = q * q + p * p;
  return {q * r2 - 2 * xi2 * q + kSqrt2 * xi1, p * r2 + 2 * xi2 * p};
}

std::array<double, 3> h_hessian(double q, double p, double xi1, double xi2) {
  (void)xi1;
  const double r2 = q * q + p * p;
  return {r2 + 2 * q * q - 2 * xi2, 2 * q * p, r2 + 2 * p * p + 2 * xi2};
}

std::string_view to_string(ExtremumKind kind) {
  switch (kind) {
    case ExtremumKind::minimum: return "minimum";
    case ExtremumKind::maximum: return "maximum";
    case ExtremumKind::saddle: return "saddle";
  }
  return "unknown";
}

std::vector<ClassicalExtremum> find_extrema(double xi1, double xi2) {
  if (!std::isfinite(xi1) || !std::isfinite(xi2)) {
    throw InvalidParameter("drive amplitudes must be finite");
  }
  std::vector<std::array<double, 2>> points;
  for (double q : depressed_cubic_roots(-2 * xi2, kSqrt2 * xi1)) points.push_back({q, 0.0});
  if (xi2 < 0) {
    const double q = xi1 / (2 * kSqrt2 * xi2);
    const double p2 = -2 * xi2 - q * q;
    if (p2 > 1e-12 * std::abs(xi2)) {
      const double p = std::sqrt(p2);
      points.push_back({q, p});
      points.push_back({q, -p});
    }
  }

  // Coincident roots appear at branch points; keep one copy.
  const double merge = 1e-9 * std::max(1.0, std::sqrt(std::abs(xi2)));
  std::vector<ClassicalExtremum> extrema;
  for (const auto& [q, p] : points) {
    const bool duplicate = std::any_of(extrema.begin(), extrema.end(), [&](const ClassicalExtremum& e) {
      return std::hypot(e.point.q - q, e.point.p - p) < merge;
    });
    if (!duplicate) extrema.push_back(classify(q, p, xi1, xi2));
  }
  std::sort(extrema.begin(), extrema.end(), [](const ClassicalExtremum& a, const ClassicalExtremum& b) {
    return std::tie(a.point.energy, a.point.q, a.point.p) < std::tie(b.point.energy, b.point.q, b.point.p);
  });
  return extrema;
}

double separatrix_energy(double xi1, double xi2) {
  for (const ClassicalExtremum& e : find_extrema(xi1, xi2)) {
    if (e.kind == ExtremumKind::saddle) return e.point.energy;
  }
  throw InvalidParameter("no saddle: the classical surface has a single well");
}

void ContourGrid::validate() const {
  if (resolution < 16) throw InvalidParameter("contour grid resolution must be >= 16");
  if (!(q_max > q_min) || !(p_max > p_min) || !std::isfinite(q_max - q_min) ||
      !std::isfinite(p_max - p_min)) {
    throw InvalidParameter("contour grid bounds must be finite and ordered");
  }
}

ContourGrid default_contour_grid(double xi1, double xi2) {
  double half = std::sqrt(2 * std::abs(xi2) + 2);
  for (const ClassicalExtremum& e : find_extrema(xi1, xi2)) {
    half = std::max({half, std::abs(e.point.q), std::abs(e.point.p)});
  }
  half *= 1.5;
  return {-half, half, -half, half, 512};
}

}  // namespace kpo
