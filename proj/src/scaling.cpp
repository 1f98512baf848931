#include "kpo/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "kpo/error.hpp"
#include "kpo/model.hpp"

namespace kpo {

namespace {

// OLS of y = prefactor_log - delta x.
GapScalingFit fit_log_linear(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidParameter("exponential fit needs distinct Ne values");
  const double slope = sxy / sxx;
  GapScalingFit fit;
  fit.delta = -slope;
  fit.prefactor_log = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.prefactor_log + slope * x[i]);
    ss_res += r * r;
  }
  fit.delta_stderr = n > 2 ? std::sqrt(ss_res / static_cast<double>(n - 2) / sxx) : 0.0;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace

GapScalingFit fit_exponential(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw InvalidParameter("exponential fit needs at least two points");
  std::vector<double> x, y;
  for (const auto& [ne, gap] : points) {
    if (!(gap > 0.0) || !std::isfinite(gap)) throw InvalidParameter("gaps must be positive and finite");
    if (!std::isfinite(ne)) throw InvalidParameter("Ne values must be finite");
    x.push_back(ne);
    y.push_back(std::log(gap));
  }
  return fit_log_linear(x, y);
}

GapScalingFit fit_scaling(const std::vector<ScalingPoint>& points) {
  // ln is taken at full width so gaps beyond the double exponent range still fit.
  std::vector<double> x, y;
  for (const ScalingPoint& p : points) {
    if (!p.converged) continue;
    if (!(p.gap.sign() > 0)) throw InvalidParameter("converged gaps must be positive");
    x.push_back(p.n_e);
    y.push_back(mp::log(p.gap).to_double());
  }
  if (x.size() < 2) throw ConvergenceError("fewer than two converged scaling points", 0, 0.0);
  GapScalingFit fit = fit_log_linear(x, y);
  fit.points = points;
  return fit;
}

std::size_t default_gap_index(double xi1) { return xi1 == 0.0 ? 2 : 0; }

std::vector<double> default_ne_grid() {
  std::vector<double> grid(8);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = 0.5 * std::pow(8.0, static_cast<double>(i) / 7.0);
  }
  grid.back() = 4.0;
  return grid;
}

std::vector<ScalingPoint> gap_scaling_sweep(double xi1, double xi2, std::optional<std::size_t> gap_index,
                                            const std::vector<double>& ne_grid, const PrecisionPlan& plan,
                                            TaskRunner* runner) {
  if (ne_grid.size() < 4) throw InvalidParameter("scaling sweep needs at least four Ne values");
  for (std::size_t i = 0; i < ne_grid.size(); ++i) {
    if (!(ne_grid[i] > 0.0) || !std::isfinite(ne_grid[i])) {
      throw InvalidParameter("Ne values must be positive and finite");
    }
    if (i > 0 && !(ne_grid[i] > ne_grid[i - 1])) throw InvalidParameter("Ne grid must be ascending");
  }
  plan.validate();
  const std::size_t j = gap_index.value_or(default_gap_index(xi1));

  std::vector<ScalingPoint> points(ne_grid.size());
  auto evaluate = [&](std::size_t i) {
    ScalingPoint& point = points[i];
    point.n_e = ne_grid[i];
    point.gap_index = j;
    try {
      const GapConvergence result = converge_gap(make_params(xi1, xi2, ne_grid[i]), j, plan);
      point.gap = result.gap;
      point.converged = result.converged;
      point.stages = result.stages.size();
      if (!result.stages.empty()) {
        point.dim = result.stages.back().dim;
        point.bits = result.stages.back().bits;
      }
    } catch (const std::exception&) {
      point.converged = false;
    }
  };
  SequentialRunner sequential;
  (runner ? *runner : sequential).run(ne_grid.size(), evaluate);
  return points;
}

double delta_app(double xi2) { return 2 * std::abs(xi2); }

CoherentState CoherentState::make(std::complex<double> zeta, std::size_t dim) {
  if (dim == 0) throw InvalidParameter("coherent state needs dim >= 1");
  if (!std::isfinite(zeta.real()) || !std::isfinite(zeta.imag())) {
    throw InvalidParameter("coherent amplitude must be finite");
  }
  CoherentState s;
  s.zeta = zeta;
  s.dim = dim;
  s.amplitudes.resize(static_cast<Eigen::Index>(dim));
  std::complex<double> c = std::exp(-0.5 * std::norm(zeta));
  for (std::size_t n = 0; n < dim; ++n) {
    s.amplitudes(static_cast<Eigen::Index>(n)) = c;
    c *= zeta / std::sqrt(static_cast<double>(n + 1));
  }
  return s;
}

std::complex<double> overlap(const CoherentState& a, const CoherentState& b) {
  if (a.dim != b.dim) throw InvalidParameter("coherent states have different truncations");
  return a.amplitudes.dot(b.amplitudes);
}

OverlapResult coherent_overlap(double xi2, double n_e, std::size_t dim) {
  if (xi2 == 0.0 || !std::isfinite(xi2)) throw InvalidParameter("overlap needs a finite nonzero xi2");
  if (!(n_e > 0.0) || !std::isfinite(n_e)) throw InvalidParameter("Ne must be positive and finite");
  const double radius = std::sqrt(std::abs(xi2) * n_e);
  const std::complex<double> zeta = xi2 > 0 ? std::complex<double>(radius, 0.0)
                                            : std::complex<double>(0.0, radius);
  const CoherentState plus = CoherentState::make(zeta, dim);
  const CoherentState minus = CoherentState::make(-zeta, dim);
  OverlapResult r;
  r.numeric = overlap(plus, minus).real();
  r.analytic = std::exp(-delta_app(xi2) * n_e);
  r.norm_warning = std::abs(plus.norm() - 1.0) > 1e-8 || std::abs(minus.norm() - 1.0) > 1e-8;
  return r;
}

}  // namespace kpo
