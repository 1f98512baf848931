#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "kpo/eigensolver.hpp"
#include "kpo/mp_float.hpp"
#include "kpo/task_runner.hpp"

namespace kpo {

struct ScalingPoint {
  double n_e = 0.0;
  mp::Float gap;
  bool converged = false;
  std::size_t gap_index = 0;
  std::size_t dim = 0;  // truncation of the accepted stage
  mp::Bits bits = mp::kDoubleBits;
  std::size_t stages = 0;
};

// Delta(Ne) ~ exp(prefactor_log - delta * Ne).
struct GapScalingFit {
  double delta = 0.0;
  double delta_stderr = 0.0;
  double prefactor_log = 0.0;
  double r_squared = 0.0;
  std::vector<ScalingPoint> points;  // every point, fitted or not
};

// Ordinary least squares of ln(gap) against Ne. Needs at least two points and
// positive gaps; with exactly two the standard error is reported as 0.
GapScalingFit fit_exponential(const std::vector<std::pair<double, double>>& points);

// Fit over the converged points of a sweep. The returned fit carries all of
// them. Throws ConvergenceError when fewer than two points converged.
GapScalingFit fit_scaling(const std::vector<ScalingPoint>& points);

// Delta_2 for parity-symmetric drives (the ground doublet is exactly
// degenerate there), Delta_0 otherwise.
std::size_t default_gap_index(double xi1);

// Eight geometrically spaced values from 0.5 to 4.
std::vector<double> default_ne_grid();

// converge_gap at every Ne (default truncation per point). Requires an
// ascending grid of at least four values. Solver failures mark the point
// unconverged instead of aborting.
std::vector<ScalingPoint> gap_scaling_sweep(double xi1, double xi2, std::optional<std::size_t> gap_index,
                                            const std::vector<double>& ne_grid,
                                            const PrecisionPlan& plan = {},
                                            TaskRunner* runner = nullptr);

// 2 |xi2|: the exponent of the overlap between the two well coherent states.
double delta_app(double xi2);

// Truncated Glauber state, amplitudes exp(-|zeta|^2/2) zeta^n / sqrt(n!) for
// n < dim; not renormalized after truncation.
struct CoherentState {
  std::complex<double> zeta;
  std::size_t dim = 0;
  Eigen::VectorXcd amplitudes;

  static CoherentState make(std::complex<double> zeta, std::size_t dim);
  double norm() const { return amplitudes.norm(); }
};

// <a|b>, conjugating a.
std::complex<double> overlap(const CoherentState& a, const CoherentState& b);

struct OverlapResult {
  double numeric = 0.0;
  double analytic = 0.0;
  bool norm_warning = false;  // a truncated norm is off 1 by more than 1e-8
};

// Overlap of the two well states zeta = +-sqrt(|xi2| Ne), along q for xi2 > 0
// and along p for xi2 < 0; analytic value exp(-2 |xi2| Ne).
OverlapResult coherent_overlap(double xi2, double n_e, std::size_t dim);

}  // namespace kpo
