#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpo/eigensolver.hpp"
#include "kpo/model.hpp"
#include "kpo/task_runner.hpp"

namespace kpo {

struct ExpectationRecord {
  std::size_t state_index = 0;
  double energy = 0.0;  // K hbar
  double q_mean = 0.0;
  double p_mean = 0.0;
};

struct GapRecord {
  std::size_t j = 0;
  double energy = 0.0;  // E_j
  double gap = 0.0;     // E_{j+1} - E_j
  // Full-width gap when the spectrum came from the arbitrary-precision solver.
  std::optional<mp::Float> precise_gap;
};

// <Q> and <P> of the selected states. Real eigenvectors give p_mean == 0
// exactly. Throws InvalidParameter when the spectrum has no vectors, the
// dimensions disagree, or an index is out of range.
std::vector<ExpectationRecord> expectations(const Spectrum& spectrum,
                                            const QuadratureMatrices& quads,
                                            const std::vector<std::size_t>& indices);

// Ground doublet of H + epsilon (Q + P). A zero epsilon in params is replaced
// by default_symmetry_breaking.
std::pair<ExpectationRecord, ExpectationRecord> localize_doublet(const ModelParams& params);

std::vector<GapRecord> adjacent_gaps(const Spectrum& spectrum);

// Lowest index j of every doublet (j, j+1), where Delta_j < 1e-3 Delta_{j+1}.
// Doublets do not overlap.
inline constexpr double kDoubletRatio = 1e-3;
std::vector<std::size_t> doublet_starts(const Spectrum& spectrum);

struct DensityCurve {
  std::vector<double> energy;
  std::vector<double> density;  // levels per unit energy
  // Kernel width attached to each input level.
  std::vector<double> level_window;
  std::vector<double> level_energy;

  // Kernel width of the level closest to e.
  double window_at(double e) const;
};

// Gaussian-kernel density with one fixed width, sampled uniformly from
// E_0 - 3 window to E_last + 3 window.
DensityCurve level_density(const Spectrum& spectrum, double window, std::size_t samples = 4096);

// Adaptive estimator: level k carries width 3 x local_mean_spacing(k).
inline constexpr double kDensityWindowSpacings = 3.0;
DensityCurve level_density(const Spectrum& spectrum, std::size_t samples = 4096);

struct DensityPeak {
  double energy = 0.0;
  double density = 0.0;
  double window = 0.0;
};
// Global maximum of the sampled density restricted to [e_min, e_max].
DensityPeak density_peak(const DensityCurve& curve, double e_min, double e_max);

// Minimum of the second-neighbour spacing E_{j+2} - E_j over j + 2 < levels;
// insensitive to doublet splittings. Located at (E_j + E_{j+2}) / 2.
struct SpacingMinimum {
  std::size_t j = 0;
  double energy = 0.0;
  double spacing = 0.0;
};
SpacingMinimum second_neighbour_minimum(const Spectrum& spectrum, std::size_t levels);

enum class SweepAxis { one_photon, two_photon, classicality };

struct SweepOutputs {
  std::size_t levels = 10;  // lowest states reported per point
  bool expectations = false;
  bool gaps = false;
  bool localize = false;  // diagonalize H + epsilon (Q + P) instead of H
};

struct SweepPoint {
  double axis_value = 0.0;
  ModelParams params;
  std::vector<double> energies;
  std::vector<ExpectationRecord> expectations;
  std::vector<GapRecord> gaps;
  bool failed = false;
  bool nonconverged = false;  // failure came from a solver convergence check
  std::string error;
};

struct SweepTable {
  SweepAxis axis = SweepAxis::two_photon;
  std::size_t dim = 0;
  std::vector<SweepPoint> points;  // grid order
};

ModelParams with_axis_value(ModelParams params, SweepAxis axis, double value);

// params_template.dim when set, otherwise the largest default dimension over
// the grid endpoints.
std::size_t sweep_dimension(const ModelParams& params_template, SweepAxis axis,
                            const std::vector<double>& grid);

// One truncation for the whole sweep, from sweep_dimension. Per-point failures
// are recorded on the point; the sweep itself only throws for an invalid grid
// or template.
SweepTable sweep(const ModelParams& params_template, SweepAxis axis, const std::vector<double>& grid,
                 const SweepOutputs& outputs, TaskRunner* runner = nullptr);

}  // namespace kpo
