#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "kpo/model.hpp"
#include "kpo/mp_float.hpp"

namespace kpo {

// Ascending eigenvalues (units K hbar) with optional eigenvectors.
struct Spectrum {
  std::vector<double> energies;
  // Full-width eigenvalues from the arbitrary-precision solver; empty for
  // double-precision spectra.
  std::vector<mp::Float> precise_energies;
  // Column j <-> energies[j]. At most one of these is populated.
  Eigen::MatrixXd real_vectors;
  Eigen::MatrixXcd complex_vectors;
  std::size_t dim = 0;
  mp::Bits precision_bits = mp::kDoubleBits;
  bool converged = true;

  std::size_t size() const { return energies.size(); }
  bool has_vectors() const { return real_vectors.size() > 0 || complex_vectors.size() > 0; }
  bool real_valued() const { return real_vectors.size() > 0; }

  // E_{j+1} - E_j, taken from precise_energies when present.
  mp::Float gap(std::size_t j) const;

  // Mean level spacing over up to `half_window` levels on each side of j.
  double local_mean_spacing(std::size_t j, std::size_t half_window = 5) const;

  // Levels j and j+1 are labelled degenerate when their gap is below
  // 1e-6 times the local mean spacing.
  bool degenerate_with_next(std::size_t j) const;
};

inline constexpr double kDegeneracyTolerance = 1e-6;

// Full double-precision solve. With want_vectors the residual of every pair
// is checked against 1e-10 ||H||.
Spectrum diagonalize(const FockMatrix& matrix, bool want_vectors);
Spectrum diagonalize(const HermitianMatrix& matrix, bool want_vectors);

// Lowest k_lowest eigenvalues of a real symmetric banded matrix in bits-wide
// arithmetic. Small problems (or k_lowest close to dim) go through cyclic
// Jacobi on the dense matrix. Otherwise a Ritz subspace is seeded in double
// precision, refined by shifted inverse subspace iteration at full width, and
// diagonalized with the same Jacobi kernel; iteration stops once every wanted
// residual is below 2^-(bits/2 + 8) ||H||.
Spectrum diagonalize_mp(const MpBandedMatrix& matrix, std::size_t k_lowest);
Spectrum diagonalize_mp(const FockMatrix& matrix, mp::Bits bits, std::size_t k_lowest);

enum class MpStrategy { automatic, dense_jacobi, ritz_subspace };
Spectrum diagonalize_mp(const MpBandedMatrix& matrix, std::size_t k_lowest, MpStrategy strategy);

// Merge two spectra (parity blocks) into one ascending spectrum of the
// combined space. Vectors are dropped.
Spectrum merge_spectra(const Spectrum& a, const Spectrum& b);

struct PrecisionPlan {
  mp::Bits initial_bits = 128;
  mp::Bits max_bits = 4096;
  double bits_step = 2.0;
  double dim_step = 1.5;
  double gap_rel_tol = 1e-3;

  void validate() const;
  bool operator==(const PrecisionPlan&) const = default;
};

// One rung of the escalation ladder.
struct GapStage {
  std::size_t dim = 0;
  mp::Bits bits = mp::kDoubleBits;
  mp::Float gap;
  // Smallest gap this stage can distinguish from zero: 64 * 2^-bits * ||H||.
  mp::Float resolution;
  bool resolvable() const { return gap > resolution; }
};

struct GapConvergence {
  mp::Float gap;
  Spectrum spectrum;  // from the accepted (or last) stage
  bool converged = false;
  std::vector<GapStage> stages;

  double value() const { return gap.to_double(); }
};

// Escalates (dim, bits) until Delta_j = E_{j+1} - E_j agrees between two
// consecutive stages to gap_rel_tol, both stages resolving it. The first
// stage is double precision at params.dim; stage s >= 1 uses
// initial_bits * bits_step^(s-1) bits and params.dim * dim_step^s states.
// Running past max_bits returns converged == false with the last stage.
GapConvergence converge_gap(const ModelParams& params, std::size_t gap_index,
                            const PrecisionPlan& plan = {});

}  // namespace kpo
