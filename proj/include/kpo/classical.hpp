#pragma once

// Classical limit of the oscillator, in units of Ne K hbar:
//
//   h(q, p) = (q^2 + p^2)^2 / 4 - xi2 (q^2 - p^2) + sqrt(2) xi1 q

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace kpo {

double h_class(double q, double p, double xi1, double xi2);
// (dh/dq, dh/dp)
std::array<double, 2> h_gradient(double q, double p, double xi1, double xi2);
// (h_qq, h_qp, h_pp)
std::array<double, 3> h_hessian(double q, double p, double xi1, double xi2);

struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
  double energy = 0.0;  // Ne K hbar
};

enum class ExtremumKind { minimum, maximum, saddle };
std::string_view to_string(ExtremumKind kind);

struct ClassicalExtremum {
  PhasePoint point;
  ExtremumKind kind = ExtremumKind::minimum;
  std::array<double, 2> hessian_eigenvalues{};  // ascending
  // A Hessian eigenvalue vanishes (the quartic origin at xi1 = xi2 = 0, or a
  // branch point where two stationary points merge).
  bool degenerate = false;
};

// Every real stationary point, sorted by (energy, q, p). The p = 0 branch is
// the cubic q^3 - 2 xi2 q + sqrt(2) xi1 = 0, solved in closed form and
// polished by Newton steps; for xi2 < 0 the circle q^2 + p^2 = -2 xi2 adds
// q* = xi1 / (2 sqrt(2) xi2), p* = +-sqrt(-2 xi2 - q*^2) when p*^2 > 0.
std::vector<ClassicalExtremum> find_extrema(double xi1, double xi2);

// Energy of the saddle separating the wells. Throws InvalidParameter in the
// single-well regime.
double separatrix_energy(double xi1, double xi2);

struct ContourGrid {
  double q_min = -1.0;
  double q_max = 1.0;
  double p_min = -1.0;
  double p_max = 1.0;
  std::size_t resolution = 512;  // nodes per axis

  void validate() const;
};

// Square window of half-width 1.5 sqrt(2 |xi2| + 2), widened if needed so
// every extremum sits inside it with the same 1.5x margin; 512 x 512 nodes.
ContourGrid default_contour_grid(double xi1, double xi2);

struct Polyline {
  std::vector<std::array<double, 2>> points;  // (q, p)
  bool closed = false;
  // Minima lying inside a closed curve.
  std::vector<PhasePoint> enclosed_minima;
};

struct ContourSet {
  double energy = 0.0;
  std::vector<Polyline> curves;
};

// Marching-squares iso-lines of h(q, p) = E on the grid. Ambiguous cells are
// resolved by the sign of h at the cell centre. Energies below the global
// minimum give empty sets.
std::vector<ContourSet> contours(double xi1, double xi2, const std::vector<double>& energies,
                                 const ContourGrid& grid);

}  // namespace kpo
