#pragma once

// Squeeze-driven Kerr parametric oscillator in a truncated Fock basis.
//
//   H / (K hbar) = a^+2 a^2 / Ne - xi2 (a^+2 + a^2) + xi1 sqrt(Ne) (a^+ + a)
//
// All quantum energies produced here are in units of K hbar. The Fock index
// runs |0>, |1>, ..., |dim-1>.

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

#include "kpo/mp_float.hpp"

namespace kpo {

inline constexpr double kTruncationFactor = 8.0;
inline constexpr std::size_t kMinimumDimension = 64;

struct ModelParams {
  double one_photon = 0.0;         // xi1
  double two_photon = 0.0;         // xi2
  double classicality = 1.0;       // Ne, effective 1/hbar
  std::size_t dim = 0;             // Fock states kept
  double symmetry_breaking = 0.0;  // epsilon in H + epsilon (Q + P); 0 when unused

  bool parity_symmetric() const { return one_photon == 0.0; }
};

// ceil(8 * max(1, |xi2| Ne + |xi1| sqrt(Ne))), never below 64.
std::size_t default_dimension(double one_photon, double two_photon, double classicality);

// 1e-8 * max(1, xi2^2 Ne).
double default_symmetry_breaking(double two_photon, double classicality);

// Parameters with the default truncation and no symmetry-breaking term.
ModelParams make_params(double one_photon, double two_photon, double classicality);

// Throws InvalidParameter unless every field is finite, Ne > 0, epsilon >= 0
// and dim >= min_dim.
void validate(const ModelParams& params, std::size_t min_dim = 3);

// dim >= 8 |xi2| Ne, i.e. the deepest classical minimum fits with headroom.
bool truncation_adequate(const ModelParams& params);

// Real symmetric matrix with bandwidth 2.
struct FockMatrix {
  std::size_t dim = 0;
  std::vector<double> diagonal;  // dim
  std::vector<double> band1;     // dim - 1, <n|H|n+1>
  std::vector<double> band2;     // dim - 2, <n|H|n+2>

  static FockMatrix zeros(std::size_t dim);

  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  // Largest absolute row sum, an upper bound on the spectral radius.
  double norm_inf() const;
};

struct HermitianMatrix {
  std::size_t dim = 0;
  Eigen::MatrixXcd entries;
};

// Q = (a^+ + a)/sqrt(2 Ne), P = i (a^+ - a)/sqrt(2 Ne). Both are tridiagonal
// with the same coupling magnitude; P carries the factor of i.
struct QuadratureMatrices {
  std::size_t dim = 0;
  double classicality = 1.0;
  std::vector<double> ladder;  // dim - 1 entries, sqrt((n+1)/(2 Ne))

  // <n+1|Q|n> = <n|Q|n+1> = ladder[n]
  Eigen::MatrixXd q_matrix() const;
  // <n+1|P|n> = i ladder[n], <n|P|n+1> = -i ladder[n]
  Eigen::MatrixXcd p_matrix() const;
};

FockMatrix build_hamiltonian(const ModelParams& params);

// Even block acts on |0>,|2>,...; odd block on |1>,|3>,.... Each block is
// tridiagonal: the two-photon coupling sits on the block's band1.
// Throws SymmetryViolation when xi1 != 0.
std::pair<FockMatrix, FockMatrix> build_parity_blocks(const ModelParams& params);

QuadratureMatrices build_quadratures(const ModelParams& params);

// H + epsilon (Q + P) as a dense Hermitian matrix. Requires epsilon > 0.
HermitianMatrix build_perturbed(const ModelParams& params);

// Banded symmetric matrix with every entry held at one mantissa width.
struct MpBandedMatrix {
  std::size_t dim = 0;
  mp::Bits bits = 128;
  std::vector<mp::Float> diagonal;
  std::vector<mp::Float> band1;
  std::vector<mp::Float> band2;

  // Exact lift of a double-precision matrix.
  static MpBandedMatrix lift(const FockMatrix& m, mp::Bits bits);
  FockMatrix rounded() const;
  mp::Matrix dense() const;
};

// Same matrix as build_hamiltonian, with the square roots and the 1/Ne
// evaluated in `bits`-wide arithmetic so the matrix itself carries full
// precision.
MpBandedMatrix build_hamiltonian_mp(const ModelParams& params, mp::Bits bits);
std::pair<MpBandedMatrix, MpBandedMatrix> build_parity_blocks_mp(const ModelParams& params,
                                                                 mp::Bits bits);

}  // namespace kpo
