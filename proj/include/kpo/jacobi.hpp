#pragma once

#include <cstddef>
#include <vector>

#include "kpo/mp_float.hpp"

namespace kpo {

struct JacobiResult {
  std::vector<mp::Float> eigenvalues;  // ascending
  mp::Matrix vectors;                  // column j <-> eigenvalues[j]; empty unless requested
  int sweeps = 0;
  long rotations = 0;
  mp::Float off_norm;       // Frobenius norm of the off-diagonal part at exit
  mp::Float frobenius;      // Frobenius norm of the input
  mp::Matrix diagonalized;  // the rotated matrix, for invariant checks
};

// Cyclic-by-row Jacobi eigensolver for a dense real symmetric matrix. All
// arithmetic runs at a.bits(). Sweeps stop once no off-diagonal element
// exceeds 2^-bits * ||A||_F / n; the off-diagonal norm then sits far below
// 2^(-bits/2) ||A||_F. Throws ConvergenceError after max_sweeps.
JacobiResult jacobi_eigen(mp::Matrix a, bool want_vectors, int max_sweeps = 80);

}  // namespace kpo
