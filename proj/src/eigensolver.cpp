#include "kpo/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kpo/error.hpp"
#include "kpo/jacobi.hpp"

namespace kpo {

namespace {

constexpr mpfr_rnd_t kRound = MPFR_RNDN;
constexpr int kMaxRitzIterations = 2000;

template <typename Matrix>
void check_residuals(const Matrix& h, const Spectrum& s, const auto& vectors) {
  const double scale = std::max(1.0, h.cwiseAbs().rowwise().sum().maxCoeff());
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    const double residual = (h * vectors.col(j) - s.energies[j] * vectors.col(j)).norm();
    if (residual > 1e-10 * scale) {
      throw ConvergenceError("eigenpair " + std::to_string(j) + " fails the residual check", 0,
                             residual);
    }
  }
}

// ---- helpers for the Ritz-subspace path -------------------------------------

// y = H x, column by column.
void banded_apply(const MpBandedMatrix& h, const mp::Matrix& x, mp::Matrix& y) {
  const std::size_t n = h.dim;
  const std::size_t m = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < m; ++c) {
      mpfr_ptr out = y(i, c).get();
      mpfr_mul(out, h.diagonal[i].get(), x(i, c).get(), kRound);
      if (i + 1 < n) mpfr_fma(out, h.band1[i].get(), x(i + 1, c).get(), out, kRound);
      if (i >= 1) mpfr_fma(out, h.band1[i - 1].get(), x(i - 1, c).get(), out, kRound);
      if (i + 2 < n) mpfr_fma(out, h.band2[i].get(), x(i + 2, c).get(), out, kRound);
      if (i >= 2) mpfr_fma(out, h.band2[i - 2].get(), x(i - 2, c).get(), out, kRound);
    }
  }
}

// Modified Gram-Schmidt, run twice for orthogonality at working precision.
void orthonormalize(mp::Matrix& x) {
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  mp::Float dot(x.bits());
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t prev = 0; prev < c; ++prev) {
        mpfr_set_zero(dot.get(), 1);
        for (std::size_t i = 0; i < n; ++i) {
          mpfr_fma(dot.get(), x(i, prev).get(), x(i, c).get(), dot.get(), kRound);
        }
        mpfr_neg(dot.get(), dot.get(), kRound);
        for (std::size_t i = 0; i < n; ++i) {
          mpfr_fma(x(i, c).get(), dot.get(), x(i, prev).get(), x(i, c).get(), kRound);
        }
      }
      mpfr_set_zero(dot.get(), 1);
      for (std::size_t i = 0; i < n; ++i) {
        mpfr_fma(dot.get(), x(i, c).get(), x(i, c).get(), dot.get(), kRound);
      }
      if (mpfr_zero_p(dot.get())) {
        throw ConvergenceError("Ritz basis lost rank", pass, 0.0);
      }
      mpfr_rec_sqrt(dot.get(), dot.get(), kRound);
      for (std::size_t i = 0; i < n; ++i) mpfr_mul(x(i, c).get(), x(i, c).get(), dot.get(), kRound);
    }
  }
}

// out = x * w
void multiply_right(const mp::Matrix& x, const mp::Matrix& w, mp::Matrix& out) {
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < m; ++c) {
      mpfr_ptr acc = out(i, c).get();
      mpfr_set_zero(acc, 1);
      for (std::size_t k = 0; k < m; ++k) mpfr_fma(acc, x(i, k).get(), w(k, c).get(), acc, kRound);
    }
  }
}

// Cholesky factor of (H - shift I) with bandwidth 2: L(i,i), L(i,i-1), L(i,i-2).
struct BandedCholesky {
  std::vector<mp::Float> l0, l1, l2;

  // False when the shifted matrix is not positive definite.
  bool factor(const MpBandedMatrix& h, const mp::Float& shift) {
    const std::size_t n = h.dim;
    const mp::Bits bits = h.bits;
    l0.assign(n, mp::Float(bits));
    l1.assign(n, mp::Float(bits));
    l2.assign(n, mp::Float(bits));
    mp::Float acc(bits);
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= 2) mpfr_div(l2[i].get(), h.band2[i - 2].get(), l0[i - 2].get(), kRound);
      if (i >= 1) {
        mpfr_set(acc.get(), h.band1[i - 1].get(), kRound);
        if (i >= 2) {
          mpfr_mul(l1[i].get(), l2[i].get(), l1[i - 1].get(), kRound);
          mpfr_sub(acc.get(), acc.get(), l1[i].get(), kRound);
        }
        mpfr_div(l1[i].get(), acc.get(), l0[i - 1].get(), kRound);
      }
      mpfr_sub(acc.get(), h.diagonal[i].get(), shift.get(), kRound);
      if (i >= 1) {
        mpfr_neg(acc.get(), acc.get(), kRound);
        mpfr_fma(acc.get(), l1[i].get(), l1[i].get(), acc.get(), kRound);
        if (i >= 2) mpfr_fma(acc.get(), l2[i].get(), l2[i].get(), acc.get(), kRound);
        mpfr_neg(acc.get(), acc.get(), kRound);
      }
      if (mpfr_sgn(acc.get()) <= 0) return false;
      mpfr_sqrt(l0[i].get(), acc.get(), kRound);
    }
    return true;
  }

  // x <- (L L^T)^-1 x for every column.
  void solve(mp::Matrix& x) const {
    const std::size_t n = l0.size();
    for (std::size_t c = 0; c < x.cols(); ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        mpfr_ptr v = x(i, c).get();
        if (i >= 1) {
          mpfr_neg(v, v, kRound);
          mpfr_fma(v, l1[i].get(), x(i - 1, c).get(), v, kRound);
          if (i >= 2) mpfr_fma(v, l2[i].get(), x(i - 2, c).get(), v, kRound);
          mpfr_neg(v, v, kRound);
        }
        mpfr_div(v, v, l0[i].get(), kRound);
      }
      for (std::size_t ii = n; ii-- > 0;) {
        mpfr_ptr v = x(ii, c).get();
        if (ii + 1 < n) {
          mpfr_neg(v, v, kRound);
          mpfr_fma(v, l1[ii + 1].get(), x(ii + 1, c).get(), v, kRound);
          if (ii + 2 < n) mpfr_fma(v, l2[ii + 2].get(), x(ii + 2, c).get(), v, kRound);
          mpfr_neg(v, v, kRound);
        }
        mpfr_div(v, v, l0[ii].get(), kRound);
      }
    }
  }
};

mp::Float banded_norm_inf(const MpBandedMatrix& h) {
  // Only used for tolerances, so a double estimate lifted to full width is enough.
  return mp::Float(h.rounded().norm_inf(), h.bits);
}

Spectrum spectrum_from_precise(std::vector<mp::Float> values, std::size_t dim, mp::Bits bits) {
  Spectrum s;
  s.dim = dim;
  s.precision_bits = bits;
  std::sort(values.begin(), values.end());
  s.energies.reserve(values.size());
  for (const auto& v : values) s.energies.push_back(v.to_double());
  s.precise_energies = std::move(values);
  return s;
}

Spectrum lowest_dense_jacobi(const MpBandedMatrix& h, std::size_t k) {
  JacobiResult jr = jacobi_eigen(h.dense(), false);
  jr.eigenvalues.resize(k, mp::Float(h.bits));
  return spectrum_from_precise(std::move(jr.eigenvalues), h.dim, h.bits);
}

std::size_t ritz_width(std::size_t k, std::size_t n) {
  return std::min(n, k + std::max<std::size_t>(k, 16));
}

Spectrum lowest_ritz_subspace(const MpBandedMatrix& h, std::size_t k) {
  const std::size_t n = h.dim;
  const mp::Bits bits = h.bits;
  const std::size_t m = ritz_width(k, n);

  // Double-precision seed for the subspace and the shift.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> seed(h.rounded().dense());
  if (seed.info() != Eigen::Success) {
    throw ConvergenceError("double-precision seed solve failed", 0, 0.0);
  }
  const Eigen::VectorXd& seed_values = seed.eigenvalues();
  mp::Matrix x(n, m, bits);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < m; ++c) x(i, c) = seed.eigenvectors()(i, c);
  }
  orthonormalize(x);

  const mp::Float norm = banded_norm_inf(h);
  const double spread = seed_values[static_cast<Eigen::Index>(m - 1)] - seed_values[0];
  double margin = std::max(1e-3 * spread, 1e-9 * std::max(1.0, norm.to_double()));
  BandedCholesky chol;
  mp::Float shift(bits);
  bool factored = false;
  for (int attempt = 0; attempt < 30 && !factored; ++attempt, margin *= 4.0) {
    shift = seed_values[0] - margin;
    factored = chol.factor(h, shift);
  }
  if (!factored) throw ConvergenceError("shifted Cholesky factorization failed", 30, margin);

  mp::Float tolerance = norm;
  mpfr_div_2si(tolerance.get(), tolerance.get(), static_cast<long>(bits / 2 + 8), kRound);

  mp::Matrix y(n, m, bits);
  mp::Matrix scratch(n, m, bits);
  mp::Matrix gram(m, m, bits);
  mp::Float residual(bits), worst(bits), diff(bits);
  std::vector<mp::Float> ritz;

  for (int iteration = 0; iteration < kMaxRitzIterations; ++iteration) {
    banded_apply(h, x, y);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a; b < m; ++b) {
        mpfr_ptr acc = gram(a, b).get();
        mpfr_set_zero(acc, 1);
        for (std::size_t i = 0; i < n; ++i) mpfr_fma(acc, x(i, a).get(), y(i, b).get(), acc, kRound);
        if (b != a) gram(b, a) = gram(a, b);
      }
    }
    JacobiResult jr = jacobi_eigen(gram, true);
    multiply_right(x, jr.vectors, scratch);
    std::swap(x, scratch);
    multiply_right(y, jr.vectors, scratch);
    std::swap(y, scratch);
    ritz = std::move(jr.eigenvalues);

    mpfr_set_zero(worst.get(), 1);
    for (std::size_t c = 0; c < k; ++c) {
      mpfr_set_zero(residual.get(), 1);
      for (std::size_t i = 0; i < n; ++i) {
        mpfr_mul(diff.get(), ritz[c].get(), x(i, c).get(), kRound);
        mpfr_sub(diff.get(), y(i, c).get(), diff.get(), kRound);
        mpfr_fma(residual.get(), diff.get(), diff.get(), residual.get(), kRound);
      }
      mpfr_sqrt(residual.get(), residual.get(), kRound);
      if (residual > worst) worst = residual;
    }
    if (worst <= tolerance) {
      ritz.resize(k, mp::Float(bits));
      return spectrum_from_precise(std::move(ritz), n, bits);
    }

    chol.solve(x);
    orthonormalize(x);
  }
  throw ConvergenceError("Ritz subspace iteration cap reached", kMaxRitzIterations,
                         worst.to_double());
}

mp::Float stage_resolution(double norm, mp::Bits bits) {
  mp::Float r(64.0 * std::max(1.0, norm), std::max<mp::Bits>(bits, mp::kDoubleBits));
  mpfr_div_2si(r.get(), r.get(), static_cast<long>(bits), kRound);
  return r;
}

}  // namespace

mp::Float Spectrum::gap(std::size_t j) const {
  if (j + 1 >= energies.size()) throw InvalidParameter("gap index beyond the spectrum");
  if (!precise_energies.empty()) return precise_energies[j + 1] - precise_energies[j];
  return mp::Float(energies[j + 1] - energies[j], mp::kDoubleBits);
}

double Spectrum::local_mean_spacing(std::size_t j, std::size_t half_window) const {
  if (energies.size() < 2) return 0.0;
  const std::size_t lo = j > half_window ? j - half_window : 0;
  const std::size_t hi = std::min(energies.size() - 1, j + half_window + 1);
  if (hi <= lo) return 0.0;
  return (energies[hi] - energies[lo]) / static_cast<double>(hi - lo);
}

bool Spectrum::degenerate_with_next(std::size_t j) const {
  return gap(j).to_double() < kDegeneracyTolerance * local_mean_spacing(j);
}

Spectrum diagonalize(const FockMatrix& matrix, bool want_vectors) {
  const Eigen::MatrixXd h = matrix.dense();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      h, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("symmetric eigensolver did not converge", 0,
                           static_cast<double>(matrix.dim));
  }
  Spectrum s;
  s.dim = matrix.dim;
  s.energies.assign(solver.eigenvalues().data(),
                    solver.eigenvalues().data() + solver.eigenvalues().size());
  if (want_vectors) {
    s.real_vectors = solver.eigenvectors();
    check_residuals(h, s, s.real_vectors);
  }
  return s;
}

Spectrum diagonalize(const HermitianMatrix& matrix, bool want_vectors) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      matrix.entries, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("Hermitian eigensolver did not converge", 0,
                           static_cast<double>(matrix.dim));
  }
  Spectrum s;
  s.dim = matrix.dim;
  s.energies.assign(solver.eigenvalues().data(),
                    solver.eigenvalues().data() + solver.eigenvalues().size());
  if (want_vectors) {
    s.complex_vectors = solver.eigenvectors();
    check_residuals(matrix.entries, s, s.complex_vectors);
  }
  return s;
}

Spectrum diagonalize_mp(const MpBandedMatrix& matrix, std::size_t k_lowest, MpStrategy strategy) {
  if (matrix.bits < mp::kDoubleBits) {
    throw InvalidParameter("arbitrary-precision solves need at least 53 bits");
  }
  if (matrix.dim == 0) throw InvalidParameter("empty matrix");
  const std::size_t k = std::min(std::max<std::size_t>(k_lowest, 1), matrix.dim);
  if (strategy == MpStrategy::automatic) {
    const bool small = matrix.dim <= 64 || 2 * ritz_width(k, matrix.dim) >= matrix.dim;
    strategy = small ? MpStrategy::dense_jacobi : MpStrategy::ritz_subspace;
  }
  if (strategy == MpStrategy::dense_jacobi) return lowest_dense_jacobi(matrix, k);
  return lowest_ritz_subspace(matrix, k);
}

Spectrum diagonalize_mp(const MpBandedMatrix& matrix, std::size_t k_lowest) {
  return diagonalize_mp(matrix, k_lowest, MpStrategy::automatic);
}

Spectrum diagonalize_mp(const FockMatrix& matrix, mp::Bits bits, std::size_t k_lowest) {
  if (bits < mp::kDoubleBits) throw InvalidParameter("arbitrary-precision solves need at least 53 bits");
  return diagonalize_mp(MpBandedMatrix::lift(matrix, bits), k_lowest);
}

Spectrum merge_spectra(const Spectrum& a, const Spectrum& b) {
  Spectrum out;
  out.dim = a.dim + b.dim;
  out.precision_bits = std::min(a.precision_bits, b.precision_bits);
  out.converged = a.converged && b.converged;
  const bool precise = !a.precise_energies.empty() && !b.precise_energies.empty();
  if (precise) {
    std::vector<mp::Float> values = a.precise_energies;
    values.insert(values.end(), b.precise_energies.begin(), b.precise_energies.end());
    std::sort(values.begin(), values.end());
    for (const auto& v : values) out.energies.push_back(v.to_double());
    out.precise_energies = std::move(values);
  } else {
    out.energies = a.energies;
    out.energies.insert(out.energies.end(), b.energies.begin(), b.energies.end());
    std::sort(out.energies.begin(), out.energies.end());
  }
  return out;
}

void PrecisionPlan::validate() const {
  if (initial_bits < mp::kDoubleBits) throw InvalidParameter("initial_bits must be >= 53");
  if (max_bits < initial_bits) throw InvalidParameter("max_bits must be >= initial_bits");
  if (!(bits_step > 1.0) || !(dim_step > 1.0)) {
    throw InvalidParameter("escalation steps must exceed 1");
  }
  if (!(gap_rel_tol > 0.0)) throw InvalidParameter("gap_rel_tol must be positive");
}

GapConvergence converge_gap(const ModelParams& params, std::size_t gap_index,
                            const PrecisionPlan& plan) {
  validate(params, 3);
  plan.validate();
  const std::size_t wanted = gap_index + 2;
  if (wanted > params.dim) throw InvalidParameter("gap index exceeds the truncated basis");

  auto run_stage = [&](std::size_t dim, mp::Bits bits) {
    ModelParams p = params;
    p.dim = dim;
    const double norm = build_hamiltonian(p).norm_inf();
    Spectrum s;
    if (bits == mp::kDoubleBits) {
      if (p.parity_symmetric()) {
        auto [even, odd] = build_parity_blocks(p);
        s = merge_spectra(diagonalize(even, false), diagonalize(odd, false));
      } else {
        s = diagonalize(build_hamiltonian(p), false);
      }
    } else if (p.parity_symmetric()) {
      auto [even, odd] = build_parity_blocks_mp(p, bits);
      const Spectrum se = diagonalize_mp(even, std::min(wanted, even.dim));
      const Spectrum so = diagonalize_mp(odd, std::min(wanted, odd.dim));
      s = merge_spectra(se, so);
      s.dim = dim;
    } else {
      s = diagonalize_mp(build_hamiltonian_mp(p, bits), wanted);
    }
    s.precision_bits = bits;
    GapStage stage;
    stage.dim = dim;
    stage.bits = bits;
    stage.gap = s.gap(gap_index);
    stage.resolution = stage_resolution(norm, bits);
    return std::make_pair(std::move(stage), std::move(s));
  };

  GapConvergence result;
  auto [first, first_spectrum] = run_stage(params.dim, mp::kDoubleBits);
  result.stages.push_back(std::move(first));
  result.spectrum = std::move(first_spectrum);

  double bits_real = static_cast<double>(plan.initial_bits);
  double dim_real = static_cast<double>(params.dim);
  while (static_cast<mp::Bits>(std::llround(bits_real)) <= plan.max_bits) {
    dim_real *= plan.dim_step;
    const auto bits = static_cast<mp::Bits>(std::llround(bits_real));
    const auto dim = static_cast<std::size_t>(std::ceil(dim_real));
    auto [stage, spectrum] = run_stage(dim, bits);
    const GapStage& previous = result.stages.back();

    bool agree = false;
    if (stage.resolvable() && previous.resolvable()) {
      mp::Float change = mp::abs(stage.gap - previous.gap);
      mp::Float bound = mp::abs(stage.gap);
      bound *= plan.gap_rel_tol;
      agree = change <= bound;
    }
    result.stages.push_back(std::move(stage));
    result.spectrum = std::move(spectrum);
    if (agree) {
      result.converged = true;
      break;
    }
    bits_real *= plan.bits_step;
  }
  result.gap = result.stages.back().gap;
  result.spectrum.converged = result.converged;
  return result;
}

}  // namespace kpo
