#include "kpo/jacobi.hpp"

#include <algorithm>
#include <numeric>

#include "kpo/error.hpp"

namespace kpo {

namespace {

constexpr mpfr_rnd_t kRound = MPFR_RNDN;

mp::Float off_diagonal_norm(const mp::Matrix& a) {
  mp::Float sum(a.bits());
  mp::Float sq(a.bits());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      mpfr_sqr(sq.get(), a(i, j).get(), kRound);
      mpfr_add(sum.get(), sum.get(), sq.get(), kRound);
    }
  }
  mpfr_mul_ui(sum.get(), sum.get(), 2, kRound);
  return mp::sqrt(sum);
}

mp::Float frobenius_norm(const mp::Matrix& a) {
  mp::Float sum(a.bits());
  mp::Float sq(a.bits());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      mpfr_sqr(sq.get(), a(i, j).get(), kRound);
      mpfr_add(sum.get(), sum.get(), sq.get(), kRound);
    }
  }
  return mp::sqrt(sum);
}

}  // namespace

JacobiResult jacobi_eigen(mp::Matrix a, bool want_vectors, int max_sweeps) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw InvalidParameter("Jacobi needs a square matrix");
  const mp::Bits bits = a.bits();

  JacobiResult result;
  result.frobenius = frobenius_norm(a);
  if (want_vectors) result.vectors = mp::Matrix::identity(n, bits);

  // Elements at or below this are left alone.
  mp::Float tolerance = result.frobenius;
  mpfr_div_2si(tolerance.get(), tolerance.get(), static_cast<long>(bits), kRound);
  mpfr_div_ui(tolerance.get(), tolerance.get(), std::max<std::size_t>(n, 1), kRound);

  mp::Float theta(bits), t(bits), c(bits), s(bits), tau(bits), g(bits), h(bits), tmp(bits);

  auto rotate_pair = [&](mp::Float& x, mp::Float& y) {
    // x' = x - s (y + x tau), y' = y + s (x - y tau)
    mpfr_set(g.get(), x.get(), kRound);
    mpfr_set(h.get(), y.get(), kRound);
    mpfr_fma(tmp.get(), g.get(), tau.get(), h.get(), kRound);
    mpfr_mul(tmp.get(), tmp.get(), s.get(), kRound);
    mpfr_sub(x.get(), g.get(), tmp.get(), kRound);
    mpfr_fms(tmp.get(), h.get(), tau.get(), g.get(), kRound);
    mpfr_mul(tmp.get(), tmp.get(), s.get(), kRound);
    mpfr_sub(y.get(), h.get(), tmp.get(), kRound);
  };

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    long rotations_this_sweep = 0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        mp::Float& apq = a(p, q);
        if (mpfr_cmpabs(apq.get(), tolerance.get()) <= 0) continue;
        ++rotations_this_sweep;

        // theta = (a_qq - a_pp) / (2 a_pq); t = sgn(theta) / (|theta| + sqrt(theta^2 + 1))
        mpfr_sub(theta.get(), a(q, q).get(), a(p, p).get(), kRound);
        mpfr_div(theta.get(), theta.get(), apq.get(), kRound);
        mpfr_div_2ui(theta.get(), theta.get(), 1, kRound);
        mpfr_sqr(tmp.get(), theta.get(), kRound);
        mpfr_add_ui(tmp.get(), tmp.get(), 1, kRound);
        mpfr_sqrt(tmp.get(), tmp.get(), kRound);
        mpfr_abs(t.get(), theta.get(), kRound);
        mpfr_add(t.get(), t.get(), tmp.get(), kRound);
        mpfr_ui_div(t.get(), 1, t.get(), kRound);
        if (mpfr_sgn(theta.get()) < 0) mpfr_neg(t.get(), t.get(), kRound);

        // c = 1/sqrt(t^2 + 1), s = t c, tau = s / (1 + c)
        mpfr_sqr(c.get(), t.get(), kRound);
        mpfr_add_ui(c.get(), c.get(), 1, kRound);
        mpfr_rec_sqrt(c.get(), c.get(), kRound);
        mpfr_mul(s.get(), t.get(), c.get(), kRound);
        mpfr_add_ui(tau.get(), c.get(), 1, kRound);
        mpfr_div(tau.get(), s.get(), tau.get(), kRound);

        mpfr_mul(tmp.get(), t.get(), apq.get(), kRound);
        mpfr_sub(a(p, p).get(), a(p, p).get(), tmp.get(), kRound);
        mpfr_add(a(q, q).get(), a(q, q).get(), tmp.get(), kRound);
        mpfr_set_zero(apq.get(), 1);
        mpfr_set_zero(a(q, p).get(), 1);

        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          rotate_pair(a(r, p), a(r, q));
          mpfr_set(a(p, r).get(), a(r, p).get(), kRound);
          mpfr_set(a(q, r).get(), a(r, q).get(), kRound);
        }
        if (want_vectors) {
          for (std::size_t r = 0; r < n; ++r) rotate_pair(result.vectors(r, p), result.vectors(r, q));
        }
      }
    }
    result.rotations += rotations_this_sweep;
    if (rotations_this_sweep == 0) break;
  }
  result.sweeps = sweep;
  result.off_norm = off_diagonal_norm(a);
  if (sweep == max_sweeps) {
    throw ConvergenceError("Jacobi sweep cap reached", sweep, result.off_norm.to_double());
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  result.eigenvalues.reserve(n);
  for (std::size_t i : order) result.eigenvalues.push_back(a(i, i));
  if (want_vectors) {
    mp::Matrix sorted(n, n, bits);
    for (std::size_t col = 0; col < n; ++col) {
      for (std::size_t r = 0; r < n; ++r) sorted(r, col) = result.vectors(r, order[col]);
    }
    result.vectors = std::move(sorted);
  }
  result.diagonalized = std::move(a);
  return result;
}

}  // namespace kpo
