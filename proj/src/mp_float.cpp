#include "kpo/mp_float.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "kpo/error.hpp"

namespace kpo::mp {

namespace {

constexpr mpfr_rnd_t kRound = MPFR_RNDN;

Bits wider(const Float& a, const Float& b) { return std::max(a.bits(), b.bits()); }

void check_bits(Bits bits) {
  if (bits < MPFR_PREC_MIN || bits > MPFR_PREC_MAX) {
    throw InvalidParameter("mantissa width out of range: " + std::to_string(bits));
  }
}

}  // namespace

Float::Float(Bits bits) {
  check_bits(bits);
  mpfr_init2(value_, bits);
  mpfr_set_zero(value_, 1);
}

Float::Float(double value, Bits bits) {
  check_bits(bits);
  mpfr_init2(value_, bits);
  mpfr_set_d(value_, value, kRound);
}

Float::Float(const Float& other) {
  mpfr_init2(value_, other.bits());
  mpfr_set(value_, other.value_, kRound);
}

Float::Float(Float&& other) noexcept {
  // Leaves `other` as a valid zero at the minimum precision.
  mpfr_init2(value_, MPFR_PREC_MIN);
  mpfr_set_zero(value_, 1);
  mpfr_swap(value_, other.value_);
}

Float& Float::operator=(const Float& other) {
  if (this != &other) {
    mpfr_set_prec(value_, other.bits());
    mpfr_set(value_, other.value_, kRound);
  }
  return *this;
}

Float& Float::operator=(Float&& other) noexcept {
  mpfr_swap(value_, other.value_);
  return *this;
}

Float& Float::operator=(double value) {
  mpfr_set_d(value_, value, kRound);
  return *this;
}

Float::~Float() { mpfr_clear(value_); }

Float Float::from_string(std::string_view text, Bits bits) {
  Float out(bits);
  const std::string owned(text);
  if (mpfr_set_str(out.value_, owned.c_str(), 10, kRound) != 0) {
    throw InvalidParameter("not a decimal number: '" + owned + "'");
  }
  return out;
}

Float Float::sqrt_of(unsigned long n, Bits bits) {
  Float out(bits);
  mpfr_sqrt_ui(out.value_, n, kRound);
  return out;
}

std::string Float::to_string(int digits) const {
  if (mpfr_nan_p(value_)) return "nan";
  if (mpfr_inf_p(value_)) return mpfr_sgn(value_) > 0 ? "inf" : "-inf";
  char* buffer = nullptr;
  const std::string format = "%." + std::to_string(std::max(1, digits - 1)) + "Re";
  if (mpfr_asprintf(&buffer, format.c_str(), value_) < 0) {
    throw std::runtime_error("mpfr_asprintf failed");
  }
  std::string out(buffer);
  mpfr_free_str(buffer);
  return out;
}

Float& Float::operator+=(const Float& rhs) {
  if (rhs.bits() > bits()) mpfr_prec_round(value_, rhs.bits(), kRound);
  mpfr_add(value_, value_, rhs.value_, kRound);
  return *this;
}

Float& Float::operator-=(const Float& rhs) {
  if (rhs.bits() > bits()) mpfr_prec_round(value_, rhs.bits(), kRound);
  mpfr_sub(value_, value_, rhs.value_, kRound);
  return *this;
}

Float& Float::operator*=(const Float& rhs) {
  if (rhs.bits() > bits()) mpfr_prec_round(value_, rhs.bits(), kRound);
  mpfr_mul(value_, value_, rhs.value_, kRound);
  return *this;
}

Float& Float::operator/=(const Float& rhs) {
  if (rhs.bits() > bits()) mpfr_prec_round(value_, rhs.bits(), kRound);
  mpfr_div(value_, value_, rhs.value_, kRound);
  return *this;
}

Float& Float::operator*=(double rhs) {
  mpfr_mul_d(value_, value_, rhs, kRound);
  return *this;
}

Float operator+(const Float& a, const Float& b) {
  Float out(wider(a, b));
  mpfr_add(out.value_, a.value_, b.value_, kRound);
  return out;
}

Float operator-(const Float& a, const Float& b) {
  Float out(wider(a, b));
  mpfr_sub(out.value_, a.value_, b.value_, kRound);
  return out;
}

Float operator*(const Float& a, const Float& b) {
  Float out(wider(a, b));
  mpfr_mul(out.value_, a.value_, b.value_, kRound);
  return out;
}

Float operator/(const Float& a, const Float& b) {
  Float out(wider(a, b));
  mpfr_div(out.value_, a.value_, b.value_, kRound);
  return out;
}

Float operator-(const Float& a) {
  Float out(a.bits());
  mpfr_neg(out.value_, a.value_, kRound);
  return out;
}

Float abs(const Float& x) {
  Float out(x.bits());
  mpfr_abs(out.get(), x.get(), kRound);
  return out;
}

Float sqrt(const Float& x) {
  Float out(x.bits());
  mpfr_sqrt(out.get(), x.get(), kRound);
  return out;
}

Float log(const Float& x) {
  Float out(x.bits());
  mpfr_log(out.get(), x.get(), kRound);
  return out;
}

Float exp(const Float& x) {
  Float out(x.bits());
  mpfr_exp(out.get(), x.get(), kRound);
  return out;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, Bits bits)
    : rows_(rows), cols_(cols), bits_(bits), data_(rows * cols, Float(bits)) {}

Matrix Matrix::identity(std::size_t n, Bits bits) {
  Matrix out(n, n, bits);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

}  // namespace kpo::mp
