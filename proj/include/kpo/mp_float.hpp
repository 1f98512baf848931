#pragma once

#include <mpfr.h>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kpo::mp {

using Bits = mpfr_prec_t;

inline constexpr Bits kDoubleBits = 53;

// Owning RAII handle around an mpfr_t. Every value carries its own mantissa
// width; binary operators produce the wider of the two operands. All rounding
// is to nearest.
class Float {
 public:
  explicit Float(Bits bits = 128);
  Float(double value, Bits bits);
  Float(const Float& other);
  Float(Float&& other) noexcept;
  Float& operator=(const Float& other);
  Float& operator=(Float&& other) noexcept;
  Float& operator=(double value);
  ~Float();

  static Float from_string(std::string_view text, Bits bits);
  static Float sqrt_of(unsigned long n, Bits bits);

  mpfr_ptr get() { return value_; }
  mpfr_srcptr get() const { return value_; }
  Bits bits() const { return mpfr_get_prec(value_); }

  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  long double to_long_double() const { return mpfr_get_ld(value_, MPFR_RNDN); }
  // Decimal scientific notation with `digits` significant digits.
  std::string to_string(int digits = 20) const;

  bool is_zero() const { return mpfr_zero_p(value_) != 0; }
  bool is_finite() const { return mpfr_number_p(value_) != 0; }
  int sign() const { return mpfr_sgn(value_); }

  Float& operator+=(const Float& rhs);
  Float& operator-=(const Float& rhs);
  Float& operator*=(const Float& rhs);
  Float& operator/=(const Float& rhs);
  Float& operator*=(double rhs);

  friend Float operator+(const Float& a, const Float& b);
  friend Float operator-(const Float& a, const Float& b);
  friend Float operator*(const Float& a, const Float& b);
  friend Float operator/(const Float& a, const Float& b);
  friend Float operator-(const Float& a);

  friend bool operator<(const Float& a, const Float& b) { return mpfr_less_p(a.value_, b.value_) != 0; }
  friend bool operator>(const Float& a, const Float& b) { return mpfr_greater_p(a.value_, b.value_) != 0; }
  friend bool operator<=(const Float& a, const Float& b) { return mpfr_lessequal_p(a.value_, b.value_) != 0; }
  friend bool operator>=(const Float& a, const Float& b) { return mpfr_greaterequal_p(a.value_, b.value_) != 0; }
  friend bool operator==(const Float& a, const Float& b) { return mpfr_equal_p(a.value_, b.value_) != 0; }

 private:
  mpfr_t value_;
};

Float abs(const Float& x);
Float sqrt(const Float& x);
Float log(const Float& x);
Float exp(const Float& x);

// Dense row-major matrix of Floats sharing one precision.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Bits bits);

  static Matrix identity(std::size_t n, Bits bits);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Bits bits() const { return bits_; }

  Float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Float& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Bits bits_ = 128;
  std::vector<Float> data_;
};

}  // namespace kpo::mp
