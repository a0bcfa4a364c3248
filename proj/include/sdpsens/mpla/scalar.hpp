#pragma once

#include <mpfr.h>

#include <compare>
#include <iosfwd>
#include <string>
#include <string_view>

namespace sdpsens::mpla {

/// Mantissa precision used for newly constructed scalars. Thread-local:
/// worker threads start at 1024 bits and must set their own.
int default_precision();
void set_default_precision(int bits);

/// Sets the default precision for the lifetime of the guard.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(int bits);
  ~PrecisionGuard();
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  int saved_;
};

/// Number of decimal digits needed to round-trip a value of `bits` mantissa
/// bits: ceil(bits * log10(2)) + 2.
int round_trip_digits(int bits);

/// Arbitrary-precision real backed by MPFR (round-to-nearest).
///
/// Binary arithmetic produces a result at the larger of the operand
/// precisions. Compound assignment widens the left operand when needed.
class MpScalar {
 public:
  MpScalar();
  MpScalar(int v);  // NOLINT(google-explicit-constructor)
  MpScalar(long v);  // NOLINT(google-explicit-constructor)
  explicit MpScalar(double v, int bits = 0);
  MpScalar(const MpScalar& other);
  MpScalar(MpScalar&& other) noexcept;
  ~MpScalar();

  MpScalar& operator=(const MpScalar& other);
  MpScalar& operator=(MpScalar&& other) noexcept;
  MpScalar& operator=(int v);

  /// Parses a decimal literal ("1e-16", "-2.5"). Throws sdpsens::Error on
  /// malformed input. bits = 0 selects default_precision().
  static MpScalar parse(std::string_view text, int bits = 0);
  /// 2^e exactly.
  static MpScalar pow2(long e, int bits = 0);
  static MpScalar zero(int bits);

  int precision_bits() const;
  /// Changes the precision in place, rounding the stored value.
  void set_precision(int bits);

  double to_double() const;
  long to_long() const;
  /// Scientific notation with `digits` significant digits; digits = 0 uses
  /// round_trip_digits(precision_bits()).
  std::string to_string(int digits = 0) const;

  bool is_finite() const;
  bool is_zero() const;
  int sign() const;

  MpScalar& operator+=(const MpScalar& rhs);
  MpScalar& operator-=(const MpScalar& rhs);
  MpScalar& operator*=(const MpScalar& rhs);
  MpScalar& operator/=(const MpScalar& rhs);
  /// this += a * b with a single rounding.
  MpScalar& add_product(const MpScalar& a, const MpScalar& b);
  /// this -= a * b with a single rounding.
  MpScalar& sub_product(const MpScalar& a, const MpScalar& b);

  MpScalar operator-() const;

  friend MpScalar operator+(const MpScalar& a, const MpScalar& b);
  friend MpScalar operator-(const MpScalar& a, const MpScalar& b);
  friend MpScalar operator*(const MpScalar& a, const MpScalar& b);
  friend MpScalar operator/(const MpScalar& a, const MpScalar& b);

  friend bool operator==(const MpScalar& a, const MpScalar& b);
  friend std::partial_ordering operator<=>(const MpScalar& a, const MpScalar& b);

  mpfr_srcptr raw() const { return value_; }
  mpfr_ptr raw() { return value_; }

 private:
  void widen_to(const MpScalar& other);
  mpfr_t value_;
};

MpScalar abs(const MpScalar& x);
MpScalar sqrt(const MpScalar& x);
MpScalar max(const MpScalar& a, const MpScalar& b);
MpScalar min(const MpScalar& a, const MpScalar& b);
MpScalar log2(const MpScalar& x);
MpScalar log10(const MpScalar& x);
MpScalar hypot(const MpScalar& a, const MpScalar& b);

std::ostream& operator<<(std::ostream& os, const MpScalar& x);

}  // namespace sdpsens::mpla
