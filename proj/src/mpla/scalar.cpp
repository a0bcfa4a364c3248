#include "sdpsens/mpla/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "sdpsens/error.hpp"

namespace sdpsens::mpla {

namespace {

// Per thread so that concurrent workers can run at their own precision.
thread_local int g_default_precision = 1024;

int resolve(int bits) { return bits > 0 ? bits : g_default_precision; }

mpfr_prec_t wider(const MpScalar& a, const MpScalar& b) {
  return std::max<mpfr_prec_t>(a.precision_bits(), b.precision_bits());
}

}  // namespace

int default_precision() { return g_default_precision; }

void set_default_precision(int bits) {
  if (bits < MPFR_PREC_MIN || bits > 1 << 20) {
    throw Error("precision out of range: " + std::to_string(bits));
  }
  g_default_precision = bits;
}

PrecisionGuard::PrecisionGuard(int bits) : saved_(default_precision()) {
  set_default_precision(bits);
}

PrecisionGuard::~PrecisionGuard() { set_default_precision(saved_); }

int round_trip_digits(int bits) {
  return static_cast<int>(std::ceil(bits * 0.30102999566398120)) + 2;
}

MpScalar::MpScalar() {
  mpfr_init2(value_, resolve(0));
  mpfr_set_zero(value_, 1);
}

MpScalar::MpScalar(int v) {
  mpfr_init2(value_, resolve(0));
  mpfr_set_si(value_, v, MPFR_RNDN);
}

MpScalar::MpScalar(long v) {
  mpfr_init2(value_, resolve(0));
  mpfr_set_si(value_, v, MPFR_RNDN);
}

MpScalar::MpScalar(double v, int bits) {
  mpfr_init2(value_, resolve(bits));
  mpfr_set_d(value_, v, MPFR_RNDN);
}

MpScalar::MpScalar(const MpScalar& other) {
  mpfr_init2(value_, mpfr_get_prec(other.value_));
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

MpScalar::MpScalar(MpScalar&& other) noexcept {
  mpfr_init2(value_, MPFR_PREC_MIN);
  mpfr_swap(value_, other.value_);
}

MpScalar::~MpScalar() { mpfr_clear(value_); }

MpScalar& MpScalar::operator=(const MpScalar& other) {
  if (this != &other) {
    mpfr_set_prec(value_, mpfr_get_prec(other.value_));
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

MpScalar& MpScalar::operator=(MpScalar&& other) noexcept {
  mpfr_swap(value_, other.value_);
  return *this;
}

MpScalar& MpScalar::operator=(int v) {
  mpfr_set_si(value_, v, MPFR_RNDN);
  return *this;
}

MpScalar MpScalar::parse(std::string_view text, int bits) {
  MpScalar out = zero(resolve(bits));
  std::string buf(text);
  // Trim surrounding whitespace; mpfr_strtofr reports the parsed extent.
  const auto first = buf.find_first_not_of(" \t\r\n");
  const auto last = buf.find_last_not_of(" \t\r\n");
  if (first == std::string::npos) throw Error("empty numeric literal");
  buf = buf.substr(first, last - first + 1);
  char* end = nullptr;
  mpfr_strtofr(out.value_, buf.c_str(), &end, 10, MPFR_RNDN);
  if (end == buf.c_str() || *end != '\0') {
    throw Error("malformed numeric literal '" + buf + "'");
  }
  return out;
}

MpScalar MpScalar::pow2(long e, int bits) {
  MpScalar out = zero(resolve(bits));
  mpfr_set_ui_2exp(out.value_, 1, e, MPFR_RNDN);
  return out;
}

MpScalar MpScalar::zero(int bits) {
  MpScalar out(0.0, resolve(bits));
  return out;
}

int MpScalar::precision_bits() const { return static_cast<int>(mpfr_get_prec(value_)); }

void MpScalar::set_precision(int bits) { mpfr_prec_round(value_, resolve(bits), MPFR_RNDN); }

double MpScalar::to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }

long MpScalar::to_long() const { return mpfr_get_si(value_, MPFR_RNDN); }

std::string MpScalar::to_string(int digits) const {
  if (digits <= 0) digits = round_trip_digits(precision_bits());
  if (mpfr_nan_p(value_)) return "nan";
  if (mpfr_inf_p(value_)) return mpfr_signbit(value_) ? "-inf" : "inf";
  char* raw = nullptr;
  mpfr_asprintf(&raw, "%.*Re", digits - 1, value_);
  std::string out(raw);
  mpfr_free_str(raw);
  return out;
}

bool MpScalar::is_finite() const { return mpfr_number_p(value_) != 0; }
bool MpScalar::is_zero() const { return mpfr_zero_p(value_) != 0; }
int MpScalar::sign() const { return mpfr_sgn(value_); }

void MpScalar::widen_to(const MpScalar& other) {
  if (mpfr_get_prec(other.value_) > mpfr_get_prec(value_)) {
    mpfr_prec_round(value_, mpfr_get_prec(other.value_), MPFR_RNDN);
  }
}

MpScalar& MpScalar::operator+=(const MpScalar& rhs) {
  widen_to(rhs);
  mpfr_add(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

MpScalar& MpScalar::operator-=(const MpScalar& rhs) {
  widen_to(rhs);
  mpfr_sub(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

MpScalar& MpScalar::operator*=(const MpScalar& rhs) {
  widen_to(rhs);
  mpfr_mul(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

MpScalar& MpScalar::operator/=(const MpScalar& rhs) {
  widen_to(rhs);
  mpfr_div(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

MpScalar& MpScalar::add_product(const MpScalar& a, const MpScalar& b) {
  widen_to(a);
  widen_to(b);
  mpfr_fma(value_, a.value_, b.value_, value_, MPFR_RNDN);
  return *this;
}

MpScalar& MpScalar::sub_product(const MpScalar& a, const MpScalar& b) {
  widen_to(a);
  widen_to(b);
  // this - a*b = -(a*b - this)
  mpfr_fms(value_, a.value_, b.value_, value_, MPFR_RNDN);
  mpfr_neg(value_, value_, MPFR_RNDN);
  return *this;
}

MpScalar MpScalar::operator-() const {
  MpScalar out(*this);
  mpfr_neg(out.value_, out.value_, MPFR_RNDN);
  return out;
}

MpScalar operator+(const MpScalar& a, const MpScalar& b) {
  MpScalar out = MpScalar::zero(static_cast<int>(wider(a, b)));
  mpfr_add(out.value_, a.value_, b.value_, MPFR_RNDN);
  return out;
}

MpScalar operator-(const MpScalar& a, const MpScalar& b) {
  MpScalar out = MpScalar::zero(static_cast<int>(wider(a, b)));
  mpfr_sub(out.value_, a.value_, b.value_, MPFR_RNDN);
  return out;
}

MpScalar operator*(const MpScalar& a, const MpScalar& b) {
  MpScalar out = MpScalar::zero(static_cast<int>(wider(a, b)));
  mpfr_mul(out.value_, a.value_, b.value_, MPFR_RNDN);
  return out;
}

MpScalar operator/(const MpScalar& a, const MpScalar& b) {
  MpScalar out = MpScalar::zero(static_cast<int>(wider(a, b)));
  mpfr_div(out.value_, a.value_, b.value_, MPFR_RNDN);
  return out;
}

bool operator==(const MpScalar& a, const MpScalar& b) {
  return mpfr_equal_p(a.value_, b.value_) != 0;
}

std::partial_ordering operator<=>(const MpScalar& a, const MpScalar& b) {
  if (mpfr_unordered_p(a.value_, b.value_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp(a.value_, b.value_);
  if (c < 0) return std::partial_ordering::less;
  if (c > 0) return std::partial_ordering::greater;
  return std::partial_ordering::equivalent;
}

MpScalar abs(const MpScalar& x) {
  MpScalar out(x);
  mpfr_abs(out.raw(), out.raw(), MPFR_RNDN);
  return out;
}

MpScalar sqrt(const MpScalar& x) {
  MpScalar out = MpScalar::zero(x.precision_bits());
  mpfr_sqrt(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}

MpScalar max(const MpScalar& a, const MpScalar& b) { return a < b ? b : a; }
MpScalar min(const MpScalar& a, const MpScalar& b) { return b < a ? b : a; }

MpScalar log2(const MpScalar& x) {
  MpScalar out = MpScalar::zero(x.precision_bits());
  mpfr_log2(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}

MpScalar log10(const MpScalar& x) {
  MpScalar out = MpScalar::zero(x.precision_bits());
  mpfr_log10(out.raw(), x.raw(), MPFR_RNDN);
  return out;
}

MpScalar hypot(const MpScalar& a, const MpScalar& b) {
  MpScalar out = MpScalar::zero(std::max(a.precision_bits(), b.precision_bits()));
  mpfr_hypot(out.raw(), a.raw(), b.raw(), MPFR_RNDN);
  return out;
}

std::ostream& operator<<(std::ostream& os, const MpScalar& x) {
  const auto p = os.precision();
  return os << x.to_string(p > 0 ? static_cast<int>(p) : 17);
}

}  // namespace sdpsens::mpla
