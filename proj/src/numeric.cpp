#include "qnormal/numeric.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace qn {
namespace {

mpfr_ptr raw(Real& x) { return x.backend().data(); }
mpfr_srcptr raw(const Real& x) { return x.backend().data(); }

unsigned digits10_for_bits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

using Binary = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
using Unary = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

Real apply(Binary f, const Real& a, const Real& b, mpfr_rnd_t rnd) {
  Real r;
  f(raw(r), raw(a), raw(b), rnd);
  return r;
}

Real apply(Unary f, const Real& a, mpfr_rnd_t rnd) {
  Real r;
  f(raw(r), raw(a), rnd);
  return r;
}

Interval monotone(Unary f, const Interval& x) {
  return Interval{apply(f, x.lo, MPFR_RNDD), apply(f, x.hi, MPFR_RNDU)};
}

}  // namespace

unsigned precision_bits() {
  Real probe;
  return static_cast<unsigned>(mpfr_get_prec(raw(probe)));
}

void set_precision_bits(unsigned bits) {
  if (bits < 32) throw DomainError("precision must be at least 32 bits");
  Real::default_precision(digits10_for_bits(bits));
}

namespace {
// Boost starts mpfr_float at 20 digits; raise it before any Real is made.
const bool kPrecisionInitialized = (set_precision_bits(kDefaultPrecisionBits), true);
}  // namespace

PrecisionGuard::PrecisionGuard(unsigned bits) : saved_digits_(Real::default_precision()) {
  if (bits > precision_bits()) Real::default_precision(digits10_for_bits(bits));
}

PrecisionGuard::~PrecisionGuard() { Real::default_precision(saved_digits_); }

Rational parse_rational(std::string_view text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.empty()) throw DomainError("empty rational literal");
  auto is_int = [](std::string_view v) {
    std::size_t i = (!v.empty() && (v[0] == '-' || v[0] == '+')) ? 1 : 0;
    if (i == v.size()) return false;
    return std::all_of(v.begin() + i, v.end(),
                       [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
  };
  auto int_of = [](std::string v) {
    if (!v.empty() && v[0] == '+') v.erase(0, 1);
    return BigInt(v);
  };
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!is_int(num) || !is_int(den)) throw DomainError("malformed rational '" + s + "'");
    BigInt d = int_of(den);
    if (d == 0) throw DomainError("zero denominator in '" + s + "'");
    return Rational(int_of(num), d);
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole.erase(0, 1);
    if (whole.empty()) whole = "0";
    if (frac.empty() || !is_int(whole) || !is_int(frac) || frac[0] == '-' || frac[0] == '+')
      throw DomainError("malformed decimal '" + s + "'");
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    Rational q(BigInt(whole) * scale + BigInt(frac), scale);
    return neg ? Rational(-q) : q;
  }
  if (!is_int(s)) throw DomainError("malformed rational '" + s + "'");
  return Rational(int_of(s));
}

std::string to_string(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

std::string to_string(const BigInt& z) { return z.str(); }

BigInt floor_rational(const Rational& q) {
  BigInt n = numerator(q), d = denominator(q);
  BigInt f = n / d;  // truncates toward zero
  if (n < 0 && f * d != n) f -= 1;
  return f;
}

Rational normalize_turn(const Rational& turn) {
  Rational r = turn - Rational(floor_rational(turn));
  return r;
}

Rational turn_distance(const Rational& a, const Rational& b) {
  Rational d = normalize_turn(a - b);
  Rational other = Rational(1) - d;
  return d < other ? d : other;
}

Real to_real(const Rational& q, mpfr_rnd_t rnd) {
  Real r;
  mpfr_set_q(raw(r), q.backend().data(), rnd);
  return r;
}

Real pi_real() {
  Real r;
  mpfr_const_pi(raw(r), MPFR_RNDN);
  return r;
}

Real two_pi_real() { return pi_real() * 2; }

std::string format_real(const Real& x, int digits) {
  if (mpfr_nan_p(raw(x))) return "nan";
  if (mpfr_inf_p(raw(x))) return mpfr_sgn(raw(x)) < 0 ? "-inf" : "inf";
  if (mpfr_zero_p(raw(x))) return "0";
  return x.str(digits, std::ios_base::scientific);
}

double to_double(const Real& x) { return mpfr_get_d(raw(x), MPFR_RNDN); }

Interval Interval::point(const Rational& q) {
  return Interval{to_real(q, MPFR_RNDD), to_real(q, MPFR_RNDU)};
}

Interval Interval::point(const Real& x) { return Interval{x, x}; }

Interval Interval::hull(const Real& a, const Real& b) {
  return a <= b ? Interval{a, b} : Interval{b, a};
}

Real Interval::width() const { return apply(mpfr_sub, hi, lo, MPFR_RNDU); }

Real Interval::mid() const { return (lo + hi) / 2; }

Interval operator+(const Interval& a, const Interval& b) {
  return Interval{apply(mpfr_add, a.lo, b.lo, MPFR_RNDD), apply(mpfr_add, a.hi, b.hi, MPFR_RNDU)};
}

Interval operator-(const Interval& a, const Interval& b) {
  return Interval{apply(mpfr_sub, a.lo, b.hi, MPFR_RNDD), apply(mpfr_sub, a.hi, b.lo, MPFR_RNDU)};
}

Interval operator-(const Interval& a) { return Interval{-a.hi, -a.lo}; }

Interval operator*(const Interval& a, const Interval& b) {
  const Real* xs[2] = {&a.lo, &a.hi};
  const Real* ys[2] = {&b.lo, &b.hi};
  Interval out{apply(mpfr_mul, a.lo, b.lo, MPFR_RNDD), apply(mpfr_mul, a.lo, b.lo, MPFR_RNDU)};
  for (const Real* x : xs)
    for (const Real* y : ys) {
      Real lo = apply(mpfr_mul, *x, *y, MPFR_RNDD);
      Real hi = apply(mpfr_mul, *x, *y, MPFR_RNDU);
      if (lo < out.lo) out.lo = lo;
      if (hi > out.hi) out.hi = hi;
    }
  return out;
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.lo <= 0 && b.hi >= 0) throw InvariantError("interval division by an enclosure of zero");
  const Real* xs[2] = {&a.lo, &a.hi};
  const Real* ys[2] = {&b.lo, &b.hi};
  Interval out{apply(mpfr_div, a.lo, b.lo, MPFR_RNDD), apply(mpfr_div, a.lo, b.lo, MPFR_RNDU)};
  for (const Real* x : xs)
    for (const Real* y : ys) {
      Real lo = apply(mpfr_div, *x, *y, MPFR_RNDD);
      Real hi = apply(mpfr_div, *x, *y, MPFR_RNDU);
      if (lo < out.lo) out.lo = lo;
      if (hi > out.hi) out.hi = hi;
    }
  return out;
}

Interval exp(const Interval& x) { return monotone(mpfr_exp, x); }
Interval expm1(const Interval& x) { return monotone(mpfr_expm1, x); }

Interval log(const Interval& x) {
  if (x.lo <= 0) throw InvariantError("log of an enclosure reaching zero");
  return monotone(mpfr_log, x);
}

Interval log1p(const Interval& x) {
  if (x.lo <= -1) throw InvariantError("log1p of an enclosure reaching -1");
  return monotone(mpfr_log1p, x);
}

Interval sqrt(const Interval& x) {
  if (x.lo < 0) throw InvariantError("sqrt of a negative enclosure");
  return monotone(mpfr_sqrt, x);
}

Interval rootn(const Interval& x, unsigned long k) {
  if (x.lo < 0) throw InvariantError("root of a negative enclosure");
  Interval r;
  mpfr_rootn_ui(raw(r.lo), raw(x.lo), k, MPFR_RNDD);
  mpfr_rootn_ui(raw(r.hi), raw(x.hi), k, MPFR_RNDU);
  return r;
}

Interval sin_increasing(const Interval& x) {
  if (x.lo < 0 || x.hi > Real(1.5)) throw InvariantError("sin enclosure outside [0, 1.5]");
  return monotone(mpfr_sin, x);
}

Interval pi_interval() {
  Interval r;
  mpfr_const_pi(raw(r.lo), MPFR_RNDD);
  mpfr_const_pi(raw(r.hi), MPFR_RNDU);
  return r;
}

BigInt certified_floor(const Interval& x) {
  BigInt lo, hi;
  mpfr_get_z(lo.backend().data(), raw(x.lo), MPFR_RNDD);
  mpfr_get_z(hi.backend().data(), raw(x.hi), MPFR_RNDD);
  if (lo != hi) throw InvariantError("floor not determined at current precision");
  return lo;
}

unsigned bits_for_exp(const Rational& x) {
  if (x <= 0) return 2;
  double upper = std::ceil(static_cast<double>(x) * 1.4426950408889634) + 2;
  return static_cast<unsigned>(upper);
}

}  // namespace qn
