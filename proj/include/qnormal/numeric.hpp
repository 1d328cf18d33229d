// Exact and high-precision number types shared by every module.
#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <mpfr.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qn {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using Real = boost::multiprecision::mpfr_float;

// Bad input or violated precondition. The CLI maps this to a usage failure.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Something that must hold by construction did not. Distinct exit code.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr unsigned kDefaultPrecisionBits = 200;

// Working precision of newly created Real values, in bits.
unsigned precision_bits();
void set_precision_bits(unsigned bits);

// Raises (never lowers) the working precision for the lifetime of the guard.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned bits);
  ~PrecisionGuard();
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_digits_;
};

// Accepts "p/q", "p", and finite decimals such as "0.3" or "-1.25".
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
std::string to_string(const BigInt& z);

// Reduces a turn into [0, 1).
Rational normalize_turn(const Rational& turn);
// Distance between two turns measured around the circle, in [0, 1/2].
Rational turn_distance(const Rational& a, const Rational& b);

BigInt floor_rational(const Rational& q);

Real to_real(const Rational& q, mpfr_rnd_t rnd = MPFR_RNDN);
Real pi_real();
Real two_pi_real();

// Scientific notation with a fixed number of significant digits; the same
// value always prints the same way, which keeps reports byte-stable.
std::string format_real(const Real& x, int digits = 20);
double to_double(const Real& x);

// Closed interval with endpoints rounded outward. Only the operations needed
// for certified comparisons are provided.
struct Interval {
  Real lo;
  Real hi;

  static Interval point(const Rational& q);
  static Interval point(const Real& x);
  static Interval hull(const Real& a, const Real& b);

  bool certainly_less(const Interval& other) const { return hi < other.lo; }
  bool certainly_greater(const Interval& other) const { return lo > other.hi; }
  bool contains(const Real& x) const { return lo <= x && x <= hi; }
  Real width() const;
  Real mid() const;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);

Interval exp(const Interval& x);
Interval expm1(const Interval& x);
Interval log(const Interval& x);
Interval log1p(const Interval& x);
Interval sqrt(const Interval& x);
// k-th root of a nonnegative interval.
Interval rootn(const Interval& x, unsigned long k);
// sin on a subinterval of [0, pi/2], where it is increasing.
Interval sin_increasing(const Interval& x);
Interval pi_interval();

// Floor of a real known only through an enclosure. Throws InvariantError when
// the enclosure straddles an integer; callers raise precision and retry.
BigInt certified_floor(const Interval& x);

// Number of bits needed to hold the integer part of e^x for x >= 0.
unsigned bits_for_exp(const Rational& x);

}  // namespace qn
