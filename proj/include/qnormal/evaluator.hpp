// Log-domain evaluation of f(z) = prod (1 - z/b_l) over a zero schedule.
#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "qnormal/numeric.hpp"
#include "qnormal/schedule.hpp"

namespace qn {

// A complex number as (log of modulus, argument). log_mag is -inf exactly
// for 0; phase lies in (-pi, pi].
struct LogPolar {
  Real log_mag;
  Real phase;

  static LogPolar zero();
  static LogPolar make(const Real& log_mag, const Real& phase);
  bool is_zero() const;
};

// z = factor * e^{log_r} * e^{2 pi i turn}. Kept alongside the numeric value
// so that hitting a scheduled zero is decided exactly: factor * e^{log_r}
// equals e^{q} only when factor is 1 and q = log_r.
struct ExactPoint {
  Rational log_r;
  Rational turn;
  Rational factor = 1;
};

struct Point {
  LogPolar polar;
  std::optional<ExactPoint> exact;

  static Point origin();
  static Point from_exact(const Rational& log_r, const Rational& turn, const Rational& factor = 1);
  static Point from_polar(const Real& log_mag, const Real& phase);
  // j * z.
  Point scaled(const BigInt& j) const;
};

struct EvalResult {
  LogPolar value;
  std::size_t truncation_n = 0;
  // Certified bound on |log f - log f_N| from the omitted rows.
  Real tail_log_bound;
  bool valid = true;
};

// log|1 - e^s| and arg(1 - e^s) for s = x + iy; stable for large |x| and
// for s near 0.
LogPolar log_one_minus_exp(const Real& x, const Real& y);
inline constexpr int kKernelThreshold = 40;

// Zeros with row <= rows_used are multiplied out.
EvalResult log_eval(const ZeroSchedule& schedule, const Point& z, std::size_t rows_used);
EvalResult family_eval(const ZeroSchedule& schedule, const BigInt& j, const Point& z, std::size_t rows_used);

// Whether the tail bound hypothesis log|z| <= log a_{rows_used - 2} holds.
bool tail_hypothesis(const ZeroSchedule& schedule, const Real& log_abs_z, std::size_t rows_used);
Real tail_log_bound(const ZeroSchedule& schedule, const Real& log_abs_z, std::size_t rows_used);

// f'/f = sum 1/(z - b_l) over the truncation. No tail control.
LogPolar log_derivative(const ZeroSchedule& schedule, const Point& z, std::size_t rows_used);

// Spherical derivative of z -> f(jz): j |f'(jz)| / (1 + |f(jz)|^2).
Real spherical_derivative(const ZeroSchedule& schedule, const BigInt& j, const Point& z, std::size_t rows_used);

// Enclosure of prod_{j >= 1} (1 - 2^-j).
Interval k0_interval();

struct SectorBoundReport {
  std::size_t n = 0;
  // Certified lower bound on log|f(z)|: evaluated truncation minus its tail.
  Real lhs;
  // Upper end of the enclosure of the right side.
  Real rhs;
  Real margin;
  // Angular distance, in radians, from z's ray to the nearest zero ray.
  Real angular_gap;
  bool pass = false;
};

// Checks log|f(z)| >= (n(n-1)/2) log 2 + 3(n+1) log sin(alpha0/2) + log k0
// for a_1 < |z| <= a_{n+1}. alpha0 is in radians.
SectorBoundReport sector_bound_check(const ZeroSchedule& schedule, const Point& z, const Rational& alpha0);
Interval sector_bound_rhs(std::size_t n, const Rational& alpha0);

// Angular distance in turns from `turn` to the closure of the schedule's
// zero directions.
Rational zero_ray_gap(const ZeroSchedule& schedule, const Rational& turn);

}  // namespace qn
