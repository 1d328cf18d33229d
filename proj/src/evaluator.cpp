#include "qnormal/evaluator.hpp"

#include <algorithm>
#include <limits>

namespace qn {

namespace {

Real minus_infinity() { return -std::numeric_limits<Real>::infinity(); }

Real normalize_phase(const Real& phase) {
  Real two_pi = two_pi_real();
  Real p = phase - two_pi * round(phase / two_pi);
  Real pi = pi_real();
  if (p <= -pi) p += two_pi;
  if (p > pi) p -= two_pi;
  return p;
}

// log(1 + w) for small |w|.
LogPolar log1p_complex(const Real& wr, const Real& wi) {
  Real t = 2 * wr + wr * wr + wi * wi;
  return LogPolar{log1p(t) / 2, atan2(wi, 1 + wr)};
}

LogPolar from_cartesian(const Real& re, const Real& im) {
  if (re == 0 && im == 0) return LogPolar::zero();
  return LogPolar{log(hypot(re, im)), atan2(im, re)};
}

// Compensated running sum.
struct Neumaier {
  Real sum = 0;
  Real carry = 0;
  void add(const Real& x) {
    Real t = sum + x;
    if (abs(sum) >= abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  Real value() const { return sum + carry; }
};

bool same_zero(const ExactPoint& p, const ScheduledZero& z) {
  return p.factor == 1 && p.log_r == z.log_r && normalize_turn(p.turn) == normalize_turn(z.turn);
}

void require_rows(const ZeroSchedule& s, std::size_t rows_used) {
  if (rows_used > s.n_max)
    throw DomainError("rows_used " + std::to_string(rows_used) + " exceeds the schedule's " +
                      std::to_string(s.n_max) + " rows");
}

Real zero_phase(const ScheduledZero& z) { return normalize_phase(two_pi_real() * to_real(z.turn)); }

// log(1 - z/b) for z given in log-polar form.
LogPolar factor_log(const LogPolar& z, const ScheduledZero& b) {
  return log_one_minus_exp(z.log_mag - to_real(b.log_r), z.phase - two_pi_real() * to_real(b.turn));
}

}  // namespace

LogPolar LogPolar::zero() { return LogPolar{minus_infinity(), Real(0)}; }

LogPolar LogPolar::make(const Real& log_mag, const Real& phase) {
  if (isinf(log_mag) && log_mag < 0) return zero();
  return LogPolar{log_mag, normalize_phase(phase)};
}

bool LogPolar::is_zero() const { return isinf(log_mag) && log_mag < 0; }

Point Point::origin() { return Point{LogPolar::zero(), std::nullopt}; }

Point Point::from_exact(const Rational& log_r, const Rational& turn, const Rational& factor) {
  if (factor <= 0) throw DomainError("the modulus factor must be positive");
  Real mag = to_real(log_r) + log(to_real(factor));
  return Point{LogPolar::make(mag, two_pi_real() * to_real(normalize_turn(turn))),
               ExactPoint{log_r, normalize_turn(turn), factor}};
}

Point Point::from_polar(const Real& log_mag, const Real& phase) {
  return Point{LogPolar::make(log_mag, phase), std::nullopt};
}

Point Point::scaled(const BigInt& j) const {
  if (j <= 0) throw DomainError("dilation factors must be positive");
  if (polar.is_zero()) return *this;
  Point p{LogPolar{polar.log_mag + log(Real(j)), polar.phase}, exact};
  if (p.exact) p.exact->factor *= Rational(j);
  return p;
}

LogPolar log_one_minus_exp(const Real& x, const Real& y) {
  if (isinf(x) && x < 0) return LogPolar{Real(0), Real(0)};
  if (x > kKernelThreshold) {
    // 1 - e^s = -e^s (1 - e^-s).
    Real m = exp(-x);
    LogPolar l = log1p_complex(-m * cos(y), m * sin(y));
    return LogPolar::make(x + l.log_mag, y + pi_real() + l.phase);
  }
  if (x < -kKernelThreshold) {
    Real m = exp(x);
    LogPolar l = log1p_complex(-m * cos(y), -m * sin(y));
    return LogPolar::make(l.log_mag, l.phase);
  }
  // 1 - e^x cos y = -(expm1(x) cos y - 2 sin^2(y/2)) keeps s near 0 accurate.
  Real h = sin(y / 2);
  Real re = -(expm1(x) * cos(y) - 2 * h * h);
  Real im = -exp(x) * sin(y);
  return from_cartesian(re, im);
}

bool tail_hypothesis(const ZeroSchedule& schedule, const Real& log_abs_z, std::size_t rows_used) {
  if (!schedule.has_tail()) return true;
  if (rows_used < 3) return false;
  return log_abs_z <= to_real(schedule.radii.log_radius_lower_bound(rows_used - 2), MPFR_RNDD);
}

Real tail_log_bound(const ZeroSchedule& schedule, const Real& log_abs_z, std::size_t rows_used) {
  if (!schedule.has_tail()) return Real(0);
  if (isinf(log_abs_z) && log_abs_z < 0) return Real(0);
  const Interval l = Interval::point(log_abs_z);
  const Interval one = Interval::point(Rational(1));
  const Interval quarter = Interval::point(Rational(1, 4));
  Interval acc = Interval::point(Rational(0));
  for (std::size_t j = rows_used + 1;; ++j) {
    Interval q = exp(l - Interval::point(schedule.radii.log_radius_lower_bound(j)));
    if (!(q.hi < 1)) return std::numeric_limits<Real>::infinity();
    Interval t = Interval::point(Rational(j)) * q / (one - q);
    acc = acc + t;
    // Beyond j consecutive terms shrink by at least 2 e^{-d} <= 1/2, so the
    // rest is at most t.
    Interval ratio = exp(-Interval::point(schedule.radii.increment_lower_bound(j)));
    if (ratio.hi <= quarter.lo) {
      acc = acc + t;
      break;
    }
  }
  return acc.hi;
}

EvalResult log_eval(const ZeroSchedule& schedule, const Point& z, std::size_t rows_used) {
  require_rows(schedule, rows_used);
  EvalResult r;
  r.truncation_n = rows_used;
  if (z.polar.is_zero()) {
    r.value = LogPolar{Real(0), Real(0)};
    r.tail_log_bound = 0;
    return r;
  }
  r.valid = tail_hypothesis(schedule, z.polar.log_mag, rows_used);
  r.tail_log_bound = tail_log_bound(schedule, z.polar.log_mag, rows_used);
  if (z.exact) {
    for (const auto& b : schedule.zeros) {
      if (b.row > rows_used) break;
      if (same_zero(*z.exact, b)) {
        r.value = LogPolar::zero();
        return r;
      }
    }
  }
  Real mag = 0, phase = 0;
  for (const auto& b : schedule.zeros) {
    if (b.row > rows_used) break;
    LogPolar k = factor_log(z.polar, b);
    if (k.is_zero()) {
      r.value = LogPolar::zero();
      return r;
    }
    mag += k.log_mag;
    phase += k.phase;
  }
  r.value = LogPolar::make(mag, phase);
  return r;
}

EvalResult family_eval(const ZeroSchedule& schedule, const BigInt& j, const Point& z, std::size_t rows_used) {
  return log_eval(schedule, z.scaled(j), rows_used);
}

LogPolar log_derivative(const ZeroSchedule& schedule, const Point& z, std::size_t rows_used) {
  require_rows(schedule, rows_used);
  Neumaier re, im;
  for (const auto& b : schedule.zeros) {
    if (b.row > rows_used) break;
    if (z.exact && same_zero(*z.exact, b))
      throw DomainError("f'/f has a pole at the scheduled zero e^" + to_string(b.log_r) + " at turn " +
                        to_string(b.turn));
    // z - b = -b (1 - z/b).
    LogPolar k = factor_log(z.polar, b);
    if (k.is_zero()) throw DomainError("f'/f has a pole at a scheduled zero");
    Real log_mag = -(to_real(b.log_r) + k.log_mag);
    Real phase = -(zero_phase(b) + k.phase + pi_real());
    Real m = exp(log_mag);
    re.add(m * cos(phase));
    im.add(m * sin(phase));
  }
  return from_cartesian(re.value(), im.value());
}

Real spherical_derivative(const ZeroSchedule& schedule, const BigInt& j, const Point& z, std::size_t rows_used) {
  require_rows(schedule, rows_used);
  Point w = z.scaled(j);
  const Real log_j = log(Real(j));
  std::vector<const ScheduledZero*> hits;
  if (w.exact)
    for (const auto& b : schedule.zeros) {
      if (b.row > rows_used) break;
      if (same_zero(*w.exact, b)) hits.push_back(&b);
    }
  if (hits.size() > 1) return Real(0);
  if (hits.size() == 1) {
    // f'(b_k) = -(1/b_k) prod_{l != k} (1 - b_k/b_l).
    const ScheduledZero& bk = *hits.front();
    Real mag = -to_real(bk.log_r);
    for (const auto& b : schedule.zeros) {
      if (b.row > rows_used) break;
      if (&b == &bk) continue;
      mag += factor_log(w.polar, b).log_mag;
    }
    return exp(log_j + mag);
  }
  EvalResult f = log_eval(schedule, w, rows_used);
  LogPolar d = log_derivative(schedule, w, rows_used);
  if (d.is_zero()) return Real(0);
  Real two_l = 2 * f.value.log_mag;
  Real denom = two_l > 0 ? two_l + log1p(exp(-two_l)) : log1p(exp(two_l));
  return exp(log_j + f.value.log_mag + d.log_mag - denom);
}

Interval k0_interval() {
  constexpr unsigned kTerms = 300;
  Interval p = Interval::point(Rational(1));
  for (unsigned j = 1; j <= kTerms; ++j) p = p * Interval::point(1 - Rational(1, BigInt(1) << j));
  // prod_{j > J} (1 - 2^-j) >= 1 - 2^-J.
  Interval low = p * Interval::point(1 - Rational(1, BigInt(1) << kTerms));
  return Interval{low.lo, p.hi};
}

Interval sector_bound_rhs(std::size_t n, const Rational& alpha0) {
  if (alpha0 <= 0 || alpha0 >= 3) throw DomainError("alpha0 must lie in (0, 3) radians");
  Interval half = Interval::point(Rational(alpha0 / 2));
  return Interval::point(Rational(n * (n - 1) / 2)) * log(Interval::point(Rational(2))) +
         Interval::point(Rational(3 * (n + 1))) * log(sin_increasing(half)) + log(k0_interval());
}

Rational zero_ray_gap(const ZeroSchedule& schedule, const Rational& turn) {
  Rational t = normalize_turn(turn);
  std::optional<Rational> best;
  auto consider = [&](const Rational& g) {
    if (!best || g < *best) best = g;
  };
  if (schedule.variant == ScheduleVariant::custom) {
    for (const auto& z : schedule.zeros) consider(turn_distance(t, z.turn));
  } else {
    for (const auto& src : schedule.sources) consider(closure_gap(src.set, t));
    if (schedule.variant != ScheduleVariant::finite_order) {
      // Sectors not built yet live between the next sector arc and 1/4.
      std::size_t next = schedule.sources.size() + 1;
      Arc a = sector_arc(next);
      Rational lo = a.center - a.half_width, hi(1, 4);
      if (t >= lo && t <= hi)
        consider(Rational(0));
      else
        consider(std::min(turn_distance(t, lo), turn_distance(t, hi)));
    }
  }
  if (!best) throw DomainError("the schedule has no zeros");
  return *best;
}

SectorBoundReport sector_bound_check(const ZeroSchedule& schedule, const Point& z, const Rational& alpha0) {
  if (!z.exact) throw DomainError("sector checks need an exactly specified point");
  if (alpha0 <= 0 || alpha0 >= 3) throw DomainError("alpha0 must lie in (0, 3) radians");
  SectorBoundReport rep;
  const Rational gap = zero_ray_gap(schedule, z.exact->turn);
  Interval gap_rad = Interval::point(gap) * Interval::point(Rational(2)) * pi_interval();
  rep.angular_gap = gap_rad.lo;
  if (!(gap_rad.lo >= to_real(alpha0, MPFR_RNDU)))
    throw DomainError("the ray at turn " + to_string(z.exact->turn) + " is within " + to_string(alpha0) +
                      " radians of a zero ray (gap " + to_string(gap) + " turns)");
  const Real& l = z.polar.log_mag;
  if (!(l > to_real(schedule.radii.log_radius(1), MPFR_RNDU)))
    throw DomainError("|z| must exceed a_1");
  std::size_t n = 1;
  while (l > to_real(schedule.radii.log_radius_lower_bound(n + 1), MPFR_RNDD)) ++n;
  rep.n = n;
  EvalResult f = log_eval(schedule, z, schedule.n_max);
  if (!f.valid)
    throw DomainError("truncation too short: |z| must be at most a_" + std::to_string(schedule.n_max - 2));
  // Rounding in the accumulated sum stays far below this allowance.
  Real slack = Real(schedule.zeros.size() + 1) * (1 + abs(l) + to_real(schedule.radii.log_radius(schedule.n_max))) *
               pow(Real(2), -static_cast<int>(precision_bits()) + 16);
  rep.lhs = f.value.log_mag - f.tail_log_bound - slack;
  rep.rhs = sector_bound_rhs(n, alpha0).hi;
  rep.margin = rep.lhs - rep.rhs;
  rep.pass = rep.lhs >= rep.rhs;
  return rep;
}

}  // namespace qn
