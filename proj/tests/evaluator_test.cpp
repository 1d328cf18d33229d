#include "qnormal/evaluator.hpp"

#include <gtest/gtest.h>

#include <complex>
#include <random>

namespace qn {
namespace {

using cld = std::complex<long double>;
const long double kTwoPi = 6.283185307179586476925286766559L;

long double ld(const Real& x) { return static_cast<long double>(to_double(x)); }
long double ld(const Rational& q) { return ld(to_real(q)); }

cld as_complex(const ScheduledZero& z) { return std::polar(std::exp(ld(z.log_r)), kTwoPi * ld(z.turn)); }

// Direct product in long double; fine while |z| and |b| stay moderate.
cld naive_product(const ZeroSchedule& s, cld z, std::size_t rows) {
  cld p = 1;
  for (const auto& b : s.zeros)
    if (b.row <= rows) p *= cld(1) - z / as_complex(b);
  return p;
}

long double phase_diff(long double a, long double b) {
  long double d = std::fmod(a - b, kTwoPi);
  if (d > kTwoPi / 2) d -= kTwoPi;
  if (d < -kTwoPi / 2) d += kTwoPi;
  return d;
}

ZeroSchedule small_schedule() { return build_finite_order_schedule(Ordinal(3), 1, 12); }

TEST(Kernel, MatchesHighPrecisionDirectFormulaAcrossSeams) {
  std::vector<std::pair<double, double>> cases{{40.0, 0.3},  {40.5, 1.0},  {39.5, -2.0}, {-40.0, 0.7}, {-40.5, 3.0},
                                               {-39.5, 0.1}, {1e-30, 1e-30}, {-1e-25, 2e-25}, {0, 1e-40},  {3, -1},
                                               {120, 2},     {-200, 1}};
  for (auto [x, y] : cases) {
    LogPolar got = log_one_minus_exp(Real(x), Real(y));
    PrecisionGuard g(2000);
    Real X(x), Y(y);
    Real re = 1 - exp(X) * cos(Y), im = -exp(X) * sin(Y);
    Real mag = log(sqrt(re * re + im * im));
    Real ph = atan2(im, re);
    EXPECT_LT(abs(got.log_mag - mag), Real(1e-50) * (1 + abs(mag))) << x << " " << y;
    EXPECT_LT(abs(got.phase - ph), Real(1e-50)) << x << " " << y;
  }
  EXPECT_TRUE(log_one_minus_exp(Real(0), Real(0)).is_zero());
}

TEST(LogEval, OriginAndExactZero) {
  ZeroSchedule s = small_schedule();
  EvalResult r = log_eval(s, Point::origin(), 10);
  EXPECT_EQ(r.value.log_mag, 0);
  EXPECT_EQ(r.value.phase, 0);
  const auto& b1 = s.zeros.front();
  EXPECT_TRUE(log_eval(s, Point::from_exact(b1.log_r, b1.turn), 12).value.is_zero());
  // Same point described with turn + 1.
  EXPECT_TRUE(log_eval(s, Point::from_exact(b1.log_r, b1.turn + 1), 12).value.is_zero());
  EXPECT_FALSE(log_eval(s, Point::from_exact(b1.log_r, b1.turn, Rational(101, 100)), 12).value.is_zero());
  EXPECT_THROW(log_eval(s, Point::origin(), 13), DomainError);
}

TEST(LogEval, AgreesWithDirectProduct) {
  ZeroSchedule s = small_schedule();
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 40; ++i) {
    Rational log_r(static_cast<long>(u(rng) * 4000), 1000);
    Rational turn(static_cast<long>(u(rng) * 1000), 1000);
    EvalResult r = log_eval(s, Point::from_exact(log_r, turn), 5);
    cld p = naive_product(s, std::polar(std::exp(ld(log_r)), kTwoPi * ld(turn)), 5);
    EXPECT_NEAR(ld(r.value.log_mag), std::log(std::abs(p)), 1e-9L * (1 + std::abs(std::log(std::abs(p)))));
    EXPECT_NEAR(phase_diff(ld(r.value.phase), std::arg(p)), 0, 1e-9L);
  }
}

TEST(LogEval, RicherTruncationWithinTailBound) {
  ZeroSchedule s = small_schedule();
  Point z = Point::from_exact(Rational(5, 2), Rational(1, 10));
  EvalResult r8 = log_eval(s, z, 8), r12 = log_eval(s, z, 12);
  EXPECT_TRUE(r8.valid);
  EXPECT_TRUE(r12.valid);
  EXPECT_GT(r8.tail_log_bound, 0);
  EXPECT_LE(abs(r8.value.log_mag - r12.value.log_mag), r8.tail_log_bound);
  EXPECT_LE(r12.tail_log_bound, r8.tail_log_bound);
  for (std::size_t m = 4; m < 12; ++m) {
    Point w = Point::from_exact(s.radii.log_radius(m - 2), Rational(3, 10));
    EvalResult a = log_eval(s, w, m), b = log_eval(s, w, 12);
    EXPECT_TRUE(a.valid);
    EXPECT_LE(abs(a.value.log_mag - b.value.log_mag), a.tail_log_bound) << m;
  }
}

TEST(LogEval, TailHypothesisFlagsLargeArguments) {
  ZeroSchedule s = small_schedule();
  EXPECT_TRUE(log_eval(s, Point::from_exact(13, Rational(1, 2)), 8).valid);
  EXPECT_FALSE(log_eval(s, Point::from_exact(14, Rational(1, 2)), 8).valid);
  EXPECT_FALSE(log_eval(s, Point::from_exact(1, Rational(1, 2)), 2).valid);
}

TEST(LogEval, TailBoundMajorizesOmittedRows) {
  // Oracle: sum over omitted rows j <= 40 of j * q_j / (1 - q_j).
  ZeroSchedule s = small_schedule();
  for (int lr : {2, 5, 8}) {
    Real bound = tail_log_bound(s, Real(lr), 9);
    long double direct = 0;
    for (std::size_t j = 10; j <= 40; ++j) {
      long double q = std::exp(static_cast<long double>(lr) - ld(s.radii.log_radius(j)));
      direct += j * q / (1 - q);
    }
    EXPECT_GE(ld(bound), direct);
    EXPECT_LE(ld(bound), 2 * direct * (1 + 1e-12L));
  }
}

TEST(FamilyEval, IdentityAndZeroFidelity) {
  ZeroSchedule s = small_schedule();
  Point z = Point::from_exact(Rational(7, 3), Rational(2, 7));
  EvalResult a = log_eval(s, z, 10), b = family_eval(s, 1, z, 10);
  EXPECT_EQ(a.value.log_mag, b.value.log_mag);
  EXPECT_EQ(a.value.phase, b.value.phase);
  const BigInt j = 5962;
  const Rational c1 = s.sources.front().points[0];
  EXPECT_TRUE(family_eval(s, j, Point::from_exact(8, c1, Rational(1) / Rational(j)), 10).value.is_zero());
  EXPECT_FALSE(family_eval(s, j, Point::from_exact(8, c1, Rational(1) / Rational(j + 1)), 10).value.is_zero());
  // Agreement with evaluating at log j + log|z| directly.
  Point w = Point::from_polar(log(Real(j)) + Real(-2), Real(1));
  EvalResult c = family_eval(s, j, Point::from_polar(Real(-2), Real(1)), 10);
  EvalResult d = log_eval(s, w, 10);
  EXPECT_LT(abs(c.value.log_mag - d.value.log_mag), Real(1e-50));
}

TEST(LogEval, ConjugateSymmetry) {
  std::vector<ScheduledZero> zs;
  for (std::size_t row = 1; row <= 4; ++row)
    for (Rational t : {Rational(1, 9), Rational(-1, 9), Rational(2, 5), Rational(-2, 5)})
      zs.push_back(ScheduledZero{Rational(row), t, row, 0});
  ZeroSchedule s = custom_schedule(zs);
  for (Rational t : {Rational(1, 7), Rational(3, 11), Rational(9, 20)}) {
    EvalResult a = log_eval(s, Point::from_exact(Rational(3, 2), t), 4);
    EvalResult b = log_eval(s, Point::from_exact(Rational(3, 2), -t), 4);
    EXPECT_LT(abs(a.value.log_mag - b.value.log_mag), Real(1e-50));
    EXPECT_LT(abs(a.value.phase + b.value.phase), Real(1e-50));
    EXPECT_EQ(a.tail_log_bound, 0);
  }
}

TEST(LogDerivative, SingleZeroAndSymmetricPair) {
  ZeroSchedule one = custom_schedule({{Rational(1), Rational(1, 8), 1, 0}});
  Point z = Point::from_exact(Rational(1, 2), Rational(3, 5));
  LogPolar d = log_derivative(one, z, 1);
  cld b = std::polar(std::exp(1.0L), kTwoPi / 8);
  cld expect = cld(1) / (std::polar(std::exp(0.5L), kTwoPi * 0.6L) - b);
  EXPECT_NEAR(ld(d.log_mag), std::log(std::abs(expect)), 1e-15L);
  EXPECT_NEAR(phase_diff(ld(d.phase), std::arg(expect)), 0, 1e-15L);

  ZeroSchedule pair = custom_schedule({{Rational(2), Rational(1, 8), 1, 0}, {Rational(2), Rational(5, 8), 1, 0}});
  LogPolar at0 = log_derivative(pair, Point::origin(), 1);
  EXPECT_TRUE(at0.is_zero() || at0.log_mag < -100);
  EXPECT_THROW(log_derivative(one, Point::from_exact(1, Rational(1, 8)), 1), DomainError);
}

TEST(LogDerivative, AgreesWithDirectSumAndIsStable) {
  ZeroSchedule s = small_schedule();
  Point z = Point::from_exact(Rational(13, 5), Rational(7, 10));
  LogPolar d = log_derivative(s, z, 6);
  cld zz = std::polar(std::exp(2.6L), kTwoPi * 0.7L), sum = 0;
  for (const auto& b : s.zeros)
    if (b.row <= 6) sum += cld(1) / (zz - as_complex(b));
  EXPECT_NEAR(ld(d.log_mag), std::log(std::abs(sum)), 1e-12L);
  for (Rational lr : {Rational(1), Rational(4), Rational(8)}) {
    Point w = Point::from_exact(lr, Rational(1, 2));
    LogPolar a = log_derivative(s, w, 8), b = log_derivative(s, w, 12);
    EXPECT_LT(abs(exp(a.log_mag - b.log_mag) - 1), Real(1e-6));
  }
}

TEST(Spherical, AtSimpleZeroEqualsDerivativeModulus) {
  ZeroSchedule s = small_schedule();
  const ScheduledZero& bk = s.zeros[3];  // row 3
  Real got = spherical_derivative(s, 1, Point::from_exact(bk.log_r, bk.turn), 4);
  cld b = as_complex(bk), prod = cld(-1) / b;
  for (const auto& bl : s.zeros)
    if (bl.row <= 4 && &bl != &bk) prod *= cld(1) - b / as_complex(bl);
  EXPECT_NEAR(ld(got), std::abs(prod), 1e-12L * std::abs(prod));
  // Continuity: a nearby point gives nearly the same value.
  Real near = spherical_derivative(s, 1, Point::from_exact(bk.log_r, bk.turn, 1 + Rational(1, boost::multiprecision::pow(BigInt(10), 30))), 4);
  EXPECT_LT(abs(near / got - 1), Real(1e-20));
}

TEST(Spherical, DilationFactorAndEmptySchedule) {
  ZeroSchedule empty = custom_schedule({});
  EXPECT_EQ(spherical_derivative(empty, 7, Point::from_exact(1, 0), 0), 0);
  ZeroSchedule s = small_schedule();
  const ScheduledZero& b = s.zeros[0];
  Real j1 = spherical_derivative(s, 1, Point::from_exact(b.log_r, b.turn), 6);
  Real j3 = spherical_derivative(s, 3, Point::from_exact(b.log_r, b.turn, Rational(1, 3)), 6);
  EXPECT_LT(abs(j3 / j1 - 3), Real(1e-50));
}

TEST(Spherical, NearZeroDominance) {
  // Rows 1..3 are too close to the origin for |f| to be large anywhere on
  // their circles, so the comparison starts at row 4.
  ZeroSchedule s = small_schedule();
  const Rational c1 = s.sources.front().points[0];
  for (std::size_t n = 4; n <= 8; ++n) {
    Rational l = s.radii.log_radius(n);
    Real near = spherical_derivative(s, 1, Point::from_exact(l, c1, Rational(1001, 1000)), 12);
    Real off = spherical_derivative(s, 1, Point::from_exact(l, Rational(1, 2), Rational(1001, 1000)), 12);
    EXPECT_GT(near, off) << n;
  }
}

TEST(SectorBound, KZeroEnclosure) {
  Interval k = k0_interval();
  long double direct = 1;
  for (int j = 1; j < 64; ++j) direct *= 1 - std::ldexp(1.0L, -j);
  EXPECT_NEAR(ld(k.mid()), direct, 1e-18L);
  EXPECT_NEAR(ld(k.mid()), 0.288788095086602421L, 1e-18L);
  EXPECT_LT(k.width(), Real(1e-55));
}

TEST(SectorBound, RingThreePasses) {
  ZeroSchedule s = small_schedule();
  SectorBoundReport rep = sector_bound_check(s, Point::from_exact(4, Rational(1, 2)), Rational(3, 10));
  EXPECT_EQ(rep.n, 3u);
  EXPECT_TRUE(rep.pass);
  EXPECT_GT(rep.margin, 0);
  EXPECT_GT(rep.angular_gap, Real(3) / 10);
  // The right side by direct long double arithmetic.
  long double rhs = 3 * std::log(2.0L) + 12 * std::log(std::sin(0.15L)) + std::log(0.288788095086602421L);
  EXPECT_NEAR(ld(rep.rhs), rhs, 1e-15L);
}

TEST(SectorBound, DomainGuards) {
  ZeroSchedule s = small_schedule();
  EXPECT_THROW(sector_bound_check(s, Point::from_exact(1, Rational(1, 2)), Rational(3, 10)), DomainError);
  EXPECT_THROW(sector_bound_check(s, Point::from_exact(Rational(1, 2), Rational(1, 2)), Rational(3, 10)), DomainError);
  const Rational c1 = s.sources.front().points[0];
  try {
    sector_bound_check(s, Point::from_exact(4, c1), Rational(3, 10));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("zero ray"), std::string::npos);
  }
  // Beyond the certified region of the truncation.
  EXPECT_THROW(sector_bound_check(s, Point::from_exact(100, Rational(1, 2)), Rational(3, 10)), DomainError);
}

}  // namespace
}  // namespace qn
