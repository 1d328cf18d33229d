#include "qnormal/ordinal.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "qnormal/numeric.hpp"

namespace qn {
namespace {

Ordinal O(const char* s) { return Ordinal::parse(s); }

// Ordinals below w^w as coefficient maps degree -> coefficient. Used as an
// independent model for comparison and addition.
using Poly = std::map<std::uint64_t, std::uint64_t, std::greater<>>;

Poly to_poly(const Ordinal& a) {
  Poly p;
  for (const auto& t : a.terms()) p[*t.exponent.finite_value()] = t.coefficient;
  return p;
}

int poly_compare(const Poly& a, const Poly& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first > ib->first ? 1 : -1;
    if (ia->second != ib->second) return ia->second > ib->second ? 1 : -1;
  }
  if (ia == a.end() && ib == b.end()) return 0;
  return ia == a.end() ? -1 : 1;
}

Poly poly_add(const Poly& a, const Poly& b) {
  if (b.empty()) return a;
  std::uint64_t lead = b.begin()->first;
  Poly out;
  for (const auto& [e, c] : a)
    if (e >= lead) out[e] = c;
  for (const auto& [e, c] : b) out[e] += c;
  return out;
}

Ordinal random_small(std::mt19937_64& rng) {
  std::vector<Ordinal::Term> terms;
  int n = static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i)
    terms.push_back(Ordinal::Term{Ordinal(rng() % 4), 1 + rng() % 3});
  return Ordinal::normalize(terms);
}

Ordinal random_deep(std::mt19937_64& rng, int depth) {
  std::vector<Ordinal::Term> terms;
  int n = static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) {
    Ordinal e = depth > 0 && rng() % 2 ? random_deep(rng, depth - 1) : Ordinal(rng() % 3);
    terms.push_back(Ordinal::Term{e, 1 + rng() % 3});
  }
  return Ordinal::normalize(terms);
}

TEST(OrdinalCompare, ListedCases) {
  EXPECT_EQ(compare(Ordinal(3), Ordinal::omega()), Ordering::less);
  EXPECT_EQ(compare(O("w*2+1"), O("w*2+1")), Ordering::equal);
  EXPECT_EQ(compare(O("w^2"), O("w*5+9")), Ordering::greater);
}

TEST(OrdinalCompare, AgreesWithPolynomialModel) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    Ordinal a = random_small(rng), b = random_small(rng);
    int expect = poly_compare(to_poly(a), to_poly(b));
    Ordering got = compare(a, b);
    EXPECT_EQ(got == Ordering::less ? -1 : got == Ordering::greater ? 1 : 0, expect)
        << a.to_string() << " vs " << b.to_string();
  }
}

TEST(OrdinalCompare, TotalOrderOnRandomTriples) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    Ordinal a = random_deep(rng, 2), b = random_deep(rng, 2), c = random_deep(rng, 2);
    int relations = (a < b) + (a == b) + (a > b);
    EXPECT_EQ(relations, 1);
    if (a < b && b < c) EXPECT_TRUE(a < c);
    if (a <= b && b <= a) EXPECT_EQ(a, b);
  }
}

TEST(OrdinalArithmetic, AdditionAgreesWithPolynomialModel) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    Ordinal a = random_small(rng), b = random_small(rng);
    EXPECT_EQ(poly_compare(to_poly(a + b), poly_add(to_poly(a), to_poly(b))), 0)
        << a.to_string() << " + " << b.to_string();
  }
}

TEST(OrdinalArithmetic, AbsorptionAndTimes) {
  EXPECT_EQ(Ordinal(1) + Ordinal::omega(), Ordinal::omega());
  EXPECT_EQ(Ordinal::omega() + Ordinal(1), O("w+1"));
  EXPECT_EQ(O("w+3") + O("w^2"), O("w^2"));
  EXPECT_EQ(O("w^2+w") + O("w*2+1"), O("w^2+w*3+1"));
  EXPECT_EQ(O("(w+1)*3"), O("w*3+1"));
  EXPECT_EQ(O("w^2+5").times(0), Ordinal());
}

TEST(OrdinalArithmetic, LeftSubtractionInvertsAddition) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    Ordinal a = random_deep(rng, 2), b = random_deep(rng, 2);
    Ordinal lo = std::min(a, b), hi = std::max(a, b);
    EXPECT_EQ(lo + hi.minus_left(lo), hi) << lo.to_string() << " " << hi.to_string();
  }
  EXPECT_EQ(O("w").minus_left(Ordinal(1)), O("w"));
  EXPECT_EQ(O("w^2+w*2+3").minus_left(O("w^2+w")), O("w+3"));
  EXPECT_THROW(Ordinal(2).minus_left(Ordinal(3)), DomainError);
}

TEST(OrdinalPredecessor, ListedCases) {
  EXPECT_EQ(Ordinal(5).predecessor(), Ordinal(4));
  EXPECT_EQ(Ordinal::omega().predecessor(), std::nullopt);
  EXPECT_EQ(O("w^2+3").predecessor(), O("w^2+2"));
  EXPECT_THROW(Ordinal().predecessor(), DomainError);
}

TEST(OrdinalPredecessor, NothingStrictlyBetween) {
  for (const char* s : {"7", "w+1", "w*2+4", "w^2+1", "w^w+w+2"}) {
    Ordinal a = O(s);
    Ordinal p = *a.predecessor();
    EXPECT_LT(p, a);
    for (const Ordinal& x : enumerate_below(a, 300)) EXPECT_FALSE(p < x && x < a) << x.to_string();
  }
}

TEST(OrdinalFundamental, ListedCases) {
  for (std::uint64_t n = 1; n < 10; ++n) EXPECT_EQ(Ordinal::omega().fundamental(n), Ordinal(n));
  EXPECT_EQ(O("w^2").fundamental(3), O("w*3"));
  EXPECT_EQ(O("w^w").fundamental(2), O("w^2"));
  EXPECT_EQ(O("w^2+w").fundamental(4), O("w^2+4"));
  EXPECT_EQ(O("w^(w+1)").fundamental(2), O("w^w*2"));
  EXPECT_THROW(Ordinal(4).fundamental(1), DomainError);
  EXPECT_THROW(Ordinal().fundamental(1), DomainError);
  EXPECT_THROW(Ordinal::omega().fundamental(0), DomainError);
}

TEST(OrdinalFundamental, StrictlyIncreasingBelowTarget) {
  std::mt19937_64 rng(13);
  int tested = 0;
  while (tested < 200) {
    Ordinal a = random_deep(rng, 2);
    if (!a.is_limit()) continue;
    ++tested;
    for (std::uint64_t n = 1; n < 8; ++n) {
      EXPECT_LT(a.fundamental(n), a.fundamental(n + 1)) << a.to_string();
      EXPECT_LT(a.fundamental(n + 1), a) << a.to_string();
    }
  }
}

TEST(OrdinalEnumerate, FiniteAndOmega) {
  EXPECT_EQ(enumerate_below(Ordinal::omega(), 4), (std::vector<Ordinal>{0, 1, 2, 3}));
  EXPECT_EQ(enumerate_below(Ordinal(5), 5), (std::vector<Ordinal>{0, 1, 2, 3, 4}));
  EXPECT_EQ(enumerate_below(Ordinal(3), 10).size(), 3u);
}

TEST(OrdinalEnumerate, OmegaTimesTwoPrefixIsDovetailed) {
  Ordinal a = O("w*2");
  auto xs = enumerate_below(a, 6);
  ASSERT_EQ(xs.size(), 6u);
  std::set<std::string> seen;
  for (const auto& x : xs) {
    EXPECT_LT(x, a);
    EXPECT_TRUE(seen.insert(x.to_string()).second);
  }
  EXPECT_EQ(xs, (std::vector<Ordinal>{0, 1, 2, O("w"), 3, O("w+1")}));
}

TEST(OrdinalEnumerate, DistinctBelowAndEventuallyComplete) {
  for (const char* s : {"w^2", "w^2+w", "w^w", "w^(w+1)+3"}) {
    Ordinal a = O(s);
    auto xs = enumerate_below(a, 400);
    std::set<std::string> seen;
    for (const auto& x : xs) {
      EXPECT_LT(x, a) << s;
      EXPECT_TRUE(seen.insert(x.to_string()).second) << s;
    }
    // Every ordinal of norm <= 5 below a shows up.
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
      Ordinal x = random_deep(rng, 2);
      if (x < a && x.norm() <= 5) EXPECT_TRUE(seen.count(x.to_string())) << x.to_string() << " in " << s;
    }
  }
}

TEST(OrdinalEnumerate, PrefixStableAcrossCalls) {
  auto a = enumerate_below(O("w^2"), 40);
  auto b = enumerate_below(O("w^2"), 15);
  EXPECT_TRUE(std::equal(b.begin(), b.end(), a.begin()));
}

TEST(OrdinalSyntax, PrinterForms) {
  EXPECT_EQ(Ordinal().to_string(), "0");
  EXPECT_EQ(Ordinal(5).to_string(), "5");
  EXPECT_EQ(O("w + 3").to_string(), "w+3");
  EXPECT_EQ(O("w*2").to_string(), "w*2");
  EXPECT_EQ(O("w^2*3+w+5").to_string(), "w^2*3+w+5");
  EXPECT_EQ(O("w^w").to_string(), "w^w");
  EXPECT_EQ(O("w^(w+1)").to_string(), "w^(w+1)");
  EXPECT_EQ(O("w^w^w").to_string(), "w^(w^w)");
  EXPECT_EQ(O("3+w").to_string(), "w");
}

TEST(OrdinalSyntax, RoundTripOnRandomValues) {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 1000; ++i) {
    Ordinal a = random_deep(rng, 3);
    std::string s = a.to_string();
    EXPECT_EQ(Ordinal::parse(s), a);
    EXPECT_EQ(Ordinal::parse(s).to_string(), s);
  }
}

TEST(OrdinalSyntax, RejectsMalformed) {
  for (const char* s : {"", "w^", "2^3", "w*w", "(w+1", "w+)", "x", "w--1", "99999999999999999999999"})
    EXPECT_THROW(Ordinal::parse(s), DomainError) << s;
}

TEST(OrdinalNormalize, Idempotent) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 500; ++i) {
    Ordinal a = random_deep(rng, 2);
    EXPECT_EQ(Ordinal::normalize(a.terms()), a);
  }
  EXPECT_EQ(Ordinal::normalize({{Ordinal(0), 2}, {Ordinal(1), 1}, {Ordinal(1), 2}}), O("w*3"));
}

}  // namespace
}  // namespace qn
