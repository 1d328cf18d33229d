// Ordinals below epsilon_0 in Cantor normal form.
//
// Textual syntax (parser and printer round-trip exactly):
//   expr   := term ('+' term)*
//   term   := factor ('*' nat)*
//   factor := atom ('^' factor)?        base of '^' must be w
//   atom   := nat | 'w' | '(' expr ')'
// The printer emits e.g. "0", "5", "w", "w+3", "w*2", "w^2*3+w+5", "w^w",
// "w^(w+1)". An exponent is parenthesized unless it is a natural number or w.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qn {

class Ordinal {
 public:
  struct Term;

  Ordinal();
  Ordinal(std::uint64_t n);  // NOLINT: finite ordinals convert implicitly

  static Ordinal omega();
  // w^exponent * coefficient; coefficient 0 gives 0.
  static Ordinal omega_power(const Ordinal& exponent, std::uint64_t coefficient = 1);
  // Builds from arbitrary terms, merging and absorbing until the exponents
  // are strictly decreasing.
  static Ordinal normalize(std::vector<Term> terms);
  static Ordinal parse(std::string_view text);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_finite() const;
  std::optional<std::uint64_t> finite_value() const;
  bool is_successor() const;
  bool is_limit() const;

  Ordinal successor() const;
  // none for limits; throws DomainError for 0.
  std::optional<Ordinal> predecessor() const;
  // Wainer assignment; throws DomainError unless *this is a limit and n >= 1.
  Ordinal fundamental(std::uint64_t n) const;
  // The unique d with lower + d == *this; requires lower <= *this.
  Ordinal minus_left(const Ordinal& lower) const;
  Ordinal times(std::uint64_t k) const;
  const Ordinal& leading_exponent() const;

  // N(0) = 0, N(sum w^e_i c_i) = sum c_i (1 + N(e_i)). Finitely many
  // ordinals share each norm, which drives enumerate_below.
  std::uint64_t norm() const;

  std::string to_string() const;

  friend Ordinal operator+(const Ordinal& a, const Ordinal& b);
  friend std::strong_ordering operator<=>(const Ordinal& a, const Ordinal& b);
  friend bool operator==(const Ordinal& a, const Ordinal& b);

 private:
  std::vector<Term> terms_;
};

struct Ordinal::Term {
  Ordinal exponent;
  std::uint64_t coefficient = 1;
};

enum class Ordering { less, equal, greater };

Ordering compare(const Ordinal& a, const Ordinal& b);

// First `count` elements of a fixed injective enumeration of {b : b < a}.
// Finite a lists 0..a-1. Otherwise ordinals are emitted by increasing norm
// and, within one norm, in increasing order; every b < a appears at the
// index determined by its norm.
std::vector<Ordinal> enumerate_below(const Ordinal& a, std::size_t count);

}  // namespace qn
