#include "qnormal/ordinal.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <mutex>

#include "qnormal/numeric.hpp"

namespace qn {

Ordinal::Ordinal() = default;

Ordinal::Ordinal(std::uint64_t n) {
  if (n > 0) terms_.push_back(Term{Ordinal(), n});
}

Ordinal Ordinal::omega() { return omega_power(Ordinal(1)); }

Ordinal Ordinal::omega_power(const Ordinal& exponent, std::uint64_t coefficient) {
  Ordinal r;
  if (coefficient > 0) r.terms_.push_back(Term{exponent, coefficient});
  return r;
}

Ordinal Ordinal::normalize(std::vector<Term> terms) {
  Ordinal r;
  for (auto& t : terms) r = r + omega_power(t.exponent, t.coefficient);
  return r;
}

bool Ordinal::is_finite() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].exponent.is_zero());
}

std::optional<std::uint64_t> Ordinal::finite_value() const {
  if (terms_.empty()) return 0;
  if (is_finite()) return terms_[0].coefficient;
  return std::nullopt;
}

bool Ordinal::is_successor() const { return !terms_.empty() && terms_.back().exponent.is_zero(); }

bool Ordinal::is_limit() const { return !terms_.empty() && !terms_.back().exponent.is_zero(); }

Ordinal Ordinal::successor() const { return *this + Ordinal(1); }

std::optional<Ordinal> Ordinal::predecessor() const {
  if (is_zero()) throw DomainError("0 has no predecessor and is not a limit");
  if (is_limit()) return std::nullopt;
  Ordinal r = *this;
  if (--r.terms_.back().coefficient == 0) r.terms_.pop_back();
  return r;
}

const Ordinal& Ordinal::leading_exponent() const {
  if (is_zero()) throw DomainError("0 has no leading exponent");
  return terms_.front().exponent;
}

Ordinal Ordinal::fundamental(std::uint64_t n) const {
  if (!is_limit()) throw DomainError("fundamental sequence requested for non-limit " + to_string());
  if (n == 0) throw DomainError("fundamental sequence index starts at 1");
  Ordinal prefix = *this;
  const Term last = prefix.terms_.back();
  if (--prefix.terms_.back().coefficient == 0) prefix.terms_.pop_back();
  if (auto e = last.exponent.predecessor()) return prefix + omega_power(*e, n);
  return prefix + omega_power(last.exponent.fundamental(n));
}

Ordinal Ordinal::minus_left(const Ordinal& lower) const {
  if (lower > *this)
    throw DomainError("cannot subtract " + lower.to_string() + " from " + to_string());
  std::size_t i = 0;
  while (i < lower.terms_.size() && i < terms_.size() && lower.terms_[i].exponent == terms_[i].exponent &&
         lower.terms_[i].coefficient == terms_[i].coefficient)
    ++i;
  Ordinal r;
  if (i == lower.terms_.size()) {
    r.terms_.assign(terms_.begin() + static_cast<std::ptrdiff_t>(i), terms_.end());
    return r;
  }
  r.terms_.assign(terms_.begin() + static_cast<std::ptrdiff_t>(i), terms_.end());
  if (lower.terms_[i].exponent == terms_[i].exponent)
    r.terms_.front().coefficient -= lower.terms_[i].coefficient;
  return r;
}

Ordinal Ordinal::times(std::uint64_t k) const {
  if (k == 0 || is_zero()) return Ordinal();
  Ordinal r = *this;
  r.terms_.front().coefficient *= k;
  return r;
}

std::uint64_t Ordinal::norm() const {
  std::uint64_t n = 0;
  for (const auto& t : terms_) n += t.coefficient * (1 + t.exponent.norm());
  return n;
}

Ordinal operator+(const Ordinal& a, const Ordinal& b) {
  if (b.is_zero()) return a;
  const Ordinal& e = b.terms_.front().exponent;
  Ordinal r;
  for (const auto& t : a.terms_) {
    if (t.exponent > e) {
      r.terms_.push_back(t);
    } else {
      if (t.exponent == e) {
        r.terms_.push_back(Ordinal::Term{e, t.coefficient + b.terms_.front().coefficient});
        r.terms_.insert(r.terms_.end(), b.terms_.begin() + 1, b.terms_.end());
        return r;
      }
      break;
    }
  }
  r.terms_.insert(r.terms_.end(), b.terms_.begin(), b.terms_.end());
  return r;
}

std::strong_ordering operator<=>(const Ordinal& a, const Ordinal& b) {
  const std::size_t n = std::min(a.terms_.size(), b.terms_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = a.terms_[i].exponent <=> b.terms_[i].exponent; c != 0) return c;
    if (auto c = a.terms_[i].coefficient <=> b.terms_[i].coefficient; c != 0) return c;
  }
  return a.terms_.size() <=> b.terms_.size();
}

bool operator==(const Ordinal& a, const Ordinal& b) { return (a <=> b) == 0; }

Ordering compare(const Ordinal& a, const Ordinal& b) {
  auto c = a <=> b;
  if (c < 0) return Ordering::less;
  if (c > 0) return Ordering::greater;
  return Ordering::equal;
}

std::string Ordinal::to_string() const {
  if (is_zero()) return "0";
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += '+';
    if (t.exponent.is_zero()) {
      out += std::to_string(t.coefficient);
      continue;
    }
    out += 'w';
    if (t.exponent != Ordinal(1)) {
      std::string e = t.exponent.to_string();
      if (t.exponent.is_finite() || t.exponent == omega())
        out += '^' + e;
      else
        out += "^(" + e + ")";
    }
    if (t.coefficient > 1) out += '*' + std::to_string(t.coefficient);
  }
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Ordinal run() {
    Ordinal r = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw DomainError("bad ordinal '" + std::string(text_) + "': " + why + " at offset " +
                      std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char ch) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_omega() {
    skip_space();
    if (accept('w')) return true;
    if (text_.substr(pos_, 2) == "\xCF\x89") {
      pos_ += 2;
      return true;
    }
    return false;
  }

  std::uint64_t nat() {
    skip_space();
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
      fail("expected a natural number");
    std::uint64_t v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      std::uint64_t d = static_cast<std::uint64_t>(text_[pos_] - '0');
      if (v > (std::numeric_limits<std::uint64_t>::max() - d) / 10) fail("number too large");
      v = v * 10 + d;
      ++pos_;
    }
    return v;
  }

  Ordinal expr() {
    Ordinal r = term();
    while (accept('+')) r = r + term();
    return r;
  }

  Ordinal term() {
    Ordinal r = factor();
    while (accept('*')) r = r.times(nat());
    return r;
  }

  Ordinal factor() {
    Ordinal base = atom();
    if (!accept('^')) return base;
    if (base != Ordinal::omega()) fail("only w may be raised to a power");
    return Ordinal::omega_power(factor());
  }

  Ordinal atom() {
    if (accept('(')) {
      Ordinal r = expr();
      if (!accept(')')) fail("expected ')'");
      return r;
    }
    if (accept_omega()) return Ordinal::omega();
    return Ordinal(nat());
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Ordinals of norm exactly m that are strictly below `bound`, ascending.
class NormTable {
 public:
  const std::vector<Ordinal>& of_norm_below(std::uint64_t m, const Ordinal& bound) {
    return of_norm_below(m, table_for(bound));
  }

 private:
  struct BoundTable {
    Ordinal bound;
    BoundTable* exponents = nullptr;  // table for the successor of bound's leading exponent
    std::vector<std::vector<Ordinal>> by_norm;
    std::vector<bool> done;
  };

  BoundTable& table_for(const Ordinal& bound) {
    auto [it, inserted] = tables_.try_emplace(bound.to_string());
    if (inserted) it->second.bound = bound;
    return it->second;
  }

  const std::vector<Ordinal>& of_norm_below(std::uint64_t m, BoundTable& t) {
    if (t.by_norm.size() <= m) {
      t.by_norm.resize(m + 1);
      t.done.resize(m + 1, false);
    }
    if (t.done[m]) return t.by_norm[m];
    std::vector<Ordinal> out;
    if (!t.bound.is_zero()) {
      if (m == 0) {
        out.push_back(Ordinal());
      } else {
        if (!t.exponents) t.exponents = &table_for(t.bound.leading_exponent().successor());
        std::vector<Ordinal::Term> prefix;
        build(prefix, m, *t.exponents, nullptr, t.bound, out);
        std::sort(out.begin(), out.end());
      }
    }
    t.by_norm[m] = std::move(out);
    t.done[m] = true;
    return t.by_norm[m];
  }

  // Extends `prefix` with terms whose norms sum to `remaining`; exponents come
  // from `exps` and stay below `below` when it is set.
  void build(std::vector<Ordinal::Term>& prefix, std::uint64_t remaining, BoundTable& exps, const Ordinal* below,
             const Ordinal& bound, std::vector<Ordinal>& out) {
    if (remaining == 0) {
      Ordinal x = Ordinal::normalize(prefix);
      if (x < bound) out.push_back(x);
      return;
    }
    for (std::uint64_t m = 0; m < remaining; ++m) {
      const std::vector<Ordinal> candidates = of_norm_below(m, exps);
      for (const Ordinal& e : candidates) {
        if (below && !(e < *below)) continue;
        for (std::uint64_t c = 1; c * (1 + m) <= remaining; ++c) {
          prefix.push_back(Ordinal::Term{e, c});
          build(prefix, remaining - c * (1 + m), exps, &e, bound, out);
          prefix.pop_back();
        }
      }
    }
  }

  // std::map keeps references stable while new tables are added.
  std::map<std::string, BoundTable> tables_;
};

struct EnumerationCache {
  std::mutex mu;
  NormTable table;
  struct Progress {
    std::vector<Ordinal> items;
    std::uint64_t next_norm = 0;
  };
  std::map<std::string, Progress> progress;
};

EnumerationCache& enumeration_cache() {
  static EnumerationCache cache;
  return cache;
}

}  // namespace

Ordinal Ordinal::parse(std::string_view text) { return Parser(text).run(); }

std::vector<Ordinal> enumerate_below(const Ordinal& a, std::size_t count) {
  std::vector<Ordinal> out;
  if (auto n = a.finite_value()) {
    for (std::uint64_t i = 0; i < *n && out.size() < count; ++i) out.emplace_back(i);
    return out;
  }
  auto& cache = enumeration_cache();
  std::lock_guard<std::mutex> lock(cache.mu);
  auto& p = cache.progress[a.to_string()];
  while (p.items.size() < count) {
    const auto& level = cache.table.of_norm_below(p.next_norm++, a);
    p.items.insert(p.items.end(), level.begin(), level.end());
  }
  out.assign(p.items.begin(), p.items.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

}  // namespace qn
