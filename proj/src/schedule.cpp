#include "qnormal/schedule.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace qn {

namespace {

constexpr std::uint64_t kMaxMaterializeDepth = 64;

std::vector<Rational> fibonacci_logs(std::size_t n) {
  std::vector<Rational> out;
  BigInt a = 1, b = 2;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(a);
    BigInt c = a + b;
    a = b;
    b = c;
  }
  return out;
}

std::string rational_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw DomainError(std::string("expected string field '") + key + "'");
  return j.at(key).get<std::string>();
}

std::size_t count_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned())
    throw DomainError(std::string("expected nonnegative integer field '") + key + "'");
  return j.at(key).get<std::size_t>();
}

// Number of radius blocks touched when rings up to m are used.
std::size_t blocks_for(std::size_t m) { return ring_position(m).first; }

// Sectors owning at least one ring among the first m.
std::size_t sectors_for(std::size_t m) {
  std::size_t t = 0;
  while ((t + 1) * (t + 2) / 2 <= m) ++t;
  return t;
}

void add_ring(ZeroSchedule& s, std::size_t m) {
  auto [n, t] = ring_position(m);
  const ScheduleSource& src = s.source_for_sector(t);
  Rational log_r = s.radii.log_radius(m);
  std::size_t count = std::min(n, src.points.size());
  for (std::size_t i = 0; i < count; ++i) s.zeros.push_back(ScheduledZero{log_r, src.points[i], m, t});
}

void require_product_condition(const RadiiSequence& radii) {
  RadiiValidation v = validate_radii(radii);
  if (v.first_product_violation)
    throw DomainError("radii violate a_{n+2} >= a_{n+1} a_n at n = " + std::to_string(*v.first_product_violation));
}

}  // namespace

RadiiSequence RadiiSequence::fibonacci(std::size_t n_max) {
  if (n_max < 3) throw DomainError("n_max must be at least 3");
  RadiiSequence r;
  r.log_radii_ = fibonacci_logs(n_max);
  r.generated_ = true;
  return r;
}

RadiiSequence RadiiSequence::from_log_radii(std::vector<Rational> log_radii) {
  for (std::size_t i = 0; i < log_radii.size(); ++i) {
    if (log_radii[i] <= 0) throw DomainError("log radii must be positive");
    if (i > 0 && log_radii[i] <= log_radii[i - 1]) throw DomainError("log radii must increase strictly");
  }
  RadiiSequence r;
  r.log_radii_ = std::move(log_radii);
  return r;
}

Rational RadiiSequence::log_radius(std::size_t n) const {
  if (n == 0) throw DomainError("radius indices start at 1");
  if (n <= log_radii_.size()) return log_radii_[n - 1];
  if (!generated_)
    throw DomainError("radius a_" + std::to_string(n) + " beyond the " + std::to_string(log_radii_.size()) +
                      " supplied values");
  return fibonacci_logs(n).back();
}

Rational RadiiSequence::log_radius_lower_bound(std::size_t n) const {
  if (n == 0) throw DomainError("radius indices start at 1");
  if (n <= log_radii_.size() || generated_) return log_radius(n);
  if (log_radii_.size() < 2) throw DomainError("at least two radii are needed to extend the sequence");
  Rational a = log_radii_[log_radii_.size() - 2], b = log_radii_.back();
  for (std::size_t i = log_radii_.size(); i < n; ++i) {
    Rational c = a + b;
    a = b;
    b = c;
  }
  return b;
}

Rational RadiiSequence::increment_lower_bound(std::size_t n) const {
  if (n == 0) throw DomainError("radius indices start at 1");
  // For m >= 2 the gap log a_{m+1} - log a_m is at least log a_{m-1}.
  if (n == 1) return std::min(log_radius_lower_bound(2) - log_radius_lower_bound(1), log_radius_lower_bound(1));
  return log_radius_lower_bound(n - 1);
}

RadiiSequence build_radii(std::size_t n_max) { return RadiiSequence::fibonacci(n_max); }

std::optional<bool> growth_condition(std::size_t n, const Rational& log_a) {
  if (n == 0) throw DomainError("radius indices start at 1");
  const unsigned long k = n + 1;
  Rational u = 1 - Rational(1, BigInt(1) << k);
  unsigned bits = std::max(precision_bits(), static_cast<unsigned>(2 * k + 64) + bits_for_exp(abs(log_a)));
  for (int attempt = 0; attempt < 4; ++attempt, bits *= 2) {
    PrecisionGuard guard(bits);
    Interval rhs = Interval::point(Rational(1)) / (Interval::point(Rational(1)) - rootn(Interval::point(u), k));
    Interval lhs = exp(Interval::point(log_a));
    if (lhs.lo >= rhs.hi) return true;
    if (lhs.certainly_less(rhs)) return false;
  }
  return std::nullopt;
}

RadiiValidation validate_radii(const RadiiSequence& radii) {
  RadiiValidation v;
  const auto& a = radii.log_radii();
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a[i] <= a[i - 1]) v.strictly_increasing = false;
    v.ratio_trail.push_back((a[i] - a[i - 1]) / Rational(i + 1));
  }
  for (std::size_t i = 0; i + 2 < a.size(); ++i) {
    if (a[i + 2] < a[i + 1] + a[i]) {
      v.first_product_violation = i + 1;
      break;
    }
  }
  std::optional<std::size_t> threshold;
  for (std::size_t n = a.size(); n >= 1; --n) {
    auto holds = growth_condition(n, a[n - 1]);
    if (!holds) v.growth_undecided.push_back(n);
    if (holds != true) break;
    threshold = n;
  }
  std::reverse(v.growth_undecided.begin(), v.growth_undecided.end());
  v.growth_threshold = threshold;
  return v;
}

std::string to_string(ScheduleVariant v) {
  switch (v) {
    case ScheduleVariant::finite_order: return "finite-order";
    case ScheduleVariant::infinite_order: return "infinite-order";
    case ScheduleVariant::limit_ordinal: return "limit-ordinal";
    case ScheduleVariant::custom: return "custom";
  }
  return "custom";
}

std::size_t ZeroSchedule::row_of(std::size_t l) const {
  if (l == 0) throw DomainError("zero indices start at 1");
  if (variant == ScheduleVariant::finite_order) {
    std::size_t n = 1;
    while (n * (n + 1) / 2 < l) ++n;
    return n;
  }
  if (l > zeros.size()) throw DomainError("zero index " + std::to_string(l) + " beyond the schedule");
  return zeros[l - 1].row;
}

const ScheduleSource& ZeroSchedule::source_for_sector(std::size_t t) const {
  for (const auto& s : sources)
    if (s.sector == t) return s;
  throw DomainError("no source set for sector " + std::to_string(t));
}

std::vector<Rational> schedule_points(const PointSet& set, std::size_t needed, MaterializeOptions& options,
                                      bool allow_fewer) {
  if (needed == 0) return {};
  if (set.empty()) throw DomainError("cannot take points from an empty set");
  if (options.per_level == 0) options.per_level = std::max<std::uint64_t>(3, needed);
  if (auto card = set.cardinality(); card && *card < needed) {
    if (!allow_fewer)
      throw DomainError("the set has only " + std::to_string(*card) + " points; " + std::to_string(needed) +
                        " are needed");
    // Finite sets are forests of leaves.
    if (options.depth == 0) options.depth = 1;
    return materialize(set, options.depth, options.per_level);
  }
  auto take = [&](std::vector<Rational> pts) {
    pts.resize(needed);
    return pts;
  };
  auto search = [&](std::uint64_t per) -> std::optional<std::uint64_t> {
    for (std::uint64_t d = 1; d <= kMaxMaterializeDepth; ++d)
      if (materialize(set, d, per).size() >= needed) return d;
    return std::nullopt;
  };
  if (options.depth != 0) {
    auto pts = materialize(set, options.depth, options.per_level);
    if (pts.size() >= needed) return take(std::move(pts));
    std::string hint;
    if (auto d = search(options.per_level)) {
      hint = "depth " + std::to_string(*d) + " is required";
    } else {
      std::uint64_t per = std::max<std::uint64_t>({3, needed, options.per_level});
      auto d2 = search(per);
      hint = d2 ? "per_level " + std::to_string(per) + " with depth " + std::to_string(*d2) + " is required"
                : "no depth up to " + std::to_string(kMaxMaterializeDepth) + " suffices";
    }
    throw DomainError("materialize(depth=" + std::to_string(options.depth) + ", per_level=" +
                      std::to_string(options.per_level) + ") yields " + std::to_string(pts.size()) + " of " +
                      std::to_string(needed) + " points; " + hint);
  }
  auto d = search(options.per_level);
  if (!d)
    throw DomainError("the set does not supply " + std::to_string(needed) + " points at per_level " +
                      std::to_string(options.per_level));
  options.depth = *d;
  return take(materialize(set, *d, options.per_level));
}

ZeroSchedule build_rows(const PointSet& e, const RadiiSequence& radii, std::size_t n_max,
                        MaterializeOptions options) {
  if (n_max == 0) throw DomainError("n_max must be positive");
  if (!radii.generated() && radii.n_max() < n_max)
    throw DomainError("only " + std::to_string(radii.n_max()) + " radii for " + std::to_string(n_max) + " rows");
  require_product_condition(radii);
  ZeroSchedule s;
  s.variant = ScheduleVariant::finite_order;
  s.radii = radii;
  s.n_max = n_max;
  // For a construction set every copy is a cluster tagged alpha - 1.
  std::optional<Ordinal> top;
  std::uint64_t copies = 0;
  for (const auto& t : e.trees()) {
    Ordinal tag = t.is_leaf() ? Ordinal() : t.rank_tag();
    if (!top || tag > *top) {
      top = tag;
      copies = 0;
    }
    if (tag == *top) ++copies;
  }
  if (top) {
    s.alpha = top->successor();
    s.nu = copies;
  }
  ScheduleSource src;
  src.set = e;
  src.points = schedule_points(e, n_max, options);
  src.materialized = options;
  for (std::size_t n = 1; n <= n_max; ++n) {
    Rational log_r = radii.log_radius(n);
    for (std::size_t i = 0; i < n; ++i) s.zeros.push_back(ScheduledZero{log_r, src.points[i], n, 0});
  }
  s.sources.push_back(std::move(src));
  return s;
}

ZeroSchedule build_finite_order_schedule(const Ordinal& alpha, std::uint64_t nu, std::size_t n_max, const Arc& host,
                                         MaterializeOptions options) {
  if (!alpha.is_successor()) throw DomainError("finite-order schedules need a successor ordinal");
  ZeroSchedule s = build_rows(build_rank_set(alpha, nu, host), RadiiSequence::fibonacci(std::max<std::size_t>(n_max, 3)),
                              n_max, options);
  s.alpha = alpha;
  s.nu = nu;
  s.sources.front().arc = host;
  return s;
}

Arc sector_arc(std::size_t t) {
  if (t == 0) throw DomainError("sector indices start at 1");
  Rational step(1, BigInt(1) << (t + 2));
  return Arc::make(Rational(1, 4) - step, Rational(1, BigInt(3) * (BigInt(1) << (t + 4))));
}

std::size_t ring_index(std::size_t block, std::size_t t) {
  if (t == 0 || t > block) throw DomainError("ring position needs 1 <= t <= n");
  return block * (block - 1) / 2 + t;
}

std::pair<std::size_t, std::size_t> ring_position(std::size_t m) {
  if (m == 0) throw DomainError("radius indices start at 1");
  std::size_t n = 1;
  while (n * (n + 1) / 2 < m) ++n;
  return {n, m - n * (n - 1) / 2};
}

namespace {

ZeroSchedule sector_layout(ScheduleVariant variant, const Ordinal& alpha, std::size_t n_max,
                           const std::vector<Ordinal>& sector_ordinals, bool copies_grow) {
  ZeroSchedule s;
  s.variant = variant;
  s.alpha = alpha;
  s.radii = RadiiSequence::fibonacci(std::max<std::size_t>(n_max, 3));
  s.n_max = n_max;
  const std::size_t blocks = blocks_for(n_max);
  for (std::size_t t = 1; t <= sector_ordinals.size(); ++t) {
    ScheduleSource src;
    src.sector = t;
    src.arc = sector_arc(t);
    src.set = build_rank_set(sector_ordinals[t - 1], copies_grow ? t : 1, *src.arc);
    // Ring (n, t) uses the first n points and the largest block is `blocks`.
    src.points = schedule_points(src.set, blocks, src.materialized, true);
    s.sources.push_back(std::move(src));
  }
  for (std::size_t m = 1; m <= n_max; ++m) add_ring(s, m);
  return s;
}

}  // namespace

ZeroSchedule build_sector_schedule(const Ordinal& alpha, std::size_t n_max) {
  if (alpha.is_limit()) throw DomainError("limit ordinal " + alpha.to_string() + ": use build_limit_schedule");
  if (alpha.is_zero()) throw DomainError("alpha must be at least 1");
  if (n_max == 0) throw DomainError("n_max must be positive");
  std::size_t sectors = sectors_for(n_max);
  return sector_layout(ScheduleVariant::infinite_order, alpha, n_max, std::vector<Ordinal>(sectors, alpha), true);
}

ZeroSchedule build_limit_schedule(const Ordinal& alpha, std::size_t n_max) {
  if (!alpha.is_limit()) throw DomainError(alpha.to_string() + " is not a limit ordinal");
  if (n_max == 0) throw DomainError("n_max must be positive");
  std::size_t sectors = sectors_for(n_max);
  std::vector<Ordinal> ords;
  for (const Ordinal& b : enumerate_below(alpha, sectors)) ords.push_back(b.successor());
  return sector_layout(ScheduleVariant::limit_ordinal, alpha, n_max, ords, false);
}

ZeroSchedule custom_schedule(std::vector<ScheduledZero> zeros) {
  ZeroSchedule s;
  s.variant = ScheduleVariant::custom;
  for (auto& z : zeros) {
    if (z.row == 0) throw DomainError("zero rows start at 1");
    z.turn = normalize_turn(z.turn);
    s.n_max = std::max(s.n_max, z.row);
  }
  std::stable_sort(zeros.begin(), zeros.end(),
                   [](const ScheduledZero& a, const ScheduledZero& b) { return a.row < b.row; });
  s.zeros = std::move(zeros);
  return s;
}

ConvergenceCheck convergence_exponent_check(const RadiiSequence& radii, const Rational& exponent, std::size_t n) {
  if (exponent <= 0) throw DomainError("the exponent must be positive");
  ConvergenceCheck c;
  c.exponent = exponent;
  c.n = n;
  c.partial_sum = Interval::point(Rational(0));
  for (std::size_t m = 1; m <= n; ++m)
    c.partial_sum =
        c.partial_sum + Interval::point(Rational(m)) * exp(Interval::point(Rational(-exponent * radii.log_radius(m))));
  // log a_m >= log a_{n+1} + (m - n - 1) d for m > n, so the tail is dominated
  // by sum_i (n + 1 + i) x q^i.
  Rational d = radii.increment_lower_bound(n + 1);
  Interval x = exp(Interval::point(Rational(-exponent * radii.log_radius_lower_bound(n + 1))));
  Interval q = exp(Interval::point(Rational(-exponent * d)));
  Interval one = Interval::point(Rational(1));
  Interval gap = one - q;
  Interval bound = x * (Interval::point(Rational(n + 1)) / gap + q / (gap * gap));
  c.tail_bound = bound.hi;
  return c;
}

ConvergenceCheck convergence_exponent_check(const ZeroSchedule& schedule, const Rational& exponent, std::size_t n) {
  if (!schedule.has_tail()) throw DomainError("a custom schedule is a finite product");
  return convergence_exponent_check(schedule.radii, exponent, n);
}

ScheduleCheck check_schedule(const ZeroSchedule& s) {
  ScheduleCheck out;
  auto fail = [&](std::string why) {
    out.ok = false;
    out.problems.push_back(std::move(why));
  };
  for (std::size_t l = 1; l < s.zeros.size(); ++l)
    if (s.zeros[l].row < s.zeros[l - 1].row || s.zeros[l].log_r < s.zeros[l - 1].log_r)
      fail("zero " + std::to_string(l + 1) + " is out of row order");
  if (s.variant == ScheduleVariant::custom) return out;

  std::map<std::size_t, std::vector<const ScheduledZero*>> rows;
  for (const auto& z : s.zeros) rows[z.row].push_back(&z);
  std::map<std::string, std::set<std::size_t>> sectors_on_radius;
  for (std::size_t m = 1; m <= s.n_max; ++m) {
    const auto& zs = rows[m];
    std::size_t t = 0, expected = m;
    if (s.variant != ScheduleVariant::finite_order) {
      auto pos = ring_position(m);
      t = pos.second;
      expected = std::min(pos.first, s.source_for_sector(t).points.size());
    }
    if (zs.size() != expected)
      fail("row " + std::to_string(m) + " has " + std::to_string(zs.size()) + " zeros, expected " +
           std::to_string(expected));
    const ScheduleSource& src = s.source_for_sector(t);
    for (std::size_t i = 0; i < zs.size(); ++i) {
      const ScheduledZero& z = *zs[i];
      if (z.log_r != s.radii.log_radius(m)) fail("row " + std::to_string(m) + " has a zero off its radius");
      if (z.sector != t) fail("row " + std::to_string(m) + " mixes sectors");
      if (i >= src.points.size() || z.turn != src.points[i])
        fail("row " + std::to_string(m) + " angle " + to_string(z.turn) + " is out of enumeration order");
      sectors_on_radius[to_string(z.log_r)].insert(z.sector);
    }
  }
  if (!s.zeros.empty() && s.zeros.back().row > s.n_max) fail("zeros beyond n_max");
  for (const auto& [r, ts] : sectors_on_radius)
    if (ts.size() != 1) fail("radius e^" + r + " carries zeros from several sectors");
  for (const auto& src : s.sources) {
    if (src.points.empty()) continue;
    auto mat = materialize(src.set, src.materialized.depth, src.materialized.per_level);
    std::vector<Rational> prefix(mat.begin(), mat.begin() + static_cast<std::ptrdiff_t>(
                                                               std::min(mat.size(), src.points.size())));
    if (prefix != src.points) fail("sector " + std::to_string(src.sector) + " points are not its materialized prefix");
    for (const auto& p : src.points)
      if (!contains_point(src.set, p)) fail("angle " + to_string(p) + " is not in its source set");
  }
  return out;
}

nlohmann::json to_json(const RadiiSequence& radii) {
  nlohmann::json logs = nlohmann::json::array();
  for (const auto& a : radii.log_radii()) logs.push_back(to_string(a));
  return {{"kind", radii.generated() ? "fibonacci" : "explicit"}, {"log_radii", logs}};
}

nlohmann::json to_json(const ScheduledZero& z) {
  return {{"log_r", to_string(z.log_r)}, {"turn", to_string(z.turn)}, {"row", z.row}, {"sector", z.sector}};
}

nlohmann::json to_json(const ZeroSchedule& s) {
  nlohmann::json j;
  j["variant"] = to_string(s.variant);
  j["alpha"] = s.alpha.to_string();
  j["nu"] = s.nu ? nlohmann::json(*s.nu) : nlohmann::json("infinite");
  j["n_max"] = s.n_max;
  j["radii"] = to_json(s.radii);
  j["sources"] = nlohmann::json::array();
  for (const auto& src : s.sources) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : src.points) pts.push_back(to_string(p));
    nlohmann::json e{{"sector", src.sector},
                     {"set", to_json(src.set)},
                     {"materialize", {{"depth", src.materialized.depth}, {"per_level", src.materialized.per_level}}},
                     {"points", pts}};
    if (src.arc) e["arc"] = to_json(*src.arc);
    j["sources"].push_back(std::move(e));
  }
  j["zeros"] = nlohmann::json::array();
  for (const auto& z : s.zeros) j["zeros"].push_back(to_json(z));
  return j;
}

ZeroSchedule schedule_from_json(const nlohmann::json& j) {
  try {
    ZeroSchedule s;
    std::string variant = j.at("variant").get<std::string>();
    if (variant == "finite-order")
      s.variant = ScheduleVariant::finite_order;
    else if (variant == "infinite-order")
      s.variant = ScheduleVariant::infinite_order;
    else if (variant == "limit-ordinal")
      s.variant = ScheduleVariant::limit_ordinal;
    else if (variant == "custom")
      s.variant = ScheduleVariant::custom;
    else
      throw DomainError("unknown schedule variant '" + variant + "'");
    s.alpha = Ordinal::parse(j.at("alpha").get<std::string>());
    if (j.contains("nu") && j.at("nu").is_number_unsigned()) s.nu = j.at("nu").get<std::uint64_t>();
    s.n_max = count_field(j, "n_max");

    const auto& r = j.at("radii");
    std::vector<Rational> logs;
    for (const auto& v : r.at("log_radii")) logs.push_back(parse_rational(v.get<std::string>()));
    std::string kind = r.at("kind").get<std::string>();
    if (kind == "fibonacci") {
      s.radii = RadiiSequence::fibonacci(logs.size());
      if (s.radii.log_radii() != logs) throw DomainError("fibonacci radii do not match the recurrence");
    } else if (kind == "explicit") {
      s.radii = RadiiSequence::from_log_radii(std::move(logs));
    } else {
      throw DomainError("unknown radii kind '" + kind + "'");
    }

    for (const auto& e : j.at("sources")) {
      ScheduleSource src;
      src.sector = count_field(e, "sector");
      if (e.contains("arc")) src.arc = arc_from_json(e.at("arc"));
      src.set = point_set_from_json(e.at("set"));
      src.materialized.depth = count_field(e.at("materialize"), "depth");
      src.materialized.per_level = count_field(e.at("materialize"), "per_level");
      for (const auto& p : e.at("points")) src.points.push_back(parse_rational(p.get<std::string>()));
      s.sources.push_back(std::move(src));
    }
    for (const auto& z : j.at("zeros")) {
      s.zeros.push_back(ScheduledZero{parse_rational(rational_field(z, "log_r")),
                                      parse_rational(rational_field(z, "turn")), count_field(z, "row"),
                                      count_field(z, "sector")});
      if (s.zeros.back().row == 0) throw DomainError("zero rows start at 1");
    }
    ScheduleCheck check = check_schedule(s);
    if (!check.ok) throw DomainError("inconsistent schedule: " + check.problems.front());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed schedule JSON: ") + e.what());
  }
}

}  // namespace qn
