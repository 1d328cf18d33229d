#include "qnormal/probe.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

namespace qn {

namespace {

constexpr int kPrecisionRetries = 6;

// Runs `f` at a precision sized for numbers up to e^magnitude, doubling it
// while an enclosure is too wide to decide a floor.
template <class F>
auto with_precision_for(const Rational& magnitude, unsigned extra, F f) {
  unsigned bits = std::max(precision_bits(), bits_for_exp(abs(magnitude)) + extra);
  for (int attempt = 0;; ++attempt, bits *= 2) {
    PrecisionGuard guard(bits);
    try {
      return f();
    } catch (const InvariantError&) {
      if (attempt + 1 >= kPrecisionRetries) throw;
    }
  }
}

BigInt floor_exp_over(const Rational& log_value, const Rational& scale, const Rational& divisor) {
  return with_precision_for(log_value, 64, [&] {
    Interval x = Interval::point(scale) * exp(Interval::point(log_value)) / Interval::point(divisor);
    return certified_floor(x);
  });
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_params(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw DomainError("rule parameter '" + item + "' needs the form key=value");
    std::string key = trim(item.substr(0, eq));
    if (!out.emplace(key, trim(item.substr(eq + 1))).second)
      throw DomainError("rule parameter '" + key + "' given twice");
  }
  return out;
}

std::size_t parse_index(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw DomainError(std::string("bad ") + what + " '" + s + "'");
  }
}

void check_r(const Rational& r, bool allow_one) {
  if (r <= 0 || r > 1 || (r == 1 && !allow_one)) throw DomainError("r must satisfy 0 < r < 1, got " + to_string(r));
}

// Where a target angle sits among the schedule's enumerated zero angles.
struct TargetLocation {
  bool found = false;
  std::size_t sector = 0;
  std::size_t index = 0;  // 0-based position in the source enumeration
};

TargetLocation locate_target(const ZeroSchedule& s, const DilationRule& rule, const Rational& target) {
  TargetLocation loc;
  Rational t = normalize_turn(target);
  if (s.variant == ScheduleVariant::custom) {
    for (const auto& z : s.zeros)
      if (z.turn == t) loc.found = true;
    return loc;
  }
  for (const auto& src : s.sources) {
    if (rule.kind == RuleKind::sector && src.sector != rule.t) continue;
    auto it = std::find(src.points.begin(), src.points.end(), t);
    if (it != src.points.end()) {
      loc.found = true;
      loc.sector = src.sector;
      loc.index = static_cast<std::size_t>(it - src.points.begin());
      return loc;
    }
  }
  return loc;
}

bool row_has_target(const ZeroSchedule& s, const TargetLocation& loc, const Rational& target, std::size_t n) {
  switch (s.variant) {
    case ScheduleVariant::finite_order: return n >= loc.index + 1;
    case ScheduleVariant::infinite_order:
    case ScheduleVariant::limit_ordinal: {
      auto [block, t] = ring_position(n);
      return t == loc.sector && block >= loc.index + 1;
    }
    case ScheduleVariant::custom:
      for (const auto& z : s.zeros)
        if (z.row == n && z.turn == normalize_turn(target)) return true;
      return false;
  }
  return false;
}

const ScheduleSource& claimed_source(const ZeroSchedule& s, const DilationRule& rule) {
  if (rule.kind == RuleKind::sector) {
    if (s.variant != ScheduleVariant::infinite_order && s.variant != ScheduleVariant::limit_ordinal)
      throw DomainError("the sector rule needs a sector schedule");
    return s.source_for_sector(rule.t);
  }
  if (s.variant != ScheduleVariant::finite_order)
    throw DomainError("rule " + rule.to_string() + " does not apply to a " + to_string(s.variant) + " schedule");
  return s.sources.front();
}

Ordinal source_ordinal(const ZeroSchedule& s, const ScheduleSource& src) {
  if (s.variant == ScheduleVariant::limit_ordinal) return enumerate_below(s.alpha, src.sector).back().successor();
  return s.alpha;
}

}  // namespace

DilationRule DilationRule::ratio_plus(const Rational& r) {
  check_r(r, false);
  DilationRule d;
  d.kind = RuleKind::ratio_plus;
  d.r = r;
  return d;
}

DilationRule DilationRule::geometric_mean(const Rational& L, const Rational& r) {
  if (L <= 0) throw DomainError("L must be positive");
  check_r(r, false);
  DilationRule d;
  d.kind = RuleKind::geometric_mean;
  d.L = L;
  d.r = r;
  return d;
}

DilationRule DilationRule::sector(std::size_t t, const Rational& r) {
  if (t == 0) throw DomainError("sector indices start at 1");
  check_r(r, false);
  DilationRule d;
  d.kind = RuleKind::sector;
  d.t = t;
  d.r = r;
  return d;
}

DilationRule DilationRule::explicit_list(std::vector<BigInt> js, std::size_t first_k, const Rational& r) {
  if (js.empty()) throw DomainError("an explicit rule needs at least one j");
  if (first_k == 0) throw DomainError("k starts at 1");
  for (std::size_t i = 0; i < js.size(); ++i) {
    if (js[i] <= 0) throw DomainError("dilation factors must be positive");
    if (i > 0 && js[i] <= js[i - 1]) throw DomainError("dilation factors must increase strictly");
  }
  check_r(r, true);
  DilationRule d;
  d.kind = RuleKind::explicit_list;
  d.js = std::move(js);
  d.first_k = first_k;
  d.r = r;
  return d;
}

DilationRule DilationRule::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string kind = trim(text.substr(0, colon));
  auto params = parse_params(colon == std::string::npos ? "" : text.substr(colon + 1));
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    std::string v = it->second;
    params.erase(it);
    return v;
  };
  auto rational = [&](const std::string& key, Rational fallback) {
    auto v = take(key);
    return v ? parse_rational(*v) : fallback;
  };
  DilationRule d;
  if (kind == "ratio-plus") {
    d = ratio_plus(rational("r", Rational(1, 2)));
  } else if (kind == "geometric-mean") {
    Rational L = rational("L", Rational(1));
    d = geometric_mean(L, rational("r", Rational(1, 2)));
  } else if (kind == "sector") {
    auto t = take("t");
    if (!t) throw DomainError("the sector rule needs t=<index>");
    std::size_t ti = parse_index(*t, "sector index");
    d = sector(ti, rational("r", Rational(1, 2)));
  } else if (kind == "explicit") {
    auto list = take("j");
    if (!list) throw DomainError("the explicit rule needs j=<j1;j2;...>");
    std::vector<BigInt> js;
    std::stringstream ss(*list);
    std::string item;
    while (std::getline(ss, item, ';')) {
      item = trim(item);
      if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
        throw DomainError("bad dilation factor '" + item + "'");
      js.emplace_back(item);
    }
    auto from = take("from");
    std::size_t first = from ? parse_index(*from, "first index") : 1;
    d = explicit_list(std::move(js), first, rational("r", Rational(1)));
  } else {
    throw DomainError("unknown rule '" + kind + "' (expected ratio-plus, geometric-mean, sector or explicit)");
  }
  if (!params.empty()) throw DomainError("unknown rule parameter '" + params.begin()->first + "'");
  return d;
}

std::string DilationRule::to_string() const {
  switch (kind) {
    case RuleKind::ratio_plus: return "ratio-plus:r=" + qn::to_string(r);
    case RuleKind::geometric_mean: return "geometric-mean:L=" + qn::to_string(L) + ",r=" + qn::to_string(r);
    case RuleKind::sector: return "sector:t=" + std::to_string(t) + ",r=" + qn::to_string(r);
    case RuleKind::explicit_list: {
      std::string s = "explicit:j=";
      for (std::size_t i = 0; i < js.size(); ++i) s += (i ? ";" : "") + qn::to_string(js[i]);
      return s + ",from=" + std::to_string(first_k) + ",r=" + qn::to_string(r);
    }
  }
  return "";
}

std::size_t first_index(const DilationRule& rule) {
  switch (rule.kind) {
    case RuleKind::sector: return rule.t;
    case RuleKind::explicit_list: return rule.first_k;
    default: return 1;
  }
}

BigInt dilation(const DilationRule& rule, const RadiiSequence& radii, std::size_t k) {
  if (k < first_index(rule))
    throw DomainError("k = " + std::to_string(k) + " precedes the rule's first index " +
                      std::to_string(first_index(rule)));
  switch (rule.kind) {
    case RuleKind::ratio_plus: return floor_exp_over(radii.log_radius(k), 1, rule.r) + 1;
    case RuleKind::geometric_mean:
      return floor_exp_over((radii.log_radius(k) + radii.log_radius(k + 1)) / 2, rule.L, 1);
    case RuleKind::sector: return floor_exp_over(radii.log_radius(ring_index(k, rule.t)), 1, rule.r) + 1;
    case RuleKind::explicit_list: {
      std::size_t i = k - rule.first_k;
      if (i >= rule.js.size()) throw DomainError("the explicit list has no j_" + std::to_string(k));
      return rule.js[i];
    }
  }
  return 0;
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::toward_lower: return "toward-lower";
    case Branch::toward_upper: return "toward-upper";
    case Branch::neither: return "neither";
  }
  return "neither";
}

Classification classify(const DilationRule& rule, const RadiiSequence& radii, std::size_t k_first,
                        std::size_t k_last) {
  if (k_last < k_first) throw DomainError("empty k range");
  Classification c;
  for (std::size_t k = k_first; k <= k_last; ++k) {
    ClassifyStep step;
    step.k = k;
    step.j = dilation(rule, radii, k);
    Rational jr = Rational(step.j) * rule.r;
    // Enough bits to separate log(j r) from a nearby log a_n.
    Rational scale = radii.log_radius_lower_bound(k + 2) + (rule.kind == RuleKind::sector ? radii.log_radius(ring_index(k, rule.t) + 1) : 0);
    with_precision_for(scale, 64, [&] {
      Interval x = log(Interval::point(jr));
      std::size_t n = 0;
      while (true) {
        Interval next = Interval::point(radii.log_radius_lower_bound(n + 1));
        if (next.certainly_greater(x)) break;
        if (!next.certainly_less(x) && !(next.hi <= x.lo)) throw InvariantError("cannot place j_k r among the radii");
        ++n;
      }
      step.n_k = n;
      step.lower_gap = n == 0 ? std::numeric_limits<Real>::infinity()
                              : (x - Interval::point(radii.log_radius(n))).mid();
      step.upper_gap = (Interval::point(radii.log_radius_lower_bound(n + 1)) - x).mid();
      return 0;
    });
    c.trail.push_back(std::move(step));
  }
  auto tends_to_zero = [&](auto gap) {
    for (std::size_t i = 1; i < c.trail.size(); ++i)
      if (gap(c.trail[i]) > gap(c.trail[i - 1])) return false;
    return gap(c.trail.back()) < to_real(kGapTolerance);
  };
  if (tends_to_zero([](const ClassifyStep& s) { return s.lower_gap; }))
    c.branch = Branch::toward_lower;
  else if (tends_to_zero([](const ClassifyStep& s) { return s.upper_gap; }))
    c.branch = Branch::toward_upper;
  return c;
}

Certificate non_c0_certificate(const ZeroSchedule& schedule, const DilationRule& rule, const Rational& target,
                               const Rational& delta, std::size_t k_first, std::size_t k_last) {
  if (delta <= 0) throw DomainError("delta must be positive");
  if (k_last < k_first) throw DomainError("empty k range");
  Certificate cert;
  cert.target = normalize_turn(target);
  cert.k_first = k_first;
  cert.k_last = k_last;
  TargetLocation loc = locate_target(schedule, rule, cert.target);
  if (!loc.found) {
    bool in_closure = false;
    if (schedule.variant != ScheduleVariant::custom)
      for (const auto& src : schedule.sources)
        if ((rule.kind != RuleKind::sector || src.sector == rule.t) && closure_gap(src.set, cert.target) == 0)
          in_closure = true;
    if (in_closure)
      throw DomainError("angle " + to_string(cert.target) + " lies in the set but not among its " +
                        "materialized points; increase the materialization");
    // Every zero of every f_j lies on a zero ray, so the distance from the
    // target point to the zeros is at least r sin(2 pi gap).
    cert.in_set = false;
    Rational gap = zero_ray_gap(schedule, cert.target);
    Real bound = gap >= Rational(1, 4)
                     ? to_real(rule.r, MPFR_RNDD)
                     : (Interval::point(rule.r) *
                        sin_increasing(Interval::point(gap) * Interval::point(Rational(2)) * pi_interval()))
                           .lo;
    for (std::size_t k = k_first; k <= k_last; ++k) {
      cert.distances.push_back(bound);
      cert.rows.push_back(0);
    }
    return cert;
  }
  std::vector<Real> lows;
  for (std::size_t k = k_first; k <= k_last; ++k) {
    BigInt j = dilation(rule, schedule.radii, k);
    Rational jr = Rational(j) * rule.r;
    // Rows up to the first radius beyond j r, where the nearest ring lies.
    std::size_t limit = schedule.has_tail() ? 1 : schedule.n_max;
    if (schedule.has_tail()) {
      Real x = log(to_real(jr, MPFR_RNDU));
      while (to_real(schedule.radii.log_radius_lower_bound(limit), MPFR_RNDD) <= x) ++limit;
      limit = std::max(limit, std::size_t{1});
    }
    std::optional<Interval> best;
    std::size_t best_row = 0;
    // When no row up to the limit carries the target, the nearest zero on its
    // ray is on the first later row that does.
    const std::size_t search_cap = schedule.has_tail() ? limit + 4096 : limit;
    for (std::size_t n = 1; n <= search_cap && (n <= limit || !best); ++n) {
      if (!row_has_target(schedule, loc, cert.target, n)) continue;
      Rational log_a = schedule.radii.log_radius(n);
      Interval d = with_precision_for(log_a + Rational(bits_for_exp(abs(log_a))), 64, [&] {
        Interval v = exp(Interval::point(log_a)) / Interval::point(Rational(j)) - Interval::point(rule.r);
        if (v.hi < 0) return Interval{Real(-v.hi), Real(-v.lo)};
        if (v.lo < 0) return Interval{Real(0), std::max(Real(-v.lo), v.hi)};
        return v;
      });
      if (!best || d.hi < best->hi) {
        best = d;
        best_row = n;
      }
    }
    if (!best) throw DomainError("no row carries angle " + to_string(cert.target) + " up to radius index " +
                                 std::to_string(search_cap));
    cert.distances.push_back(best->hi);
    lows.push_back(best->lo);
    cert.rows.push_back(best_row);
  }
  cert.decreasing = true;
  for (std::size_t i = 1; i < cert.distances.size(); ++i)
    if (!(cert.distances[i] < lows[i - 1])) cert.decreasing = false;
  cert.below_threshold = cert.distances.back() < to_real(rule.r * delta, MPFR_RNDD);
  cert.pass = cert.decreasing && cert.below_threshold;
  return cert;
}

std::vector<Point> disk_mesh(const ZeroSchedule& schedule, const SweepPoint& p, const Rational& rho, const BigInt& j,
                             std::size_t rows_used) {
  if (p.r <= 0) throw DomainError("sweep points need a positive modulus");
  if (rho <= 0) throw DomainError("disk radius must be positive");
  std::vector<Point> mesh{Point::from_exact(0, p.turn, p.r)};
  const Real theta = two_pi_real() * to_real(p.turn);
  const Real cx = to_real(p.r) * cos(theta), cy = to_real(p.r) * sin(theta);
  for (int k = 1; k <= 3; ++k) {
    Real radius = to_real(rho) * k / 3;
    for (int m = 0; m < 8 * k; ++m) {
      Real psi = two_pi_real() * m / (8 * k);
      Real x = cx + radius * cos(psi), y = cy + radius * sin(psi);
      if (x == 0 && y == 0)
        mesh.push_back(Point::origin());
      else
        mesh.push_back(Point::from_polar(log(hypot(x, y)), atan2(y, x)));
    }
  }
  const Rational inv_j = Rational(1) / Rational(j);
  for (const auto& b : schedule.zeros) {
    if (b.row > rows_used) break;
    Point z = Point::from_exact(b.log_r, b.turn, inv_j);
    Real m = exp(z.polar.log_mag);
    Real dx = m * cos(z.polar.phase) - cx, dy = m * sin(z.polar.phase) - cy;
    if (dx * dx + dy * dy <= to_real(rho * rho)) mesh.push_back(z);
  }
  return mesh;
}

std::vector<SweepRow> spherical_sweep(const ZeroSchedule& schedule, const std::vector<SweepPoint>& points,
                                        const DilationRule& rule, std::size_t n_first, std::size_t n_last,
                                        std::size_t rows_used) {
  if (n_first == 0 || n_last < n_first) throw DomainError("bad n range");
  std::vector<SweepRow> out;
  for (std::size_t n = n_first; n <= n_last; ++n) {
    BigInt j = dilation(rule, schedule.radii, n);
    for (std::size_t i = 0; i < points.size(); ++i) {
      SweepRow row;
      row.n = n;
      row.i = i + 1;
      row.j = j;
      row.max_fsharp = 0;
      for (const Point& z : disk_mesh(schedule, points[i], Rational(1, n), j, rows_used)) {
        Point w = z.scaled(j);
        if (!w.polar.is_zero() && !tail_hypothesis(schedule, w.polar.log_mag, rows_used)) row.valid = false;
        Real v = spherical_derivative(schedule, j, z, rows_used);
        if (v > row.max_fsharp) row.max_fsharp = v;
        ++row.samples;
      }
      row.exceeds_n = row.max_fsharp > n;
      out.push_back(std::move(row));
    }
  }
  return out;
}

RankProfile claimed_rank_profile(const ClaimedSet& claimed, const std::vector<Ordinal>& betas) {
  RankProfile profile;
  for (const Ordinal& b : betas) {
    std::optional<std::uint64_t> card = 0;
    if (claimed.angles) card = derive(*claimed.angles, b).cardinality();
    // The origin is isolated, so it only counts before any derivation.
    if (b.is_zero() && claimed.origin && card) *card += 1;
    profile.push_back(RankEntry{b, card});
  }
  return profile;
}

ProbeReport order_report(const ZeroSchedule& schedule, const DilationRule& rule, std::size_t depth,
                         std::size_t k_first, std::size_t k_last, const Rational& delta) {
  if (depth == 0) throw DomainError("depth must be positive");
  ProbeReport rep;
  rep.rule = rule;
  rep.k_first = k_first;
  rep.k_last = k_last;
  rep.classification = classify(rule, schedule.radii, k_first, k_last);
  const ScheduleSource& src = claimed_source(schedule, rule);
  if (depth > src.points.size())
    throw DomainError("depth " + std::to_string(depth) + " exceeds the " + std::to_string(src.points.size()) +
                      " materialized angles");
  bool clusters = rule.kind == RuleKind::ratio_plus || rule.kind == RuleKind::sector ||
                  (rule.kind == RuleKind::explicit_list && rep.classification.branch != Branch::neither);
  rep.claimed.origin = true;
  rep.claimed.radius = rule.r;
  rep.claimed.sector = src.sector;
  if (clusters) rep.claimed.angles = src.set;
  for (std::size_t i = 0; i < depth; ++i) {
    Certificate c = non_c0_certificate(schedule, rule, src.points[i], delta, k_first, k_last);
    // A certificate must pass exactly for the angles the claim includes.
    if (c.pass != clusters) rep.failing.push_back(c.target);
    rep.certificates.push_back(std::move(c));
  }
  rep.conclusive = rep.failing.empty();
  rep.rank_conclusion = claimed_rank_profile(rep.claimed, profile_betas(source_ordinal(schedule, src)));
  return rep;
}

nlohmann::json to_json(const Classification& c) {
  nlohmann::json trail = nlohmann::json::array();
  for (const auto& s : c.trail)
    trail.push_back({{"k", s.k},
                     {"j", to_string(s.j)},
                     {"n_k", s.n_k},
                     {"lower_gap", format_real(s.lower_gap)},
                     {"upper_gap", format_real(s.upper_gap)}});
  return {{"branch", to_string(c.branch)}, {"trail", trail}};
}

nlohmann::json to_json(const Certificate& c) {
  nlohmann::json d = nlohmann::json::array(), rows = nlohmann::json::array();
  for (const auto& x : c.distances) d.push_back(format_real(x));
  for (auto r : c.rows) rows.push_back(r);
  return {{"target", to_string(c.target)},
          {"in_set", c.in_set},
          {"k", {c.k_first, c.k_last}},
          {"distances", d},
          {"rows", rows},
          {"decreasing", c.decreasing},
          {"below_threshold", c.below_threshold},
          {"pass", c.pass}};
}

nlohmann::json to_json(const SweepRow& row) {
  return {{"n", row.n},
          {"i", row.i},
          {"j", to_string(row.j)},
          {"max_fsharp", format_real(row.max_fsharp)},
          {"samples", row.samples},
          {"valid", row.valid},
          {"exceeds_n", row.exceeds_n}};
}

nlohmann::json to_json(const ProbeReport& rep) {
  nlohmann::json certs = nlohmann::json::array(), failing = nlohmann::json::array();
  for (const auto& c : rep.certificates) certs.push_back(to_json(c));
  for (const auto& f : rep.failing) failing.push_back(to_string(f));
  nlohmann::json claimed{{"origin", rep.claimed.origin}, {"radius", to_string(rep.claimed.radius)}};
  claimed["angles"] = rep.claimed.angles ? to_json(*rep.claimed.angles) : nlohmann::json(nullptr);
  if (rep.claimed.sector) claimed["sector"] = rep.claimed.sector;
  return {{"rule", rep.rule.to_string()},
          {"k", {rep.k_first, rep.k_last}},
          {"criterion", "zero clustering: a point is non-C0 for {f_{j_k}} when zeros of f_{j_k} accumulate at it"},
          {"classification", to_json(rep.classification)},
          {"certificates", certs},
          {"claimed_non_c0", claimed},
          {"rank_profile", to_json(rep.rank_conclusion)},
          {"status", rep.conclusive ? "conclusive" : "inconclusive"},
          {"failing", failing}};
}

}  // namespace qn
