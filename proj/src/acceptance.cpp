#include "qnormal/acceptance.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "qnormal/evaluator.hpp"
#include "qnormal/ordinal.hpp"
#include "qnormal/pointset.hpp"
#include "qnormal/probe.hpp"
#include "qnormal/schedule.hpp"

namespace qn {

namespace {

const char* const kTitles[kCriterionCount] = {
    "rank construction",  "union law",         "singleton refinement", "radii validity",
    "schedule counting",  "sector divergence", "zero clustering",      "geometric-mean immunity",
    "spherical-derivative sweep", "sector schedules", "determinism",
};

const Arc kHost = Arc::make(Rational(1, 8), Rational(1, 16));

// Collects failures; a criterion passes when none were recorded.
struct Check {
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  CriterionResult finish(int id) {
    details["failures"] = failures;
    return CriterionResult{id, kTitles[id - 1], failures.empty(), std::move(details)};
  }
};

std::string card_str(const std::optional<std::uint64_t>& c) { return c ? std::to_string(*c) : "infinite"; }

std::vector<RankTree> merged(const PointSet& a, const PointSet& b) {
  std::vector<RankTree> out = a.trees();
  out.insert(out.end(), b.trees().begin(), b.trees().end());
  return out;
}

CriterionResult rank_construction() {
  Check c;
  nlohmann::json rows = nlohmann::json::array();
  for (const char* text : {"1", "2", "3", "4", "w", "w+1", "w+2", "w*2", "w^2", "w^2+w"}) {
    Ordinal a = Ordinal::parse(text);
    for (std::uint64_t nu = 1; nu <= (a.is_successor() ? 3u : 1u); ++nu) {
      std::string tag = std::string(text) + " nu=" + std::to_string(nu);
      PointSet e = build_rank_set(a, nu, kHost);
      nlohmann::json row{{"alpha", text}, {"nu", nu}};
      if (a.is_successor()) {
        auto top = derive(e, *a.predecessor()).cardinality();
        row["top_cardinality"] = card_str(top);
        c.expect(top == nu, tag + ": |E^(alpha-1)| = " + card_str(top));
        c.expect(derive(e, a).empty(), tag + ": E^(alpha) is not empty");
      } else {
        auto top = derive(e, a).cardinality();
        row["top_cardinality"] = card_str(top);
        c.expect(top == 1u, tag + ": |E^(alpha)| = " + card_str(top));
      }
      // E is isolated: no materialized point of E is in E', and conversely.
      PointSet d1 = derive(e, 1);
      for (const auto& p : materialize(e, 3, 4))
        c.expect(!contains_point(d1, p), tag + ": point " + to_string(p) + " of E lies in E'");
      for (const auto& p : materialize(d1, 3, 4))
        c.expect(!contains_point(e, p), tag + ": point " + to_string(p) + " of E' lies in E");
      // Chains of up to six prunings, started from 0 and from every limit
      // stage not above alpha, against derive by rank tags.
      std::size_t chains = 0;
      for (const char* start : {"0", "w", "w*2", "w^2"}) {
        Ordinal lam = Ordinal::parse(start);
        if (lam > a) continue;
        PointSet iter = derive(e, lam);
        Ordinal beta = lam;
        for (int k = 1; k <= 6 && !iter.empty(); ++k) {
          iter = derive_once(iter);
          beta = beta.successor();
          PointSet tags = derive(e, beta);
          c.expect(same_expansion(tags, iter, 2, 3) && tags.cardinality() == iter.cardinality(),
                   tag + ": derive and pruning disagree at " + beta.to_string());
        }
        ++chains;
      }
      row["pruning_chains"] = chains;
      rows.push_back(row);
    }
  }
  c.details["cases"] = rows;
  return c.finish(1);
}

CriterionResult union_law() {
  Check c;
  std::mt19937_64 rng(20240611);
  const char* pool[] = {"1", "2", "3", "4", "w", "w+1", "w+2", "w*2", "w^2"};
  std::size_t comparisons = 0;
  for (int i = 0; i < 100; ++i) {
    Arc g1 = Arc::make(Rational(static_cast<long>(rng() % 40) + 5, 100), Rational(1, 200 + static_cast<long>(rng() % 100)));
    Arc g2 = Arc::make(Rational(static_cast<long>(rng() % 40) + 55, 100), Rational(1, 200 + static_cast<long>(rng() % 100)));
    Ordinal oa = Ordinal::parse(pool[rng() % 9]), ob = Ordinal::parse(pool[rng() % 9]);
    std::uint64_t na = oa.is_successor() ? 1 + rng() % 3 : 1, nb = ob.is_successor() ? 1 + rng() % 3 : 1;
    PointSet a = build_rank_set(oa, na, g1), b = build_rank_set(ob, nb, g2);
    PointSet u = union_disjoint({{a, g1}, {b, g2}});
    std::vector<Ordinal> betas = profile_betas(std::max(oa, ob));
    for (const Ordinal& beta : betas) {
      ++comparisons;
      c.expect(derive(u, beta) == PointSet(merged(derive(a, beta), derive(b, beta))),
               "pair " + std::to_string(i) + " (" + oa.to_string() + ", " + ob.to_string() + ") at " + beta.to_string());
    }
  }
  c.details["pairs"] = 100;
  c.details["comparisons"] = comparisons;
  return c.finish(2);
}

CriterionResult singleton_refinement() {
  Check c;
  struct Case {
    const char* set;
    const char* alpha;
  };
  const Case pool[] = {{"3", "2"}, {"4", "1"}, {"4", "2"}, {"4", "3"}, {"w", "2"}, {"w+1", "3"},
                       {"w+1", "w"}, {"w+2", "w+1"}, {"w*2", "w+1"}, {"w^2", "w"}, {"w^2", "w*2"}, {"w^2+w", "w^2"}};
  std::mt19937_64 rng(7);
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 20; ++i) {
    const Case& cs = pool[rng() % std::size(pool)];
    Ordinal so = Ordinal::parse(cs.set), a = Ordinal::parse(cs.alpha);
    PointSet e = build_rank_set(so, so.is_successor() ? 1 + rng() % 2 : 1, kHost);
    std::vector<Rational> candidates = materialize(derive(e, a), 2, 3);
    Rational target = candidates[rng() % candidates.size()];
    PointSet d = derive(singleton_refine(e, a, target), a);
    bool ok = d.cardinality() == 1u && d.trees()[0].angle() == target;
    c.expect(ok, std::string(cs.set) + " at " + cs.alpha + ", target " + to_string(target));
    rows.push_back({{"set", cs.set}, {"alpha", cs.alpha}, {"target", to_string(target)}, {"singleton", ok}});
  }
  c.details["triples"] = rows;
  return c.finish(3);
}

CriterionResult radii_validity() {
  Check c;
  RadiiSequence radii = RadiiSequence::fibonacci(12);
  for (std::size_t n = 1; n + 2 <= 12; ++n)
    c.expect(radii.log_radius(n + 2) == radii.log_radius(n + 1) + radii.log_radius(n),
             "a_" + std::to_string(n + 2) + " != a_" + std::to_string(n + 1) + " a_" + std::to_string(n));
  RadiiValidation v1 = validate_radii(radii), v2 = validate_radii(RadiiSequence::fibonacci(12));
  c.expect(!v1.first_product_violation, "product condition violated");
  c.expect(v1.growth_threshold.has_value(), "growth threshold not found within n <= 12");
  c.expect(v1.growth_threshold == v2.growth_threshold, "growth threshold differs between runs");
  c.expect(v1.growth_undecided.empty(), "growth condition undecided at some n");
  c.details["growth_threshold"] = v1.growth_threshold ? nlohmann::json(*v1.growth_threshold) : nlohmann::json(nullptr);
  ConvergenceCheck conv = convergence_exponent_check(radii, 1, 20);
  c.expect(conv.tail_bound < Real(1e-6), "tail of sum n/a_n beyond n = 20 not below 1e-6");
  c.details["partial_sum_20"] = format_real(conv.partial_sum.mid());
  c.details["tail_bound"] = format_real(conv.tail_bound);
  return c.finish(4);
}

CriterionResult schedule_counting() {
  Check c;
  ZeroSchedule s = build_finite_order_schedule(Ordinal(3), 1, 10);
  std::vector<std::size_t> counts(11, 0);
  for (const auto& z : s.zeros) ++counts[z.row];
  for (std::size_t n = 1; n <= 10; ++n)
    c.expect(counts[n] == n, "row " + std::to_string(n) + " holds " + std::to_string(counts[n]) + " zeros");
  const auto& cs = s.sources.front().points;
  auto is = [&](std::size_t l, std::size_t row, std::size_t m) {
    const ScheduledZero& b = s.zeros[l - 1];
    return b.row == row && b.log_r == s.radii.log_radius(row) && b.turn == cs[m - 1];
  };
  c.expect(is(1, 1, 1), "b_1 != a_1 c_1");
  c.expect(is(3, 2, 2), "b_3 != a_2 c_2");
  c.expect(is(7, 4, 1), "b_7 != a_4 c_1");
  for (std::size_t l = 7; l <= 10; ++l)
    c.expect(s.zeros[l - 1].row == 4 && s.row_of(l) == 4, "s(" + std::to_string(l) + ") != 4");
  c.details["zeros"] = s.zeros.size();
  return c.finish(5);
}

CriterionResult sector_divergence() {
  Check c;
  const Rational alpha0(3, 10);
  ZeroSchedule s = build_finite_order_schedule(Ordinal(3), 2, 11);
  nlohmann::json rows = nlohmann::json::array();
  std::vector<Real> minima;
  for (std::size_t n = 3; n <= 8; ++n) {
    Rational lo = s.radii.log_radius(n), hi = s.radii.log_radius(n + 1);
    Real min_lhs, rhs;
    bool all = true;
    for (int i = 0; i < 20; ++i) {
      Rational log_r = lo + (hi - lo) * Rational(i + 1, 20);
      Rational turn = Rational(3, 10) + Rational(65, 100) * Rational(i, 19);
      SectorBoundReport rep = sector_bound_check(s, Point::from_exact(log_r, turn), alpha0);
      if (i == 0 || rep.lhs < min_lhs) min_lhs = rep.lhs;
      rhs = rep.rhs;
      if (!rep.pass || rep.n != n) all = false;
    }
    c.expect(all, "annulus " + std::to_string(n) + " has a sample below the bound");
    minima.push_back(min_lhs);
    rows.push_back({{"n", n}, {"min_certified_log_abs_f", format_real(min_lhs)}, {"rhs", format_real(rhs)}, {"pass", all}});
  }
  // Indices 2..5 hold n = 5..8.
  for (std::size_t i = 3; i < minima.size(); ++i)
    c.expect(minima[i] > minima[i - 1], "certified lower bound does not increase at n = " + std::to_string(i + 3));
  c.details["annuli"] = rows;
  return c.finish(6);
}

CriterionResult zero_clustering() {
  Check c;
  ZeroSchedule s = build_finite_order_schedule(Ordinal(3), 1, 12);
  nlohmann::json certs = nlohmann::json::array();
  for (Rational r : {Rational(3, 10), Rational(7, 10)}) {
    DilationRule rule = DilationRule::ratio_plus(r);
    for (std::size_t m = 1; m <= 5; ++m) {
      Certificate cert = non_c0_certificate(s, rule, s.sources.front().points[m - 1], kDefaultDelta, 6, 10);
      c.expect(cert.pass, "r = " + to_string(r) + ", c_" + std::to_string(m));
      nlohmann::json j = to_json(cert);
      j["r"] = to_string(r);
      j["m"] = m;
      certs.push_back(j);
    }
  }
  c.details["certificates"] = certs;
  return c.finish(7);
}

CriterionResult geometric_mean_immunity() {
  Check c;
  ZeroSchedule s = build_finite_order_schedule(Ordinal(3), 1, 12);
  DilationRule rule = DilationRule::geometric_mean(1);
  Classification cl = classify(rule, s.radii, 4, 8);
  c.expect(cl.branch == Branch::neither, "classification is " + to_string(cl.branch));
  c.details["classification"] = to_json(cl);
  std::size_t passed = 0;
  for (std::size_t m = 1; m <= 5; ++m)
    if (non_c0_certificate(s, rule, s.sources.front().points[m - 1], kDefaultDelta, 4, 8).pass) ++passed;
  c.expect(passed == 0, std::to_string(passed) + " clustering certificates passed");
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 4; k <= 8; ++k) {
    BigInt j = dilation(rule, s.radii, k);
    // (k(k-1)/2) log 2 increases with k.
    Real threshold = Real(k * (k - 1) / 2) * log(Real(2));
    Real min_lb;
    bool valid = true;
    for (int i = 0; i < 36; ++i) {
      EvalResult e = family_eval(s, j, Point::from_exact(0, Rational(i, 36), Rational(1, 2)), s.n_max);
      Real lb = e.value.log_mag - e.tail_log_bound;
      valid = valid && e.valid;
      if (i == 0 || lb < min_lb) min_lb = lb;
    }
    c.expect(valid, "k = " + std::to_string(k) + ": tail bound not valid");
    c.expect(min_lb > threshold, "k = " + std::to_string(k) + ": min log|f| below threshold");
    rows.push_back({{"k", k}, {"j", to_string(j)}, {"min_certified_log_abs_f", format_real(min_lb)},
                    {"threshold", format_real(threshold)}});
  }
  c.details["circle_half"] = rows;
  return c.finish(8);
}

CriterionResult spherical_derivative_growth() {
  Check c;
  ZeroSchedule s = build_finite_order_schedule(Ordinal(3), 1, 12);
  DilationRule rule = DilationRule::ratio_plus(Rational(1, 2));
  const Real control_cap = 1;
  std::vector<SweepPoint> pts{{s.sources.front().points[0], Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)}};
  std::vector<SweepRow> rows = spherical_sweep(s, pts, rule, 5, 9, s.n_max);
  nlohmann::json out = nlohmann::json::array();
  Real prev = 0;
  for (const SweepRow& row : rows) {
    std::string tag = "n = " + std::to_string(row.n);
    c.expect(row.valid, tag + ", point " + std::to_string(row.i) + ": tail bound not valid on the disk");
    if (row.i == 1) {
      c.expect(row.max_fsharp > prev, tag + ": maximum does not increase");
      c.expect(row.exceeds_n, tag + ": maximum not above n");
      prev = row.max_fsharp;
    } else {
      c.expect(row.max_fsharp < control_cap, tag + ": control maximum not below 1");
    }
    out.push_back(to_json(row));
  }
  c.details["rows"] = out;
  return c.finish(9);
}

void check_purity(Check& c, const ZeroSchedule& s, const std::string& name) {
  for (const auto& z : s.zeros) {
    if (z.row > 12) continue;
    std::size_t t = ring_position(z.row).second;
    c.expect(z.sector == t && sector_arc(t).contains(z.turn),
             name + ": ring " + std::to_string(z.row) + " holds a zero outside sector " + std::to_string(t));
  }
  ScheduleCheck chk = check_schedule(s);
  for (const auto& p : chk.problems) c.expect(false, name + ": " + p);
}

CriterionResult sector_schedules() {
  Check c;
  check_purity(c, build_sector_schedule(Ordinal(3), 12), "successor schedule");
  check_purity(c, build_limit_schedule(Ordinal::omega(), 12), "limit schedule");
  ZeroSchedule s = build_sector_schedule(Ordinal(3), 21);
  nlohmann::json certs = nlohmann::json::array();
  for (std::size_t t : {1, 2}) {
    DilationRule rule = DilationRule::sector(t, Rational(1, 2));
    const ScheduleSource& src = s.source_for_sector(t);
    for (std::size_t i = 0; i < t; ++i) {
      Certificate cert = non_c0_certificate(s, rule, src.points[i], kDefaultDelta, t, 6);
      c.expect(cert.pass, "sector " + std::to_string(t) + ", point " + std::to_string(i + 1));
      nlohmann::json j = to_json(cert);
      j["t"] = t;
      certs.push_back(j);
    }
  }
  c.details["certificates"] = certs;
  nlohmann::json profiles = nlohmann::json::array();
  for (std::size_t t : {1, 2, 3}) {
    ProbeReport rep = order_report(s, DilationRule::sector(t, Rational(1, 2)), t, t, 6);
    std::optional<std::uint64_t> top;
    bool seen = false;
    for (const auto& e : rep.rank_conclusion)
      if (e.beta == Ordinal(2)) {
        top = e.cardinality;
        seen = true;
      }
    c.expect(seen && top == t, "sector " + std::to_string(t) + ": rank-2 cardinality " + card_str(top));
    c.expect(rep.conclusive, "sector " + std::to_string(t) + ": report inconclusive");
    profiles.push_back({{"t", t}, {"rank_profile", to_json(rep.rank_conclusion)}});
  }
  c.details["order_reports"] = profiles;
  return c.finish(10);
}

CriterionResult run_one(int id) {
  switch (id) {
    case 1: return rank_construction();
    case 2: return union_law();
    case 3: return singleton_refinement();
    case 4: return radii_validity();
    case 5: return schedule_counting();
    case 6: return sector_divergence();
    case 7: return zero_clustering();
    case 8: return geometric_mean_immunity();
    case 9: return spherical_derivative_growth();
    case 10: return sector_schedules();
  }
  throw DomainError("no criterion " + std::to_string(id));
}

// A criterion that throws is a failure, with the message as its detail.
CriterionResult run_guarded(int id) {
  try {
    return run_one(id);
  } catch (const std::exception& e) {
    return CriterionResult{id, kTitles[id - 1], false, {{"failures", {std::string("error: ") + e.what()}}}};
  }
}

std::string serialize(const std::vector<CriterionResult>& results) { return acceptance_report(results).dump(2); }

CriterionResult determinism() {
  Check c;
  std::vector<CriterionResult> first, second;
  for (int id = 1; id <= 10; ++id) first.push_back(run_guarded(id));
  for (int id = 1; id <= 10; ++id) second.push_back(run_guarded(id));
  std::string a = serialize(first), b = serialize(second);
  c.expect(a == b, "reports of two consecutive runs differ");
  c.details["report_bytes"] = a.size();
  return c.finish(11);
}

}  // namespace

std::vector<int> all_criteria() {
  std::vector<int> ids;
  for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  return ids;
}

std::vector<int> parse_suite(const std::string& suite) {
  if (suite == "all") return all_criteria();
  std::vector<int> ids;
  std::stringstream ss(suite);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int id = 0;
    try {
      std::size_t pos = 0;
      id = std::stoi(item, &pos);
      if (pos != item.size()) id = 0;
    } catch (const std::logic_error&) {
      id = 0;
    }
    if (id < 1 || id > kCriterionCount) throw DomainError("unknown criterion '" + item + "' (expected 1..11 or all)");
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  if (ids.empty()) throw DomainError("empty suite");
  return ids;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids) {
  std::vector<CriterionResult> out;
  for (int id : ids) {
    if (id < 1 || id > kCriterionCount) throw DomainError("no criterion " + std::to_string(id));
    out.push_back(id == 11 ? determinism() : run_guarded(id));
  }
  return out;
}

nlohmann::json to_json(const CriterionResult& r) {
  return {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"details", r.details}};
}

nlohmann::json acceptance_report(const std::vector<CriterionResult>& results) {
  nlohmann::json list = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& r : results) {
    list.push_back(to_json(r));
    if (!r.pass) ++failed;
  }
  return {{"precision_bits", precision_bits()}, {"criteria", list}, {"failed", failed}};
}

std::string format_table(const std::vector<CriterionResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    os << (r.pass ? "[PASS] " : "[FAIL] ") << (r.id < 10 ? " " : "") << r.id << "  " << r.title << "\n";
    if (!r.pass)
      for (const auto& f : r.details["failures"]) os << "         " << f.get<std::string>() << "\n";
  }
  return os.str();
}

}  // namespace qn
