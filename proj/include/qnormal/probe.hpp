// Finite certificates for the behaviour of dilation subsequences f(j_k z).
//
// A point is treated as non-C0 for {f_{j_k}} when zeros of f_{j_k} cluster at
// it; that clustering is what the certificates measure. Uniform convergence
// itself is not finitely checkable and is never claimed.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnormal/evaluator.hpp"
#include "qnormal/pointset.hpp"
#include "qnormal/schedule.hpp"

namespace qn {

enum class RuleKind { ratio_plus, geometric_mean, sector, explicit_list };

struct DilationRule {
  RuleKind kind = RuleKind::ratio_plus;
  // |eta_0|: the circle on which clustering is sought. 0 < r < 1 except for
  // explicit lists, where r = 1 is allowed.
  Rational r{1, 2};
  // Scale of the geometric-mean rule.
  Rational L{1};
  // Sector index of the sector rule.
  std::size_t t = 1;
  // Explicit j_k for k = first_k, first_k + 1, ...
  std::vector<BigInt> js;
  std::size_t first_k = 1;

  static DilationRule ratio_plus(const Rational& r);
  static DilationRule geometric_mean(const Rational& L, const Rational& r = Rational(1, 2));
  static DilationRule sector(std::size_t t, const Rational& r);
  static DilationRule explicit_list(std::vector<BigInt> js, std::size_t first_k, const Rational& r);
  // "ratio-plus:r=1/2", "geometric-mean:L=1,r=1/2", "sector:t=2,r=1/2",
  // "explicit:j=21;55;149,from=4,r=1".
  static DilationRule parse(const std::string& text);
  std::string to_string() const;
};

// j_k of the rule. Floors of transcendental quantities are taken from
// enclosures tight enough to decide them.
BigInt dilation(const DilationRule& rule, const RadiiSequence& radii, std::size_t k);
// First admissible k (the sector rule starts at k = t).
std::size_t first_index(const DilationRule& rule);

enum class Branch { toward_lower, toward_upper, neither };
std::string to_string(Branch b);

struct ClassifyStep {
  std::size_t k = 0;
  BigInt j;
  // a_{n_k} <= j_k r < a_{n_k + 1}.
  std::size_t n_k = 0;
  Real lower_gap;  // log(j_k r) - log a_{n_k}
  Real upper_gap;  // log a_{n_k + 1} - log(j_k r)
};

struct Classification {
  Branch branch = Branch::neither;
  std::vector<ClassifyStep> trail;
};

// A gap "tends to 0" over the window when it never increases and ends below
// this tolerance.
inline const Rational kGapTolerance{1, 8};

Classification classify(const DilationRule& rule, const RadiiSequence& radii, std::size_t k_first, std::size_t k_last);

struct Certificate {
  Rational target;
  bool in_set = true;
  std::size_t k_first = 0;
  std::size_t k_last = 0;
  // Upper ends of enclosures of the distance from r e^{2 pi i target} to the
  // nearest zero of f_{j_k} on that ray (or a lower bound on the distance to
  // any zero when the target is off the set).
  std::vector<Real> distances;
  std::vector<std::size_t> rows;
  bool decreasing = false;
  bool below_threshold = false;
  bool pass = false;
};

Certificate non_c0_certificate(const ZeroSchedule& schedule, const DilationRule& rule, const Rational& target,
                               const Rational& delta, std::size_t k_first, std::size_t k_last);

struct SweepPoint {
  Rational turn;
  Rational r;
};

struct SweepRow {
  std::size_t n = 0;
  std::size_t i = 0;
  BigInt j;
  Real max_fsharp;
  std::size_t samples = 0;
  bool valid = true;
  bool exceeds_n = false;
};

// Mesh on the closed disk of radius rho around p: the center, 8k points on
// the circle of radius k rho / 3 for k = 1, 2, 3, and every zero of f_j in
// the disk among the first rows_used rows.
std::vector<Point> disk_mesh(const ZeroSchedule& schedule, const SweepPoint& p, const Rational& rho, const BigInt& j,
                             std::size_t rows_used);

std::vector<SweepRow> spherical_sweep(const ZeroSchedule& schedule, const std::vector<SweepPoint>& points,
                                        const DilationRule& rule, std::size_t n_first, std::size_t n_last,
                                        std::size_t rows_used);

// {0} together with the circle |z| = r carrying the angles of `angles`.
struct ClaimedSet {
  bool origin = true;
  Rational radius;
  std::optional<PointSet> angles;
  std::size_t sector = 0;
};

RankProfile claimed_rank_profile(const ClaimedSet& claimed, const std::vector<Ordinal>& betas);

struct ProbeReport {
  DilationRule rule;
  std::size_t k_first = 0;
  std::size_t k_last = 0;
  Classification classification;
  std::vector<Certificate> certificates;
  ClaimedSet claimed;
  RankProfile rank_conclusion;
  bool conclusive = true;
  std::vector<Rational> failing;
};

inline const Rational kDefaultDelta{1, 1000};

// Certificates for the first `depth` angles of the relevant source set.
ProbeReport order_report(const ZeroSchedule& schedule, const DilationRule& rule, std::size_t depth,
                         std::size_t k_first, std::size_t k_last, const Rational& delta = kDefaultDelta);

nlohmann::json to_json(const Classification& c);
nlohmann::json to_json(const Certificate& c);
nlohmann::json to_json(const SweepRow& row);
nlohmann::json to_json(const ProbeReport& report);

}  // namespace qn
