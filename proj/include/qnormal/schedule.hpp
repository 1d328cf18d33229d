// Radii and zero schedules for the infinite products f(z) = prod (1 - z/b_l).
//
// Every radius is kept as its exact logarithm log a_n; a_n itself is never
// formed. Zeros are (log radius, turn) pairs.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnormal/numeric.hpp"
#include "qnormal/ordinal.hpp"
#include "qnormal/pointset.hpp"

namespace qn {

class RadiiSequence {
 public:
  // log a_1 = 1, log a_2 = 2, log a_{n+2} = log a_{n+1} + log a_n. Values at
  // every index are available, not only up to n_max.
  static RadiiSequence fibonacci(std::size_t n_max);
  // User-supplied logs of a_1..a_n. Must be positive and strictly increasing.
  static RadiiSequence from_log_radii(std::vector<Rational> log_radii);

  std::size_t n_max() const { return log_radii_.size(); }
  bool generated() const { return generated_; }
  const std::vector<Rational>& log_radii() const { return log_radii_; }

  // Exact log a_n for n >= 1; beyond n_max only for generated sequences.
  Rational log_radius(std::size_t n) const;
  // A lower bound on log a_n valid for every n >= 1: exact within range, and
  // beyond it the additive recurrence, which any continuation obeying
  // a_{n+2} >= a_{n+1} a_n dominates.
  Rational log_radius_lower_bound(std::size_t n) const;
  // A lower bound on log a_{n+1} - log a_n valid for all indices >= n (n >= 1),
  // assuming the product growth condition holds throughout.
  Rational increment_lower_bound(std::size_t n) const;

 private:
  std::vector<Rational> log_radii_;
  bool generated_ = false;
};

RadiiSequence build_radii(std::size_t n_max);

// Certified test of a_n >= 1/(1 - (1 - 2^-(n+1))^(1/(n+1))). Returns none
// when interval evaluation cannot decide even at raised precision.
std::optional<bool> growth_condition(std::size_t n, const Rational& log_a);

struct RadiiValidation {
  bool strictly_increasing = true;
  // First n with log a_{n+2} < log a_{n+1} + log a_n.
  std::optional<std::size_t> first_product_violation;
  // Smallest n0 such that the growth condition holds for every n0 <= n <= n_max.
  std::optional<std::size_t> growth_threshold;
  std::vector<std::size_t> growth_undecided;
  // (log a_n - log a_{n-1}) / n for n = 2..n_max; should increase without bound.
  std::vector<Rational> ratio_trail;
};

RadiiValidation validate_radii(const RadiiSequence& radii);

enum class ScheduleVariant { finite_order, infinite_order, limit_ordinal, custom };

std::string to_string(ScheduleVariant v);

struct ScheduledZero {
  Rational log_r;
  Rational turn;
  // Index of the radius a_row carrying this zero.
  std::size_t row = 0;
  // Sector index t >= 1 for the sector constructions, 0 otherwise.
  std::size_t sector = 0;

  friend bool operator==(const ScheduledZero&, const ScheduledZero&) = default;
};

struct MaterializeOptions {
  std::uint64_t depth = 0;
  std::uint64_t per_level = 0;
};

// A set supplying zero angles, with the deterministic point order used.
struct ScheduleSource {
  std::size_t sector = 0;
  // Host arc when the set was built by a construction.
  std::optional<Arc> arc;
  PointSet set;
  MaterializeOptions materialized;
  std::vector<Rational> points;
};

struct ZeroSchedule {
  ScheduleVariant variant = ScheduleVariant::custom;
  Ordinal alpha;
  // Number of rank-(alpha-1) points per set; none for the sector and limit
  // constructions, where it grows with the sector.
  std::optional<std::uint64_t> nu;
  RadiiSequence radii;
  // Highest radius index carrying zeros.
  std::size_t n_max = 0;
  std::vector<ScheduledZero> zeros;
  std::vector<ScheduleSource> sources;

  // s(l) for l >= 1.
  std::size_t row_of(std::size_t l) const;
  // Zeros beyond n_max exist (the product is infinite) unless custom.
  bool has_tail() const { return variant != ScheduleVariant::custom; }
  // Upper bound on the number of zeros on radius a_n for n > n_max.
  std::size_t zeros_on_row_bound(std::size_t n) const { return n; }
  const ScheduleSource& source_for_sector(std::size_t t) const;
};

inline const Arc kDefaultHostArc{Rational(1, 8), Rational(1, 16)};

// Points in the order zeros use them: sorted materialization with
// per_level = max(3, needed) and the smallest depth giving `needed` points.
// Explicit options override the search; a shortfall raises DomainError
// naming the depth that would suffice. A finite set with fewer points gives
// all of them when allow_fewer is set.
std::vector<Rational> schedule_points(const PointSet& set, std::size_t needed, MaterializeOptions& options,
                                      bool allow_fewer = false);

// Rows: row n carries a_n c_1, ..., a_n c_n.
ZeroSchedule build_rows(const PointSet& e, const RadiiSequence& radii, std::size_t n_max,
                        MaterializeOptions options = {});
ZeroSchedule build_finite_order_schedule(const Ordinal& alpha, std::uint64_t nu, std::size_t n_max,
                                         const Arc& host = kDefaultHostArc, MaterializeOptions options = {});

// Sector geometry: theta_t = 1/4 - 1/2^(t+2) turns, half-width 1/(3 * 2^(t+4)).
Arc sector_arc(std::size_t t);
// Radius index of ring t in block n (1 <= t <= n): n(n-1)/2 + t.
std::size_t ring_index(std::size_t block, std::size_t t);
// Inverse of ring_index: (block, t).
std::pair<std::size_t, std::size_t> ring_position(std::size_t m);

ZeroSchedule build_sector_schedule(const Ordinal& alpha, std::size_t n_max);
ZeroSchedule build_limit_schedule(const Ordinal& alpha, std::size_t n_max);
// Finite product with the given zeros; every zero is included at any row
// count not below its row.
ZeroSchedule custom_schedule(std::vector<ScheduledZero> zeros);

struct ConvergenceCheck {
  Rational exponent;
  std::size_t n = 0;
  // sum_{m <= n} m * exp(-exponent * log a_m), enclosed.
  Interval partial_sum;
  // Certified upper bound on the remaining sum over m > n.
  Real tail_bound;
};

ConvergenceCheck convergence_exponent_check(const ZeroSchedule& schedule, const Rational& exponent, std::size_t n);
ConvergenceCheck convergence_exponent_check(const RadiiSequence& radii, const Rational& exponent, std::size_t n);

struct ScheduleCheck {
  bool ok = true;
  std::vector<std::string> problems;
};
// Row counts, radii and sector purity, and angle provenance.
ScheduleCheck check_schedule(const ZeroSchedule& schedule);

nlohmann::json to_json(const RadiiSequence& radii);
nlohmann::json to_json(const ScheduledZero& zero);
nlohmann::json to_json(const ZeroSchedule& schedule);
ZeroSchedule schedule_from_json(const nlohmann::json& j);

}  // namespace qn
