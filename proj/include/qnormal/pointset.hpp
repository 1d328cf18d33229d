// Countable closed subsets of circular arcs with exact Cantor-Bendixson data.
//
// A RankTree is either a leaf (one angle) or a cluster: a point (the limit)
// approached from below by infinitely many child trees living on pairwise
// strongly disjoint arcs. Children are generated on demand from a small
// descriptor, so trees of transfinite rank stay finite in memory.
//
// Every cluster carries a rank tag: the largest beta for which its limit
// belongs to the beta-th derived set. Every child's tag is below its parent's.
// Clusters built by the construction do not contain their limit; clusters
// produced by derivation do.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnormal/numeric.hpp"
#include "qnormal/ordinal.hpp"

namespace qn {

// Closed arc {theta : |theta - center| <= half_width} on the unit circle,
// angles in turns. Host arcs need 0 < half_width < 1/4; degenerate arcs
// (half_width 0) describe single points.
struct Arc {
  Rational center;
  Rational half_width;

  static Arc make(const Rational& center, const Rational& half_width);
  static Arc point(const Rational& angle);

  bool contains(const Rational& turn) const;
  bool contains(const Arc& inner) const;
  // Closed arcs do not meet.
  bool strongly_disjoint(const Arc& other) const;
  // Zero when the turn lies on the arc.
  Rational distance_to(const Rational& turn) const;

  friend bool operator==(const Arc&, const Arc&) = default;
};

// Arc of child n >= 1 of a cluster on `host`: half-width h/3^(n+2), centered
// h/2^n below the host center.
Arc child_arc(const Arc& host, std::uint64_t n);
// Sub-arc j in 1..nu when `host` is split for nu strongly disjoint copies.
Arc copy_arc(const Arc& host, std::uint64_t j, std::uint64_t nu);

namespace detail {
struct Node;
}

class RankTree {
 public:
  enum class Kind { leaf, cluster };

  static RankTree leaf(const Rational& angle);
  // E(alpha, 1, host) for alpha >= 1; alpha == 1 is a leaf at host.center.
  static RankTree construction(const Ordinal& alpha, const Arc& host);

  Kind kind() const;
  bool is_leaf() const { return kind() == Kind::leaf; }
  // Leaf angle, or the limit of a cluster.
  const Rational& angle() const;
  const Ordinal& rank_tag() const;
  bool contains_limit() const;
  // Smallest arc known to contain every point of the tree.
  const Arc& extent() const;
  // Child n >= 1 of a cluster.
  RankTree child(std::uint64_t n) const;
  // Arc-free structural key; trees with equal shapes have isomorphic
  // children sequences.
  const std::string& shape() const;

  friend bool operator==(const RankTree& a, const RankTree& b);

  const detail::Node& node() const { return *node_; }
  const std::shared_ptr<const detail::Node>& handle() const { return node_; }
  explicit RankTree(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<const detail::Node> node_;
};

// A finite union of trees with pairwise strongly disjoint extents, kept
// sorted by angle.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::vector<RankTree> trees);

  const std::vector<RankTree>& trees() const { return trees_; }
  bool empty() const { return trees_.empty(); }
  // Number of points, or none when infinite.
  std::optional<std::uint64_t> cardinality() const;

  friend bool operator==(const PointSet& a, const PointSet& b);

 private:
  std::vector<RankTree> trees_;
};

PointSet build_rank_set(const Ordinal& alpha, std::uint64_t nu, const Arc& host);

// One application of the accumulation-point operator, by structural pruning
// of children. It never consults rank tags to decide what survives; whether
// infinitely many children survive is read off the children with indices in
// [kPruneWindow, 2 * kPruneWindow), which must agree.
inline constexpr std::uint64_t kPruneWindow = 32;
PointSet derive_once(const RankTree& tree);
PointSet derive_once(const PointSet& set);

// beta-th derived set computed from rank tags.
PointSet derive(const RankTree& tree, const Ordinal& beta);
PointSet derive(const PointSet& set, const Ordinal& beta);

struct ArcMember {
  PointSet set;
  Arc arc;
};
// Union of sets placed on pairwise strongly disjoint arcs.
PointSet union_disjoint(const std::vector<ArcMember>& members);

// Subset of `set` whose alpha-th derived set is exactly {target}.
PointSet singleton_refine(const PointSet& set, const Ordinal& alpha, const Rational& target);

// Leaves, plus limits of clusters that contain their limit, reached by
// expanding the first `per_level` children of each cluster `depth` levels
// deep. Sorted by turn in [0, 1), duplicates removed.
std::vector<Rational> materialize(const PointSet& set, std::uint64_t depth, std::uint64_t per_level);

// Exact membership of a turn in the set.
bool contains_point(const PointSet& set, const Rational& turn);
// A lower bound on the distance (in turns) from `turn` to the closure of the
// set; it is zero exactly when the turn lies in the closure.
Rational closure_gap(const PointSet& set, const Rational& turn);

// Compares two sets by expanding both `depth` levels with `per_level`
// children per cluster: kinds, angles, limit membership and rank tags must
// agree everywhere. Used to compare sets produced by different routes.
bool same_expansion(const PointSet& a, const PointSet& b, std::uint64_t depth, std::uint64_t per_level);

// Checks derive(set, beta) against the intersection of derive(set, fs(beta, k))
// for k <= max_k, point by point over a materialized prefix: a point kept by
// the intersection must be in derive(set, beta) and vice versa, except points
// whose exclusion needs k > max_k, which are counted as undetermined.
struct IntersectionCheck {
  std::uint64_t checked = 0;
  std::uint64_t undetermined = 0;
  bool consistent = true;
};
IntersectionCheck limit_intersection_check(const PointSet& set, const Ordinal& beta, std::uint64_t max_k,
                                           std::uint64_t depth, std::uint64_t per_level);

struct RankEntry {
  Ordinal beta;
  std::optional<std::uint64_t> cardinality;  // none means infinite
};
using RankProfile = std::vector<RankEntry>;

RankProfile rank_profile(const PointSet& set, std::vector<Ordinal> betas);
// beta = 0..min(alpha, 4), alpha - 1, alpha, alpha + 1 and, for limit alpha,
// the first three fundamental-sequence terms.
std::vector<Ordinal> profile_betas(const Ordinal& alpha);
bool profile_non_increasing(const RankProfile& profile);

nlohmann::json to_json(const Arc& arc);
Arc arc_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RankTree& tree);
nlohmann::json to_json(const PointSet& set);
nlohmann::json to_json(const RankProfile& profile);
// Accepts a single tree, {"kind":"forest","trees":[...]}, or
// {"kind":"rank_set","ordinal":...,"nu":...,"arc":...}.
PointSet point_set_from_json(const nlohmann::json& j);

}  // namespace qn
