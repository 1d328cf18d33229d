#include "qnormal/pointset.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <mutex>

namespace qn {

namespace detail {

enum class NodeType { leaf, base, derived, refined, pruned };

struct Node {
  NodeType type = NodeType::leaf;
  Rational angle;
  Ordinal tag;
  bool contains_limit = false;
  Arc extent;
  std::string shape;
  // base: the constructed ordinal; derived: the shift; refined: the rank.
  Ordinal param;
  std::shared_ptr<const Node> of;

  mutable std::recursive_mutex mu;
  mutable std::vector<RankTree> children;
  // Last child index of `of` already consumed.
  mutable std::uint64_t scan = 0;
  mutable std::deque<RankTree> pending;
};

}  // namespace detail

using detail::Node;
using detail::NodeType;

// ---------------------------------------------------------------- arcs

Arc Arc::make(const Rational& center, const Rational& half_width) {
  if (half_width <= 0 || half_width >= Rational(1, 4))
    throw DomainError("arc half-width must lie in (0, 1/4), got " + to_string(half_width));
  return Arc{normalize_turn(center), half_width};
}

Arc Arc::point(const Rational& angle) { return Arc{normalize_turn(angle), Rational(0)}; }

bool Arc::contains(const Rational& turn) const { return turn_distance(turn, center) <= half_width; }

bool Arc::contains(const Arc& inner) const {
  return turn_distance(inner.center, center) + inner.half_width <= half_width;
}

bool Arc::strongly_disjoint(const Arc& other) const {
  return turn_distance(center, other.center) > half_width + other.half_width;
}

Rational Arc::distance_to(const Rational& turn) const {
  Rational d = turn_distance(turn, center) - half_width;
  return d > 0 ? d : Rational(0);
}

Arc child_arc(const Arc& host, std::uint64_t n) {
  if (n == 0) throw DomainError("child index starts at 1");
  BigInt two = boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(n));
  BigInt three = boost::multiprecision::pow(BigInt(3), static_cast<unsigned>(n + 2));
  return Arc{normalize_turn(host.center - host.half_width / Rational(two)), host.half_width / Rational(three)};
}

Arc copy_arc(const Arc& host, std::uint64_t j, std::uint64_t nu) {
  if (nu == 0 || j == 0 || j > nu) throw DomainError("copy index out of range");
  const Rational& h = host.half_width;
  Rational center = host.center - h + h * Rational(2 * j - 1) / Rational(nu);
  return Arc{normalize_turn(center), h / Rational(3 * nu)};
}

namespace {

// ---------------------------------------------------------------- node makers

constexpr std::uint64_t kScanLimit = 1'000'000;

RankTree make_leaf(const Rational& angle) {
  auto n = std::make_shared<Node>();
  n->type = NodeType::leaf;
  n->angle = normalize_turn(angle);
  n->extent = Arc::point(n->angle);
  n->shape = "L";
  return RankTree(std::move(n));
}

RankTree make_base(const Ordinal& alpha, const Arc& host) {
  if (alpha.is_zero()) throw DomainError("rank construction needs alpha >= 1");
  if (alpha == Ordinal(1)) return make_leaf(host.center);
  auto n = std::make_shared<Node>();
  n->type = NodeType::base;
  n->angle = host.center;
  n->tag = alpha.is_successor() ? *alpha.predecessor() : alpha;
  n->extent = host;
  n->param = alpha;
  n->shape = "B" + alpha.to_string();
  return RankTree(std::move(n));
}

RankTree make_derived(const RankTree& tree, const Ordinal& shift) {
  const Node& x = tree.node();
  if (x.type == NodeType::derived) return make_derived(RankTree(x.of), x.param + shift);
  if (!(x.tag > shift)) throw InvariantError("derived cluster would keep no point above its shift");
  auto n = std::make_shared<Node>();
  n->type = NodeType::derived;
  n->angle = x.angle;
  n->tag = x.tag.minus_left(shift);
  n->contains_limit = true;
  n->extent = x.extent;
  n->param = shift;
  n->of = tree.handle();
  n->shape = "D" + shift.to_string() + "(" + x.shape + ")";
  return RankTree(std::move(n));
}

RankTree make_refined(const RankTree& tree, const Ordinal& rank) {
  const Node& x = tree.node();
  if (rank.is_zero() || !(x.tag > rank)) throw InvariantError("refinement rank must be in [1, tag)");
  auto n = std::make_shared<Node>();
  n->type = NodeType::refined;
  n->angle = x.angle;
  n->tag = rank;
  n->extent = x.extent;
  n->param = rank;
  n->of = tree.handle();
  n->shape = "R" + rank.to_string() + "(" + x.shape + ")";
  return RankTree(std::move(n));
}

RankTree make_pruned(const RankTree& tree) {
  const Node& x = tree.node();
  if (!(x.tag > Ordinal(1)))
    throw InvariantError("pruning kept infinitely many clusters under a cluster tagged " + x.tag.to_string());
  auto n = std::make_shared<Node>();
  n->type = NodeType::pruned;
  n->angle = x.angle;
  n->tag = x.tag.minus_left(Ordinal(1));
  n->contains_limit = true;
  n->extent = x.extent;
  n->of = tree.handle();
  n->shape = "P(" + x.shape + ")";
  return RankTree(std::move(n));
}

// Ordinal constructed at child n of E(alpha, 1).
Ordinal base_child_ordinal(const Ordinal& alpha, std::uint64_t n) {
  if (alpha.is_successor()) {
    Ordinal p = *alpha.predecessor();
    if (p.is_successor()) return p;
    return enumerate_below(p, n)[n - 1].successor();
  }
  return enumerate_below(alpha, n)[n - 1].successor();
}

Rational first_point(const RankTree& t) {
  RankTree cur = t;
  while (!cur.is_leaf() && !cur.contains_limit()) cur = cur.child(1);
  return cur.angle();
}

RankTree derive_single(const RankTree& t, const Ordinal& beta) {
  if (t.rank_tag() == beta) return make_leaf(t.angle());
  return make_derived(t, beta);
}

RankTree refine_single(const RankTree& t, const Ordinal& rank) {
  if (rank.is_zero()) return make_leaf(first_point(t));
  if (t.rank_tag() == rank) return t;
  return make_refined(t, rank);
}

RankTree scan_child(const Node& n) {
  if (++n.scan > kScanLimit) throw InvariantError("child scan limit exceeded under " + n.shape);
  return RankTree(n.of).child(n.scan);
}

void generate_next(const Node& n) {
  const std::uint64_t k = n.children.size() + 1;
  switch (n.type) {
    case NodeType::leaf:
      throw DomainError("a leaf has no children");
    case NodeType::base:
      n.children.push_back(make_base(base_child_ordinal(n.param, k), child_arc(n.extent, k)));
      return;
    case NodeType::derived:
      for (;;) {
        RankTree c = scan_child(n);
        if (c.rank_tag() >= n.param) {
          n.children.push_back(derive_single(c, n.param));
          return;
        }
      }
    case NodeType::refined: {
      Ordinal target = n.param.is_successor() ? *n.param.predecessor() : n.param.fundamental(k);
      for (;;) {
        RankTree c = scan_child(n);
        if (c.rank_tag() >= target) {
          n.children.push_back(refine_single(c, target));
          return;
        }
      }
    }
    case NodeType::pruned:
      while (n.pending.empty()) {
        PointSet d = derive_once(scan_child(n));
        n.pending.insert(n.pending.end(), d.trees().begin(), d.trees().end());
      }
      n.children.push_back(n.pending.front());
      n.pending.pop_front();
      return;
  }
}

bool same_node(const Node& a, const Node& b) {
  if (&a == &b) return true;
  if (a.type != b.type || a.angle != b.angle) return false;
  switch (a.type) {
    case NodeType::leaf:
      return true;
    case NodeType::base:
      return a.param == b.param && a.extent == b.extent;
    case NodeType::derived:
    case NodeType::refined:
      return a.param == b.param && same_node(*a.of, *b.of);
    case NodeType::pruned:
      return same_node(*a.of, *b.of);
  }
  return false;
}

// ------------------------------------------------ structural pruning window

struct PruneCache {
  std::mutex mu;
  std::map<std::string, bool> infinite;
  std::map<std::string, std::vector<std::uint64_t>> early_clusters;
};

PruneCache& prune_cache() {
  static PruneCache cache;
  return cache;
}

// Whether infinitely many children of `t` are clusters, read off the window.
bool infinitely_many_cluster_children(const RankTree& t) {
  auto& cache = prune_cache();
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    if (auto it = cache.infinite.find(t.shape()); it != cache.infinite.end()) return it->second;
  }
  std::uint64_t clusters = 0;
  for (std::uint64_t m = kPruneWindow; m < 2 * kPruneWindow; ++m)
    if (!t.child(m).is_leaf()) ++clusters;
  if (clusters != 0 && clusters != kPruneWindow)
    throw InvariantError("pruning window undecided for " + t.shape());
  bool result = clusters == kPruneWindow;
  std::lock_guard<std::mutex> lock(cache.mu);
  cache.infinite.emplace(t.shape(), result);
  return result;
}

// Indices m < kPruneWindow of cluster children, for trees whose children are
// eventually all leaves.
std::vector<std::uint64_t> early_cluster_children(const RankTree& t) {
  auto& cache = prune_cache();
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    if (auto it = cache.early_clusters.find(t.shape()); it != cache.early_clusters.end()) return it->second;
  }
  std::vector<std::uint64_t> out;
  for (std::uint64_t m = 1; m < kPruneWindow; ++m)
    if (!t.child(m).is_leaf()) out.push_back(m);
  std::lock_guard<std::mutex> lock(cache.mu);
  cache.early_clusters.emplace(t.shape(), out);
  return out;
}

// Distance from the limit to the far end of a child's extent.
Rational far_reach(const RankTree& limit_owner, const RankTree& child) {
  return turn_distance(limit_owner.angle(), child.extent().center) + child.extent().half_width;
}

// Children are visited until one sits within a third of `d0` of the limit;
// from then on every later child lies within d0/2 of the limit (placement
// rule: child arcs shrink geometrically toward the limit).
bool past_reach(const RankTree& t, const RankTree& child, const Rational& d0) {
  return 3 * far_reach(t, child) <= d0;
}

Rational tree_gap(const RankTree& t, const Rational& turn) {
  Rational d0 = turn_distance(turn, t.angle());
  if (t.is_leaf() || d0 == 0) return d0;
  if (!t.extent().contains(turn)) return t.extent().distance_to(turn);
  Rational best = d0 / 2;
  for (std::uint64_t k = 1;; ++k) {
    RankTree c = t.child(k);
    Rational g = tree_gap(c, turn);
    if (g < best) best = g;
    if (best == 0 || past_reach(t, c, d0)) return best;
  }
}

// The subtree whose own point (leaf angle or limit) is `turn`.
std::optional<RankTree> locate(const RankTree& t, const Rational& turn) {
  if (t.angle() == turn) return t;
  if (t.is_leaf() || !t.extent().contains(turn)) return std::nullopt;
  Rational d0 = turn_distance(turn, t.angle());
  for (std::uint64_t k = 1;; ++k) {
    RankTree c = t.child(k);
    if (c.extent().contains(turn)) return locate(c, turn);
    if (past_reach(t, c, d0)) return std::nullopt;
  }
}

bool tree_contains(const RankTree& t, const Rational& turn) {
  auto hit = locate(t, turn);
  return hit && (hit->is_leaf() || hit->contains_limit());
}

void collect(const RankTree& t, std::uint64_t depth, std::uint64_t per_level, std::vector<Rational>& out) {
  if (t.is_leaf()) {
    out.push_back(t.angle());
    return;
  }
  if (t.contains_limit()) out.push_back(t.angle());
  if (depth == 0) return;
  for (std::uint64_t n = 1; n <= per_level; ++n) collect(t.child(n), depth - 1, per_level, out);
}

bool same_tree_expansion(const RankTree& a, const RankTree& b, std::uint64_t depth, std::uint64_t per_level) {
  if (a.kind() != b.kind() || a.angle() != b.angle()) return false;
  if (a.is_leaf()) return true;
  if (a.contains_limit() != b.contains_limit() || a.rank_tag() != b.rank_tag()) return false;
  if (depth == 0) return true;
  for (std::uint64_t n = 1; n <= per_level; ++n)
    if (!same_tree_expansion(a.child(n), b.child(n), depth - 1, per_level)) return false;
  return true;
}

PointSet iterate_derive_once(PointSet s, std::uint64_t k) {
  for (std::uint64_t i = 0; i < k; ++i) s = derive_once(s);
  return s;
}

}  // namespace

// ---------------------------------------------------------------- RankTree

RankTree RankTree::leaf(const Rational& angle) { return make_leaf(angle); }

RankTree RankTree::construction(const Ordinal& alpha, const Arc& host) { return make_base(alpha, host); }

RankTree::Kind RankTree::kind() const { return node_->type == NodeType::leaf ? Kind::leaf : Kind::cluster; }

const Rational& RankTree::angle() const { return node_->angle; }

const Ordinal& RankTree::rank_tag() const { return node_->tag; }

bool RankTree::contains_limit() const { return node_->contains_limit; }

const Arc& RankTree::extent() const { return node_->extent; }

const std::string& RankTree::shape() const { return node_->shape; }

RankTree RankTree::child(std::uint64_t n) const {
  if (n == 0) throw DomainError("child index starts at 1");
  const Node& nd = *node_;
  std::lock_guard<std::recursive_mutex> lock(nd.mu);
  while (nd.children.size() < n) generate_next(nd);
  return nd.children[n - 1];
}

bool operator==(const RankTree& a, const RankTree& b) { return same_node(a.node(), b.node()); }

// ---------------------------------------------------------------- PointSet

PointSet::PointSet(std::vector<RankTree> trees) : trees_(std::move(trees)) {
  std::sort(trees_.begin(), trees_.end(),
            [](const RankTree& a, const RankTree& b) { return a.angle() < b.angle(); });
  for (std::size_t i = 1; i < trees_.size(); ++i)
    if (trees_[i - 1].angle() == trees_[i].angle())
      throw InvariantError("two trees share the angle " + to_string(trees_[i].angle()));
}

std::optional<std::uint64_t> PointSet::cardinality() const {
  for (const auto& t : trees_)
    if (!t.is_leaf()) return std::nullopt;
  return trees_.size();
}

bool operator==(const PointSet& a, const PointSet& b) {
  if (a.trees_.size() != b.trees_.size()) return false;
  for (std::size_t i = 0; i < a.trees_.size(); ++i)
    if (!(a.trees_[i] == b.trees_[i])) return false;
  return true;
}

PointSet build_rank_set(const Ordinal& alpha, std::uint64_t nu, const Arc& host) {
  if (alpha.is_zero()) throw DomainError("alpha must be at least 1");
  if (nu == 0) throw DomainError("nu must be at least 1");
  if (alpha.is_limit() && nu != 1)
    throw DomainError("limit alpha " + alpha.to_string() + " admits only nu = 1");
  Arc checked = Arc::make(host.center, host.half_width);
  if (nu == 1) return PointSet({make_base(alpha, checked)});
  std::vector<RankTree> trees;
  for (std::uint64_t j = 1; j <= nu; ++j) trees.push_back(make_base(alpha, copy_arc(checked, j, nu)));
  return PointSet(std::move(trees));
}

PointSet derive_once(const RankTree& tree) {
  if (tree.is_leaf()) return PointSet();
  if (infinitely_many_cluster_children(tree)) return PointSet({make_pruned(tree)});
  std::vector<RankTree> out{make_leaf(tree.angle())};
  for (std::uint64_t m : early_cluster_children(tree)) {
    PointSet d = derive_once(tree.child(m));
    out.insert(out.end(), d.trees().begin(), d.trees().end());
  }
  return PointSet(std::move(out));
}

PointSet derive_once(const PointSet& set) {
  std::vector<RankTree> out;
  for (const auto& t : set.trees()) {
    PointSet d = derive_once(t);
    out.insert(out.end(), d.trees().begin(), d.trees().end());
  }
  return PointSet(std::move(out));
}

PointSet derive(const RankTree& tree, const Ordinal& beta) {
  if (beta.is_zero()) return PointSet({tree});
  if (tree.rank_tag() < beta) return PointSet();
  return PointSet({derive_single(tree, beta)});
}

PointSet derive(const PointSet& set, const Ordinal& beta) {
  std::vector<RankTree> out;
  for (const auto& t : set.trees()) {
    PointSet d = derive(t, beta);
    out.insert(out.end(), d.trees().begin(), d.trees().end());
  }
  return PointSet(std::move(out));
}

PointSet union_disjoint(const std::vector<ArcMember>& members) {
  std::vector<RankTree> out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const ArcMember& m = members[i];
    for (std::size_t j = 0; j < i; ++j)
      if (!m.arc.strongly_disjoint(members[j].arc))
        throw DomainError("arcs " + std::to_string(j) + " and " + std::to_string(i) + " are not strongly disjoint");
    for (const auto& t : m.set.trees()) {
      if (!m.arc.contains(t.extent()))
        throw DomainError("member " + std::to_string(i) + " leaves its arc");
      out.push_back(t);
    }
  }
  return PointSet(std::move(out));
}

PointSet singleton_refine(const PointSet& set, const Ordinal& alpha, const Rational& target) {
  Rational turn = normalize_turn(target);
  if (!contains_point(derive(set, alpha), turn))
    throw DomainError("target " + to_string(turn) + " is not a point of the derived set of order " +
                      alpha.to_string());
  for (const auto& t : set.trees()) {
    auto hit = locate(t, turn);
    if (!hit) continue;
    return PointSet({refine_single(*hit, alpha)});
  }
  throw InvariantError("derived point " + to_string(turn) + " not found in the source set");
}

std::vector<Rational> materialize(const PointSet& set, std::uint64_t depth, std::uint64_t per_level) {
  if (depth == 0 || per_level == 0) throw DomainError("depth and per_level must be at least 1");
  std::vector<Rational> out;
  for (const auto& t : set.trees()) collect(t, depth, per_level, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool contains_point(const PointSet& set, const Rational& turn) {
  Rational t = normalize_turn(turn);
  return std::any_of(set.trees().begin(), set.trees().end(),
                     [&](const RankTree& tree) { return tree_contains(tree, t); });
}

Rational closure_gap(const PointSet& set, const Rational& turn) {
  Rational t = normalize_turn(turn);
  std::optional<Rational> best;
  for (const auto& tree : set.trees()) {
    Rational g = tree_gap(tree, t);
    if (!best || g < *best) best = g;
  }
  if (!best) throw DomainError("distance to an empty set");
  return *best;
}

bool same_expansion(const PointSet& a, const PointSet& b, std::uint64_t depth, std::uint64_t per_level) {
  if (a.trees().size() != b.trees().size()) return false;
  for (std::size_t i = 0; i < a.trees().size(); ++i)
    if (!same_tree_expansion(a.trees()[i], b.trees()[i], depth, per_level)) return false;
  return true;
}

IntersectionCheck limit_intersection_check(const PointSet& set, const Ordinal& beta, std::uint64_t max_k,
                                           std::uint64_t depth, std::uint64_t per_level) {
  if (!beta.is_limit()) throw DomainError("intersection check needs a limit ordinal");
  // Small finite stages come from structural pruning, the rest from tags.
  std::vector<PointSet> stages;
  for (std::uint64_t k = 1; k <= max_k; ++k) {
    Ordinal b = beta.fundamental(k);
    auto f = b.finite_value();
    stages.push_back(f && *f <= 6 ? iterate_derive_once(set, *f) : derive(set, b));
  }
  IntersectionCheck out;
  PointSet at_beta = derive(set, beta);
  if (stages.front().empty()) return out;
  for (const Rational& p : materialize(stages.front(), depth, per_level)) {
    ++out.checked;
    bool in_beta = contains_point(at_beta, p);
    bool in_all = std::all_of(stages.begin(), stages.end(), [&](const PointSet& s) { return contains_point(s, p); });
    if (in_beta && !in_all) out.consistent = false;
    if (!in_beta && in_all) ++out.undetermined;
  }
  return out;
}

RankProfile rank_profile(const PointSet& set, std::vector<Ordinal> betas) {
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
  RankProfile out;
  for (const auto& b : betas) out.push_back(RankEntry{b, derive(set, b).cardinality()});
  return out;
}

std::vector<Ordinal> profile_betas(const Ordinal& alpha) {
  std::vector<Ordinal> out;
  std::uint64_t cap = alpha.finite_value() ? std::min<std::uint64_t>(*alpha.finite_value(), 4) : 4;
  for (std::uint64_t b = 0; b <= cap; ++b) out.emplace_back(b);
  if (alpha.is_successor()) out.push_back(*alpha.predecessor());
  out.push_back(alpha);
  out.push_back(alpha.successor());
  if (alpha.is_limit())
    for (std::uint64_t k = 1; k <= 3; ++k) out.push_back(alpha.fundamental(k));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool profile_non_increasing(const RankProfile& profile) {
  for (std::size_t i = 1; i < profile.size(); ++i) {
    const auto& prev = profile[i - 1].cardinality;
    const auto& cur = profile[i].cardinality;
    if (!prev) continue;
    if (!cur || *cur > *prev) return false;
  }
  return true;
}

// ---------------------------------------------------------------- JSON

using nlohmann::json;

json to_json(const Arc& arc) {
  return json{{"center", to_string(arc.center)}, {"half_width", to_string(arc.half_width)}};
}

Arc arc_from_json(const json& j) {
  if (!j.is_object() || !j.contains("center") || !j.contains("half_width"))
    throw DomainError("arc needs center and half_width");
  return Arc::make(parse_rational(j.at("center").get<std::string>()),
                   parse_rational(j.at("half_width").get<std::string>()));
}

json to_json(const RankTree& tree) {
  const Node& n = tree.node();
  switch (n.type) {
    case NodeType::leaf:
      return json{{"kind", "leaf"}, {"angle", to_string(n.angle)}};
    case NodeType::base:
      return json{{"kind", "cluster"},   {"limit", to_string(n.angle)}, {"ordinal", n.param.to_string()},
                  {"nu", 1},             {"arc", to_json(n.extent)},    {"rank_tag", n.tag.to_string()}};
    case NodeType::derived:
      return json{{"kind", "derived"},
                  {"limit", to_string(n.angle)},
                  {"shift", n.param.to_string()},
                  {"rank_tag", n.tag.to_string()},
                  {"of", to_json(RankTree(n.of))}};
    case NodeType::refined:
      return json{{"kind", "refined"},
                  {"limit", to_string(n.angle)},
                  {"rank", n.param.to_string()},
                  {"of", to_json(RankTree(n.of))}};
    case NodeType::pruned:
      return json{{"kind", "pruned"},
                  {"limit", to_string(n.angle)},
                  {"rank_tag", n.tag.to_string()},
                  {"of", to_json(RankTree(n.of))}};
  }
  throw InvariantError("unknown node type");
}

json to_json(const PointSet& set) {
  json trees = json::array();
  for (const auto& t : set.trees()) trees.push_back(to_json(t));
  return json{{"kind", "forest"}, {"trees", trees}};
}

json to_json(const RankProfile& profile) {
  json out = json::array();
  for (const auto& e : profile) {
    json c = e.cardinality ? json(*e.cardinality) : json("infinite");
    out.push_back(json{{"beta", e.beta.to_string()}, {"cardinality", c}});
  }
  return out;
}

namespace {

std::string field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw DomainError(std::string("rank tree field '") + key + "' missing or not a string");
  return j.at(key).get<std::string>();
}

RankTree tree_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw DomainError("rank tree must be an object with a kind");
  const std::string kind = j.at("kind").get<std::string>();
  RankTree t = [&]() {
    if (kind == "leaf") return make_leaf(parse_rational(field(j, "angle")));
    if (kind == "cluster") {
      if (j.contains("nu") && j.at("nu").get<std::uint64_t>() != 1)
        throw DomainError("a single cluster has nu = 1; use a forest for copies");
      return make_base(Ordinal::parse(field(j, "ordinal")), arc_from_json(j.at("arc")));
    }
    if (!j.contains("of")) throw DomainError("'" + kind + "' node needs 'of'");
    RankTree of = tree_from_json(j.at("of"));
    if (kind == "derived") {
      Ordinal s = Ordinal::parse(field(j, "shift"));
      if (s.is_zero() || !(of.rank_tag() > s)) throw DomainError("derived shift out of range");
      return make_derived(of, s);
    }
    if (kind == "refined") {
      Ordinal r = Ordinal::parse(field(j, "rank"));
      if (r.is_zero() || !(of.rank_tag() > r)) throw DomainError("refined rank out of range");
      return make_refined(of, r);
    }
    if (kind == "pruned") {
      if (of.is_leaf() || !infinitely_many_cluster_children(of))
        throw DomainError("pruned node over a cluster with finitely many cluster children");
      return make_pruned(of);
    }
    throw DomainError("unknown rank tree kind '" + kind + "'");
  }();
  if (j.contains("limit") && parse_rational(field(j, "limit")) != t.angle())
    throw DomainError("stored limit does not match the descriptor");
  if (j.contains("rank_tag") && Ordinal::parse(field(j, "rank_tag")) != t.rank_tag())
    throw DomainError("stored rank tag does not match the descriptor");
  return t;
}

}  // namespace

PointSet point_set_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw DomainError("point set must be an object with a kind");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "forest") {
    std::vector<RankTree> trees;
    for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
    return PointSet(std::move(trees));
  }
  if (kind == "rank_set")
    return build_rank_set(Ordinal::parse(field(j, "ordinal")), j.at("nu").get<std::uint64_t>(),
                          arc_from_json(j.at("arc")));
  return PointSet({tree_from_json(j)});
}

}  // namespace qn
