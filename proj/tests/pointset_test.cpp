#include "qnormal/pointset.hpp"

#include <gtest/gtest.h>

#include <random>

namespace qn {
namespace {

Ordinal O(const char* s) { return Ordinal::parse(s); }
Rational Q(const char* s) { return parse_rational(s); }

const Arc kHost = Arc::make(Rational(1, 8), Rational(1, 16));

PointSet pruned(PointSet s, int times) {
  for (int i = 0; i < times; ++i) s = derive_once(s);
  return s;
}

TEST(ArcPlacement, ChildArcsStronglyDisjointAndInsideHost) {
  for (std::uint64_t n = 1; n <= 24; ++n) {
    Arc a = child_arc(kHost, n);
    EXPECT_TRUE(kHost.contains(a));
    EXPECT_FALSE(a.contains(kHost.center));
    EXPECT_LT(a.center, kHost.center);
    for (std::uint64_t m = 1; m < n; ++m) EXPECT_TRUE(a.strongly_disjoint(child_arc(kHost, m)));
  }
}

TEST(ArcPlacement, CopiesStronglyDisjoint) {
  for (std::uint64_t nu = 2; nu <= 5; ++nu)
    for (std::uint64_t j = 1; j <= nu; ++j) {
      Arc a = copy_arc(kHost, j, nu);
      EXPECT_TRUE(kHost.contains(a));
      for (std::uint64_t i = 1; i < j; ++i) EXPECT_TRUE(a.strongly_disjoint(copy_arc(kHost, i, nu)));
    }
}

TEST(ArcPlacement, WrapsAroundZero) {
  Arc host = Arc::make(Rational(0), Rational(1, 10));
  Arc c = child_arc(host, 1);
  EXPECT_EQ(c.center, Rational(19, 20));
  EXPECT_TRUE(host.contains(c));
  EXPECT_THROW(Arc::make(Rational(0), Rational(1, 4)), DomainError);
}

TEST(BuildRankSet, RankOneIsLeafAtCenter) {
  PointSet e = build_rank_set(Ordinal(1), 1, kHost);
  ASSERT_EQ(e.trees().size(), 1u);
  EXPECT_TRUE(e.trees()[0].is_leaf());
  EXPECT_EQ(e.trees()[0].angle(), kHost.center);
}

TEST(BuildRankSet, RankTwoLeavesIncreaseTowardCenter) {
  PointSet e = build_rank_set(Ordinal(2), 1, kHost);
  auto pts = materialize(e, 1, 4);
  ASSERT_EQ(pts.size(), 4u);
  // Construction formula: theta_n = theta_0 - h / 2^n.
  for (int n = 1; n <= 4; ++n)
    EXPECT_EQ(pts[static_cast<std::size_t>(n - 1)], kHost.center - kHost.half_width / Rational(1 << n));
  for (const auto& p : pts) EXPECT_NE(p, kHost.center);
}

TEST(BuildRankSet, RankThreeMaterializesNine) {
  EXPECT_EQ(materialize(build_rank_set(Ordinal(3), 1, kHost), 2, 3).size(), 9u);
}

TEST(BuildRankSet, RankThreeTwoCopiesUnderPruning) {
  PointSet e = build_rank_set(Ordinal(3), 2, kHost);
  EXPECT_EQ(pruned(e, 2).cardinality(), 2u);
  EXPECT_TRUE(pruned(e, 3).empty());
}

TEST(BuildRankSet, Errors) {
  EXPECT_THROW(build_rank_set(Ordinal(0), 1, kHost), DomainError);
  EXPECT_THROW(build_rank_set(O("w"), 2, kHost), DomainError);
  EXPECT_THROW(build_rank_set(Ordinal(2), 0, kHost), DomainError);
}

TEST(DeriveOnce, ListedCases) {
  EXPECT_TRUE(derive_once(RankTree::leaf(Rational(1, 8))).empty());
  PointSet d = derive_once(build_rank_set(Ordinal(2), 1, kHost));
  ASSERT_EQ(d.cardinality(), 1u);
  EXPECT_EQ(d.trees()[0], RankTree::leaf(kHost.center));
  PointSet dd = pruned(build_rank_set(Ordinal(3), 1, kHost), 2);
  ASSERT_EQ(dd.cardinality(), 1u);
  EXPECT_TRUE(dd.trees()[0].is_leaf());
}

TEST(Derive, ListedCases) {
  EXPECT_TRUE(derive(build_rank_set(Ordinal(2), 1, kHost), Ordinal(2)).empty());
  EXPECT_EQ(derive(build_rank_set(O("w"), 1, kHost), O("w")).cardinality(), 1u);
  PointSet e = build_rank_set(Ordinal(4), 3, kHost);
  EXPECT_EQ(derive(e, Ordinal(3)).cardinality(), 3u);
  EXPECT_EQ(pruned(e, 3).cardinality(), 3u);
  EXPECT_EQ(derive(e, Ordinal(0)), e);
}

const char* kAlphas[] = {"1", "2", "3", "4", "w", "w+1", "w+2", "w*2", "w^2", "w^2+w"};

TEST(Derive, RankCorrectness) {
  for (const char* s : kAlphas) {
    Ordinal a = O(s);
    for (std::uint64_t nu = 1; nu <= (a.is_limit() ? 1u : 3u); ++nu) {
      PointSet e = build_rank_set(a, nu, kHost);
      if (a.is_successor()) {
        EXPECT_EQ(derive(e, *a.predecessor()).cardinality(), nu) << s;
        EXPECT_TRUE(derive(e, a).empty()) << s;
      } else {
        EXPECT_EQ(derive(e, a).cardinality(), 1u) << s;
        EXPECT_TRUE(derive(e, a.successor()).empty()) << s;
      }
    }
  }
}

TEST(Derive, AgreesWithIteratedPruning) {
  for (const char* s : kAlphas) {
    PointSet e = build_rank_set(O(s), 1, kHost);
    PointSet iter = e;
    for (std::uint64_t k = 1; k <= 6; ++k) {
      iter = derive_once(iter);
      PointSet tags = derive(e, Ordinal(k));
      EXPECT_TRUE(same_expansion(tags, iter, 2, 3)) << s << " k=" << k;
      EXPECT_EQ(tags.cardinality(), iter.cardinality()) << s << " k=" << k;
    }
  }
}

TEST(Derive, IsolationOfConstructedSets) {
  for (const char* s : kAlphas) {
    PointSet e = build_rank_set(O(s), 1, kHost);
    PointSet d1 = derive(e, Ordinal(1));
    for (const auto& p : materialize(e, 3, 4)) EXPECT_FALSE(contains_point(d1, p)) << s;
    for (const auto& p : materialize(d1, 3, 4)) EXPECT_FALSE(contains_point(e, p)) << s;
  }
}

TEST(Derive, MonotoneInBeta) {
  for (const char* s : {"4", "w+2", "w^2"}) {
    PointSet e = build_rank_set(O(s), 1, kHost);
    // Derived sets are closed, so inclusion holds from the first stage on; the
    // constructed set itself omits its limits.
    std::vector<Ordinal> betas = {1, 2, 3, O("w"), O("w+1"), O("w*2")};
    for (std::size_t i = 0; i < betas.size(); ++i)
      for (std::size_t j = i + 1; j < betas.size(); ++j) {
        PointSet hi = derive(e, betas[j]);
        PointSet lo = derive(e, betas[i]);
        if (hi.empty()) continue;
        for (const auto& p : materialize(hi, 3, 3)) EXPECT_TRUE(contains_point(lo, p)) << s;
      }
  }
}

TEST(Derive, MaterializedAnglesStayInHost) {
  for (const char* s : kAlphas)
    for (const auto& p : materialize(build_rank_set(O(s), 1, kHost), 3, 4)) EXPECT_TRUE(kHost.contains(p)) << s;
}

TEST(Derive, LimitStageMatchesIntersection) {
  for (const char* s : {"w", "w+1", "w*2", "w^2"}) {
    PointSet e = build_rank_set(O(s), 1, kHost);
    auto check = limit_intersection_check(e, O("w"), 8, 3, 3);
    EXPECT_TRUE(check.consistent) << s;
    EXPECT_GT(check.checked, 0u) << s;
    EXPECT_EQ(check.undetermined, 0u) << s;
  }
}

TEST(Materialize, LeafAndMonotonicity) {
  EXPECT_EQ(materialize(PointSet({RankTree::leaf(Rational(1, 8))}), 5, 5), std::vector<Rational>{Rational(1, 8)});
  PointSet e = build_rank_set(O("w+1"), 2, kHost);
  auto small = materialize(e, 2, 2);
  auto big = materialize(e, 3, 4);
  for (const auto& p : small) EXPECT_TRUE(std::binary_search(big.begin(), big.end(), p));
  EXPECT_TRUE(std::is_sorted(big.begin(), big.end()));
}

TEST(UnionDisjoint, ListedCases) {
  Arc g1 = Arc::make(Rational(1, 10), Rational(1, 100));
  Arc g2 = Arc::make(Rational(3, 10), Rational(1, 100));
  PointSet leaves = union_disjoint({{PointSet({RankTree::leaf(g1.center)}), g1},
                                    {PointSet({RankTree::leaf(g2.center)}), g2}});
  EXPECT_EQ(leaves.cardinality(), 2u);
  EXPECT_TRUE(derive_once(leaves).empty());

  PointSet a = build_rank_set(Ordinal(2), 1, g1);
  PointSet b = build_rank_set(Ordinal(3), 1, g2);
  PointSet u = union_disjoint({{a, g1}, {b, g2}});
  PointSet d1 = derive_once(u);
  EXPECT_EQ(d1.cardinality(), std::nullopt);
  EXPECT_TRUE(contains_point(d1, g1.center));
  PointSet d2 = derive_once(d1);
  ASSERT_EQ(d2.cardinality(), 1u);
  EXPECT_EQ(d2.trees()[0].angle(), g2.center);
  EXPECT_EQ(derive(u, Ordinal(2)), d2);
}

TEST(UnionDisjoint, RejectsOverlap) {
  Arc g1 = Arc::make(Rational(1, 10), Rational(1, 20));
  Arc g2 = Arc::make(Rational(3, 20), Rational(1, 100));
  EXPECT_THROW(union_disjoint({{build_rank_set(Ordinal(2), 1, g1), g1}, {build_rank_set(Ordinal(2), 1, g2), g2}}),
               DomainError);
  EXPECT_THROW(union_disjoint({{build_rank_set(Ordinal(2), 1, kHost), g2}}), DomainError);
}

TEST(UnionDisjoint, DerivedCommutesOnRandomPairs) {
  std::mt19937_64 rng(29);
  const char* pool[] = {"1", "2", "3", "w", "w+1", "w*2", "w^2"};
  for (int i = 0; i < 30; ++i) {
    Arc g1 = Arc::make(Rational(static_cast<long>(rng() % 40), 100), Rational(1, 200));
    Arc g2 = Arc::make(Rational(50 + static_cast<long>(rng() % 40), 100), Rational(1, 300));
    PointSet a = build_rank_set(O(pool[rng() % 7]), 1, g1);
    PointSet b = build_rank_set(O(pool[rng() % 7]), 1, g2);
    PointSet u = union_disjoint({{a, g1}, {b, g2}});
    for (const Ordinal& beta : {Ordinal(0), Ordinal(1), Ordinal(2), O("w"), O("w+1")}) {
      std::vector<RankTree> parts;
      for (const auto& s : {derive(a, beta), derive(b, beta)})
        parts.insert(parts.end(), s.trees().begin(), s.trees().end());
      EXPECT_EQ(derive(u, beta), PointSet(parts));
    }
  }
}

TEST(SingletonRefine, ListedCases) {
  PointSet leaf({RankTree::leaf(Rational(1, 8))});
  EXPECT_EQ(singleton_refine(leaf, Ordinal(0), Rational(1, 8)), leaf);

  PointSet two = build_rank_set(Ordinal(2), 2, kHost);
  Rational first = two.trees()[0].angle();
  PointSet r = singleton_refine(two, Ordinal(1), first);
  ASSERT_EQ(r.trees().size(), 1u);
  EXPECT_EQ(r.trees()[0], two.trees()[0]);

  PointSet lim = build_rank_set(O("w"), 1, kHost);
  PointSet rl = singleton_refine(lim, O("w"), kHost.center);
  PointSet d = derive(rl, O("w"));
  ASSERT_EQ(d.cardinality(), 1u);
  EXPECT_EQ(d.trees()[0].angle(), kHost.center);
}

TEST(SingletonRefine, StrictRefinementKeepsSingletonAndSubset) {
  struct Case {
    const char* set;
    const char* alpha;
  };
  for (Case c : {Case{"4", "1"}, Case{"4", "2"}, Case{"w+1", "3"}, Case{"w^2", "w"}, Case{"w^2", "w*2"},
                 Case{"w*2", "w+1"}}) {
    PointSet e = build_rank_set(O(c.set), 1, kHost);
    Ordinal a = O(c.alpha);
    PointSet r = singleton_refine(e, a, kHost.center);
    PointSet d = derive(r, a);
    ASSERT_EQ(d.cardinality(), 1u) << c.set << " " << c.alpha;
    EXPECT_EQ(d.trees()[0].angle(), kHost.center);
    EXPECT_TRUE(derive(r, a.successor()).empty());
    for (const auto& p : materialize(r, 3, 3)) EXPECT_TRUE(contains_point(e, p)) << c.set << " " << c.alpha;
    // Pruning agrees for finite ranks.
    if (auto k = a.finite_value()) EXPECT_EQ(pruned(r, static_cast<int>(*k)).cardinality(), 1u);
  }
}

TEST(SingletonRefine, RejectsTargetsOutsideDerivedSet) {
  PointSet e = build_rank_set(Ordinal(3), 1, kHost);
  EXPECT_THROW(singleton_refine(e, Ordinal(3), kHost.center), DomainError);
  EXPECT_THROW(singleton_refine(e, Ordinal(1), Rational(1, 2)), DomainError);
}

TEST(ClosureGap, ZeroOnClosurePositiveOff) {
  PointSet e = build_rank_set(O("w+1"), 2, kHost);
  for (const auto& p : materialize(e, 3, 3)) EXPECT_EQ(closure_gap(e, p), 0);
  for (const auto& t : e.trees()) EXPECT_EQ(closure_gap(e, t.angle()), 0);
  EXPECT_GT(closure_gap(e, Rational(1, 2)), 0);
  Rational between = (child_arc(copy_arc(kHost, 1, 2), 1).center + child_arc(copy_arc(kHost, 1, 2), 2).center) / 2;
  EXPECT_GT(closure_gap(e, between), 0);
  EXPECT_FALSE(contains_point(e, between));
}

TEST(RankProfile, NonIncreasingAndExact) {
  PointSet e = build_rank_set(Ordinal(3), 2, kHost);
  RankProfile p = rank_profile(e, profile_betas(Ordinal(3)));
  EXPECT_TRUE(profile_non_increasing(p));
  ASSERT_EQ(p.size(), 5u);
  EXPECT_EQ(p[2].beta, Ordinal(2));
  EXPECT_EQ(p[2].cardinality, 2u);
  EXPECT_EQ(p[3].cardinality, 0u);
}

TEST(Json, RoundTripIsExact) {
  std::vector<PointSet> sets = {
      build_rank_set(O("w+2"), 3, kHost),
      derive(build_rank_set(O("w^2"), 1, kHost), O("w+1")),
      singleton_refine(build_rank_set(Ordinal(4), 1, kHost), Ordinal(2), kHost.center),
      derive_once(build_rank_set(Ordinal(5), 1, kHost)),
      PointSet({RankTree::leaf(Rational(3, 7))}),
  };
  for (const auto& s : sets) {
    nlohmann::json j = to_json(s);
    PointSet back = point_set_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back, s);
    EXPECT_EQ(to_json(back).dump(), j.dump());
  }
  nlohmann::json desc = {{"kind", "rank_set"}, {"ordinal", "w+2"}, {"nu", 3}, {"arc", to_json(kHost)}};
  EXPECT_EQ(point_set_from_json(desc), sets[0]);
  nlohmann::json leaf = {{"kind", "leaf"}, {"angle", "1/8"}};
  EXPECT_EQ(point_set_from_json(leaf).trees()[0].angle(), Rational(1, 8));
}

TEST(Json, RejectsTampering) {
  nlohmann::json j = to_json(build_rank_set(Ordinal(3), 1, kHost).trees()[0]);
  j["rank_tag"] = "5";
  EXPECT_THROW(point_set_from_json(j), DomainError);
  EXPECT_THROW(point_set_from_json(nlohmann::json{{"kind", "bogus"}}), DomainError);
}

}  // namespace
}  // namespace qn
