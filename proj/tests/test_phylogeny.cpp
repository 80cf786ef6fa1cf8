#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "phylodiv/phylogeny.hpp"
#include "phylodiv/random.hpp"

using phylodiv::Phylogeny;
using phylodiv::Random;
using phylodiv::taxon_id;

TEST_CASE("record_birth: same phenotype continues the parent taxon") {
  Phylogeny tree;
  const taxon_id p = tree.record_birth(std::nullopt, "A", 0);
  const taxon_id child = tree.record_birth(p, "A", 1);
  CHECK(child == p);
  CHECK(tree.taxon(p).living_count == 2);
  CHECK(tree.size() == 1);
}

TEST_CASE("record_birth: new phenotype splits off a child taxon") {
  Phylogeny tree;
  const taxon_id p = tree.record_birth(std::nullopt, "A", 0);
  const taxon_id child = tree.record_birth(p, "B", 1);
  CHECK(child != p);
  CHECK(tree.taxon(child).parent == p);
  CHECK(tree.taxon(child).origin_time == 1);
  CHECK(tree.taxon(p).children == std::vector<taxon_id>{child});
}

TEST_CASE("record_birth: identical phenotypes from different parents are distinct taxa") {
  Phylogeny tree;
  const taxon_id p1 = tree.record_birth(std::nullopt, "A", 0);
  const taxon_id p2 = tree.record_birth(std::nullopt, "B", 0);
  const taxon_id c1 = tree.record_birth(p1, "C", 1);
  const taxon_id c2 = tree.record_birth(p2, "C", 1);
  CHECK(c1 != c2);
  CHECK(tree.taxon(c1).phenotype == tree.taxon(c2).phenotype);
}

TEST_CASE("record_birth: errors on unknown or extinct parent") {
  Phylogeny tree;
  const taxon_id p = tree.record_birth(std::nullopt, "A", 0);
  CHECK_THROWS_AS(tree.record_birth(taxon_id{999}, "B", 1), std::invalid_argument);
  const taxon_id child = tree.record_birth(p, "B", 1);
  tree.record_death(p, 2);  // p extinct but retained (child extant)
  CHECK(tree.contains(p));
  CHECK_THROWS_AS(tree.record_birth(p, "C", 3), std::invalid_argument);
  (void)child;
}

TEST_CASE("record_death: leaf with no children is pruned") {
  Phylogeny tree;
  const taxon_id p = tree.record_birth(std::nullopt, "A", 0);
  const taxon_id leaf = tree.record_birth(p, "B", 1);
  tree.record_death(leaf, 2);
  CHECK_FALSE(tree.contains(leaf));
  CHECK(tree.taxon(p).children.empty());
}

TEST_CASE("record_death: extinct taxon with extant child is retained") {
  Phylogeny tree;
  const taxon_id p = tree.record_birth(std::nullopt, "A", 0);
  const taxon_id child = tree.record_birth(p, "B", 1);
  tree.record_death(p, 2);
  CHECK(tree.contains(p));
  CHECK(tree.taxon(p).extinction_time == 2);
  CHECK_FALSE(tree.taxon(p).extant());
  CHECK(tree.taxon(child).extant());
}

TEST_CASE("record_death: pruning cascades through extinct ancestors") {
  // chain root -> A -> B; B's last member dies; A already extinct, childless
  // otherwise -> both A and B pruned (root still extant here).
  Phylogeny tree;
  const taxon_id root = tree.record_birth(std::nullopt, "R", 0);
  const taxon_id a = tree.record_birth(root, "A", 1);
  const taxon_id b = tree.record_birth(a, "B", 2);
  tree.record_death(a, 3);
  CHECK(tree.contains(a));
  tree.record_death(b, 4);
  CHECK_FALSE(tree.contains(b));
  CHECK_FALSE(tree.contains(a));
  CHECK(tree.contains(root));
  CHECK(tree.size() == 1);
}

TEST_CASE("record_death: double death is an error") {
  Phylogeny tree;
  const taxon_id p = tree.record_birth(std::nullopt, "A", 0);
  const taxon_id child = tree.record_birth(p, "B", 1);
  tree.record_death(p, 1);
  CHECK_THROWS_AS(tree.record_death(p, 2), std::invalid_argument);
  (void)child;
}

TEST_CASE("pairwise_distance: identity, siblings, star and deep-split trees") {
  Phylogeny tree;
  const taxon_id root = tree.record_birth(std::nullopt, "R", 0);
  const taxon_id a = tree.record_birth(root, "A", 1);
  const taxon_id b = tree.record_birth(root, "B", 1);
  CHECK(tree.pairwise_distance(a, a) == 0);
  CHECK(tree.pairwise_distance(a, b) == 2);
  CHECK(tree.pairwise_distance(a, root) == 1);

  // star of five extant leaves under one root: all pairwise distances 2
  Phylogeny star;
  const taxon_id hub = star.record_birth(std::nullopt, "hub", 0);
  std::vector<taxon_id> leaves;
  for (int i = 0; i < 5; ++i) {
    leaves.push_back(star.record_birth(hub, "leaf" + std::to_string(i), 1));
  }
  star.record_death(hub, 1);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      CHECK(star.pairwise_distance(leaves[i], leaves[j]) == 2);
    }
  }

  // two extant leaves each three edges below the shared root: distance 6
  Phylogeny deep;
  const taxon_id r = deep.record_birth(std::nullopt, "r", 0);
  taxon_id left = r;
  taxon_id right = r;
  for (int d = 1; d <= 3; ++d) {
    left = deep.record_birth(left, "L" + std::to_string(d), d);
    right = deep.record_birth(right, "R" + std::to_string(d), d);
    if (d > 1) {
      deep.record_death(deep.taxon(left).parent.value(), d);
      deep.record_death(deep.taxon(right).parent.value(), d);
    }
  }
  deep.record_death(r, 1);
  CHECK(deep.pairwise_distance(left, right) == 6);
}

TEST_CASE("pairwise_distance: disjoint roots are an API error") {
  Phylogeny tree;
  const taxon_id r1 = tree.record_birth(std::nullopt, "A", 0);
  const taxon_id r2 = tree.record_birth(std::nullopt, "B", 0);
  CHECK_THROWS_AS(tree.pairwise_distance(r1, r2), std::invalid_argument);
  CHECK_THROWS_AS(tree.mrca(r1, r2), std::invalid_argument);
  CHECK_THROWS_AS(tree.pairwise_distance(r1, taxon_id{424242}), std::invalid_argument);
}

TEST_CASE("mrca: identity, ancestor, siblings") {
  Phylogeny tree;
  const taxon_id root = tree.record_birth(std::nullopt, "R", 0);
  const taxon_id a = tree.record_birth(root, "A", 1);
  const taxon_id b = tree.record_birth(root, "B", 1);
  const taxon_id a2 = tree.record_birth(a, "A2", 2);
  CHECK(tree.mrca(a, a) == a);
  CHECK(tree.mrca(a, a2) == a);
  CHECK(tree.mrca(a, b) == root);
  CHECK(tree.mrca(a2, b) == root);
}

TEST_CASE("evolutionary_distinctiveness: frozen hand computations") {
  // single extant taxon, origin 0, no ancestors, at_time 10 -> ED = 10
  Phylogeny solo;
  const taxon_id only = solo.record_birth(std::nullopt, "A", 0);
  CHECK(solo.evolutionary_distinctiveness(only, 10) == doctest::Approx(10.0).epsilon(1e-12));

  // root with two extant children, all born at 0, at_time 10 -> each ED = 10
  Phylogeny pair;
  const taxon_id r = pair.record_birth(std::nullopt, "R", 0);
  const taxon_id a = pair.record_birth(r, "A", 0);
  const taxon_id b = pair.record_birth(r, "B", 0);
  pair.record_death(r, 0);
  CHECK(pair.evolutionary_distinctiveness(a, 10) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(pair.evolutionary_distinctiveness(b, 10) == doctest::Approx(10.0).epsilon(1e-12));

  // root(t=0) with children A and B at t=5, both extant at t=10:
  // ED = pendant 5/1 + shared root branch 5/2 = 7.5
  Phylogeny chain;
  const taxon_id cr = chain.record_birth(std::nullopt, "R", 0);
  const taxon_id ca = chain.record_birth(cr, "A", 5);
  const taxon_id cb = chain.record_birth(cr, "B", 5);
  chain.record_death(cr, 5);
  CHECK(chain.evolutionary_distinctiveness(ca, 10) == doctest::Approx(7.5).epsilon(1e-12));
  CHECK(chain.evolutionary_distinctiveness(cb, 10) == doctest::Approx(7.5).epsilon(1e-12));

  // unbalanced split: children at t=3 and t=5 partition the root's branch
  // into [0,3] shared by both and [3,5] leading only to the later child
  Phylogeny uneven;
  const taxon_id ur = uneven.record_birth(std::nullopt, "R", 0);
  const taxon_id ub = uneven.record_birth(ur, "B", 3);
  const taxon_id ua = uneven.record_birth(ur, "A", 5);
  uneven.record_death(ur, 5);
  CHECK(uneven.evolutionary_distinctiveness(ua, 10) == doctest::Approx(5.0 + 2.0 + 1.5));
  CHECK(uneven.evolutionary_distinctiveness(ub, 10) == doctest::Approx(7.0 + 1.5));

  CHECK_THROWS_AS(uneven.evolutionary_distinctiveness(ur, 10), std::invalid_argument);
}

TEST_CASE("snapshot: empty tree and single taxon") {
  Phylogeny empty;
  std::ostringstream out;
  empty.write_snapshot(out);
  CHECK(out.str() == std::string(Phylogeny::snapshot_header) + "\n");

  Phylogeny one;
  one.record_birth(std::nullopt, "A", 0);
  std::ostringstream out1;
  one.write_snapshot(out1);
  CHECK(out1.str() ==
        std::string(Phylogeny::snapshot_header) + "\n" + "1,[NONE],0,inf,1,A\n");
}

TEST_CASE("snapshot: round-trip preserves topology and distances") {
  Random rng(20240817);
  for (int rep = 0; rep < 20; ++rep) {
    oracles::RandomHistory history;
    history.run_random(rng, 120);

    std::ostringstream out;
    history.tracker.write_snapshot(out);
    std::istringstream in(out.str());
    const Phylogeny reloaded = Phylogeny::load_snapshot(in);

    REQUIRE(reloaded.size() == history.tracker.size());
    REQUIRE(reloaded.extant_count() == history.tracker.extant_count());
    const auto extant = history.tracker.extant_ids();
    for (std::size_t i = 0; i < extant.size(); ++i) {
      for (std::size_t j = i; j < extant.size(); ++j) {
        const bool same_tree = [&] {
          try {
            history.tracker.pairwise_distance(extant[i], extant[j]);
            return true;
          } catch (const std::invalid_argument&) {
            return false;
          }
        }();
        if (same_tree) {
          CHECK(reloaded.pairwise_distance(extant[i], extant[j]) ==
                history.tracker.pairwise_distance(extant[i], extant[j]));
        } else {
          CHECK_THROWS_AS(reloaded.pairwise_distance(extant[i], extant[j]),
                          std::invalid_argument);
        }
      }
    }
    // round-trip again: identical bytes
    std::ostringstream out2;
    reloaded.write_snapshot(out2);
    CHECK(out2.str() == out.str());
  }
}

TEST_CASE("property: random histories match the mirror oracle") {
  Random rng(987654321);
  for (int rep = 0; rep < 60; ++rep) {
    oracles::RandomHistory history;
    history.run_random(rng, 150);
    const auto& tracker = history.tracker;
    const auto& mirror = history.mirror;

    // pruning invariant: retained sets agree
    const auto retained = mirror.retained_indices();
    REQUIRE(tracker.size() == retained.size());
    for (const int idx : retained) {
      CHECK(tracker.contains(mirror.nodes[idx].tracker_id));
    }

    // extant bookkeeping
    REQUIRE(tracker.extant_count() == mirror.extant_indices().size());
    CHECK(tracker.living_organisms() == history.organisms.size());

    // distances match BFS on the explicit graph, and are symmetric
    const auto extant = mirror.extant_indices();
    for (std::size_t i = 0; i < extant.size(); ++i) {
      for (std::size_t j = i; j < extant.size(); ++j) {
        const taxon_id ta = mirror.nodes[extant[i]].tracker_id;
        const taxon_id tb = mirror.nodes[extant[j]].tracker_id;
        const auto expected = mirror.bfs_distance(extant[i], extant[j]);
        if (expected) {
          const auto d = tracker.pairwise_distance(ta, tb);
          CHECK(d == *expected);
          CHECK(tracker.pairwise_distance(tb, ta) == d);
          if (i == j) CHECK(d == 0);
        } else {
          CHECK_THROWS_AS(tracker.pairwise_distance(ta, tb), std::invalid_argument);
        }
      }
    }

    // triangle inequality on a few sampled triples
    if (extant.size() >= 3) {
      for (int t = 0; t < 20; ++t) {
        const int x = extant[rng.index(extant.size())];
        const int y = extant[rng.index(extant.size())];
        const int z = extant[rng.index(extant.size())];
        const auto dxy = mirror.bfs_distance(x, y);
        const auto dyz = mirror.bfs_distance(y, z);
        const auto dxz = mirror.bfs_distance(x, z);
        if (dxy && dyz && dxz) {
          const taxon_id tx = mirror.nodes[x].tracker_id;
          const taxon_id ty = mirror.nodes[y].tracker_id;
          const taxon_id tz = mirror.nodes[z].tracker_id;
          CHECK(tracker.pairwise_distance(tx, tz) <=
                tracker.pairwise_distance(tx, ty) + tracker.pairwise_distance(ty, tz));
        }
      }
    }

    // fair-proportion conservation: sum of ED over extant taxa equals the
    // total branch age of the induced tree
    const std::uint64_t at_time = history.time + 1;
    double ed_sum = 0.0;
    for (const int idx : extant) {
      ed_sum += tracker.evolutionary_distinctiveness(mirror.nodes[idx].tracker_id, at_time);
    }
    CHECK(std::abs(ed_sum - mirror.total_branch_age(at_time)) < 1e-9);
  }
}

TEST_CASE("property: pruning is transparent to distances and ED of extant taxa") {
  // The pruned tracker must agree with oracles computed on the unpruned
  // mirror tree: removing dead-end lineages never shifts a metric.
  Random rng(13579);
  for (int rep = 0; rep < 25; ++rep) {
    oracles::RandomHistory history;
    history.run_random(rng, 140);
    const auto& tracker = history.tracker;
    const auto& mirror = history.mirror;
    const std::uint64_t at_time = history.time + 3;

    const auto extant = mirror.extant_indices();
    for (const int idx : extant) {
      const taxon_id tid = mirror.nodes[idx].tracker_id;
      CHECK(tracker.evolutionary_distinctiveness(tid, at_time) ==
            doctest::Approx(oracles::mirror_ed(mirror, idx, at_time)).epsilon(1e-12));
    }
  }
}
