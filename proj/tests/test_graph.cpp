#include "doctest.h"

#include <functional>
#include <set>

#include "qbn/graph.hpp"
#include "qbn/harness.hpp"
#include "qbn/rng.hpp"

using namespace qbn;

namespace {

// Paper's diamond: arrows 1->2, 1->3, 2->4, 3->4 (zero-based here).
Dag diamond_dag() {
  return Dag(random_binary_space(4), {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
}

Ug diamond_ug() {
  return Ug(random_binary_space(4), {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
}

// Subset-enumeration oracle for maximal fully-connected sets, independent of
// the Bron-Kerbosch implementation.
std::vector<IndexSet> brute_super_cliques(int n, const std::function<bool(int, int)>& linked) {
  auto fully_connected = [&](const IndexSet& s) {
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b)
        if (!linked(s[a], s[b])) return false;
    return true;
  };
  std::vector<IndexSet> cliques;
  for (std::size_t mask = 1; mask < (std::size_t(1) << n); ++mask) {
    IndexSet s;
    for (int v = 0; v < n; ++v)
      if (mask & (std::size_t(1) << v)) s.push_back(v);
    if (fully_connected(s)) cliques.push_back(s);
  }
  std::vector<IndexSet> maximal;
  for (const IndexSet& s : cliques) {
    bool contained = false;
    for (const IndexSet& t : cliques)
      if (s != t && is_subset(s, t)) contained = true;
    if (!contained) maximal.push_back(s);
  }
  std::sort(maximal.begin(), maximal.end());
  return maximal;
}

// Reachability through the transitive closure of the boolean adjacency matrix.
IndexSet matrix_power_closure(const Dag& g, int j, bool forward) {
  int n = g.node_count();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (auto [p, c] : g.arrows()) {
    if (forward) reach[p][c] = 1;
    else reach[c][p] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (reach[a][k] && reach[k][b]) reach[a][b] = 1;
  IndexSet out;
  for (int v = 0; v < n; ++v)
    if (reach[j][v]) out.push_back(v);
  return out;
}

}  // namespace

TEST_CASE("build_dag validates structure") {
  CHECK_NOTHROW(diamond_dag());
  CHECK_NOTHROW(Dag(random_binary_space(3), {}));
  CHECK_THROWS_AS(Dag(random_binary_space(3), {{0, 1}, {1, 0}}), Error);
  try {
    Dag(random_binary_space(3), {{0, 1}, {1, 2}, {2, 0}});
    FAIL("cycle not detected");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CycleDetected);
  }
  try {
    Dag(random_binary_space(3), {{1, 1}});
    FAIL("self edge not detected");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SelfEdge);
  }
  try {
    Dag(random_binary_space(3), {{0, 7}});
    FAIL("range not checked");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IndexOutOfRange);
  }
  // duplicates collapse silently
  CHECK(Dag(random_binary_space(3), {{0, 1}, {0, 1}}).arrows().size() == 1);
}

TEST_CASE("relatives matches the paper's diamond") {
  Dag g = diamond_dag();
  RelativeSets r3 = relatives(g, 3);
  CHECK(r3.pa == IndexSet{1, 2});  // pa(4) = {2,3} in the paper's 1-based labels
  RelativeSets r0 = relatives(g, 0);
  CHECK(r0.ch == IndexSet{1, 2});  // ch(1) = {2,3}
  CHECK(r0.de == IndexSet{1, 2, 3});
  CHECK(r0.neg_de == IndexSet{});
  CHECK(r3.an == IndexSet{0, 1, 2});
  CHECK(r3.de_bar == IndexSet{3});

  Dag edgeless(random_binary_space(3), {});
  RelativeSets r = relatives(edgeless, 0);
  CHECK(r.pa.empty());
  CHECK(r.de.empty());
  CHECK(r.neg_de == IndexSet{1, 2});
  CHECK_THROWS_AS(relatives(edgeless, 5), Error);
}

TEST_CASE("relatives an/de agree with matrix-power reachability") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    Dag g = random_dag(random_binary_space(2 + int(rng.index(5))), rng);
    for (int j = 0; j < g.node_count(); ++j) {
      RelativeSets r = relatives(g, j);
      CHECK(r.de == matrix_power_closure(g, j, true));
      CHECK(r.an == matrix_power_closure(g, j, false));
    }
  }
}

TEST_CASE("neighbors") {
  Ug g = diamond_ug();
  CHECK(g.neighbors(1) == IndexSet{0, 3});  // ne(2) = {1,4} in 1-based labels
  Ug iso(random_binary_space(3), {{0, 1}});
  CHECK(iso.neighbors(2).empty());
  Ug complete(random_binary_space(4), {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  for (int j = 0; j < 4; ++j) CHECK(complete.neighbors(j).size() == 3);
  CHECK_THROWS_AS(iso.neighbors(9), Error);
  // symmetry
  for (int a = 0; a < 4; ++a)
    for (int b : g.neighbors(a)) CHECK(set_contains(g.neighbors(b), a));
}

TEST_CASE("super_cliques of both diamonds match the paper") {
  std::vector<IndexSet> want = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  CHECK(super_cliques(diamond_dag()) == want);
  CHECK(super_cliques(diamond_ug()) == want);

  Ug complete(random_binary_space(3), {{0, 1}, {0, 2}, {1, 2}});
  CHECK(super_cliques(complete) == std::vector<IndexSet>{{0, 1, 2}});
  Ug edgeless(random_binary_space(3), {});
  CHECK(super_cliques(edgeless) == std::vector<IndexSet>{{0}, {1}, {2}});
}

TEST_CASE("super_cliques equals the subset-enumeration oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + int(rng.index(5));
    Ug g = random_ug(random_binary_space(n), rng);
    auto got = super_cliques(g);
    auto want = brute_super_cliques(n, [&](int a, int b) { return g.has_link(a, b); });
    CHECK(got == want);

    // coverage invariants: every link inside some clique, union = node set
    std::set<int> covered;
    for (const IndexSet& c : got)
      for (int v : c) covered.insert(v);
    CHECK(int(covered.size()) == n);
    for (auto [a, b] : g.links()) {
      bool inside = false;
      for (const IndexSet& c : got)
        if (set_contains(c, a) && set_contains(c, b)) inside = true;
      CHECK(inside);
    }
  }
}

TEST_CASE("d-separation on the Fig. 3 shapes") {
  // chain x -> a -> y
  Dag chain(random_binary_space(3), {{0, 1}, {1, 2}});
  CHECK_FALSE(d_separated_dag(chain, Independency::make({0}, {2}, {})));
  CHECK(d_separated_dag(chain, Independency::make({0}, {2}, {1})));

  // collider x -> a <- y
  Dag collider(random_binary_space(3), {{0, 1}, {2, 1}});
  CHECK(d_separated_dag(collider, Independency::make({0}, {2}, {})));
  CHECK_FALSE(d_separated_dag(collider, Independency::make({0}, {2}, {1})));

  // collider descendant: x -> b <- y, b -> a; conditioning on a unblocks
  Dag desc(random_binary_space(4), {{0, 1}, {2, 1}, {1, 3}});
  CHECK_FALSE(d_separated_dag(desc, Independency::make({0}, {2}, {3})));
  CHECK(d_separated_dag(desc, Independency::make({0}, {2}, {})));
}

TEST_CASE("d-separation validates inputs") {
  Dag g = diamond_dag();
  CHECK_THROWS_AS(d_separated_dag(g, Independency{{0}, {0}, {}}), Error);
  CHECK_THROWS_AS(d_separated_dag(g, Independency{{0}, {9}, {}}), Error);
}

TEST_CASE("reachability equals the path oracle on every small DAG") {
  // exhaustive over all labeled DAGs on 3 and 4 nodes
  for (int n : {3, 4}) {
    SpacePtr space = random_binary_space(n);
    for (const Dag& g : enumerate_all_dags(space))
      for (const Independency& i : enumerate_triples(n))
        CHECK(d_separated_dag(g, i) == d_separated_dag_paths(g, i));
  }
  // random 5..7 node DAGs
  Rng rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 5 + int(rng.index(3));
    Dag g = random_dag(random_binary_space(n), rng);
    for (const Independency& i : enumerate_triples(n))
      CHECK(d_separated_dag(g, i) == d_separated_dag_paths(g, i));
  }
}

TEST_CASE("UG separation equals cut connectivity and the path oracle") {
  Ug path(random_binary_space(3), {{0, 1}, {1, 2}});
  CHECK(separated_ug(path, Independency::make({0}, {2}, {1})));
  CHECK_FALSE(separated_ug(path, Independency::make({0}, {2}, {})));
  CHECK(separated_ug(diamond_ug(), Independency::make({0}, {3}, {1, 2})));

  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + int(rng.index(5));
    Ug g = random_ug(random_binary_space(n), rng);
    for (const Independency& i : enumerate_triples(n))
      CHECK(separated_ug(g, i) == separated_ug_paths(g, i));
  }
}

TEST_CASE("graphic I-sets") {
  Dag g = diamond_dag();
  ISet loc = graphic_iset(g, GraphIsetKind::Loc);
  // paper: { (x3 _|_ x2 | x1), (x4 _|_ x1 | x2,x3) }
  ISet want = {Independency::make({0}, {3}, {1, 2}), Independency::make({1}, {2}, {0})};
  std::sort(want.begin(), want.end());
  CHECK(loc == want);

  Ug complete(random_binary_space(3), {{0, 1}, {0, 2}, {1, 2}});
  CHECK(graphic_iset(complete, GraphIsetKind::Pair).empty());
  Ug two(random_binary_space(2), {});
  CHECK(graphic_iset(two, GraphIsetKind::Pair) == ISet{Independency::make({0}, {1}, {})});

  CHECK_THROWS_AS(graphic_iset(g, GraphIsetKind::Pair), Error);

  // glo members all pass the separation predicate
  for (const Independency& i : graphic_iset(g, GraphIsetKind::Glo))
    CHECK(d_separated_dag(g, i));
}

TEST_CASE("global enumeration is guarded") {
  Config cfg;
  cfg.enumeration_limit = 3;
  Dag g = diamond_dag();
  try {
    graphic_iset(g, GraphIsetKind::Glo, cfg);
    FAIL("limit not enforced");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GraphTooLargeForGlobalEnumeration);
  }
}

TEST_CASE("d_glo membership and decomposition consistency") {
  Dag chain(random_binary_space(3), {{0, 1}, {1, 2}});
  auto pairs = d_glo(chain);
  bool has_xy = false;
  for (const auto& [j, k] : pairs)
    if (j == IndexSet{0} && k == IndexSet{2}) has_xy = true;
  CHECK(has_xy);

  Dag collider(random_binary_space(3), {{0, 1}, {2, 1}});
  for (const auto& [j, k] : d_glo(collider))
    CHECK_FALSE((j == IndexSet{0} && k == IndexSet{2}));

  Dag edge(random_binary_space(2), {{0, 1}});
  CHECK(d_glo(edge).empty());

  // (J, K1+K2) in D_glo iff both parts are; graphically literal
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 3 + int(rng.index(3));
    Dag g = random_dag(random_binary_space(n), rng);
    std::size_t total = 1;
    for (int v = 0; v < n; ++v) total *= 4;
    for (std::size_t code = 0; code < total; ++code) {
      IndexSet j, k1, k2;
      std::size_t c = code;
      for (int v = 0; v < n; ++v) {
        switch (c % 4) {
          case 0: j.push_back(v); break;
          case 1: k1.push_back(v); break;
          case 2: k2.push_back(v); break;
          default: break;
        }
        c /= 4;
      }
      if (j.empty() || k1.empty() || k2.empty()) continue;
      bool whole = d_glo_contains(g, j, set_union(k1, k2));
      bool parts = d_glo_contains(g, j, k1) && d_glo_contains(g, j, k2);
      CHECK(whole == parts);
    }
  }
}

TEST_CASE("independency normalization") {
  // overlap with E is stripped; J/K are ordered by smallest index
  Independency i = Independency::make({3, 1}, {0, 2}, {2, 3});
  CHECK(i.j_set == IndexSet{0});
  CHECK(i.k_set == IndexSet{1});
  CHECK(i.e_set == IndexSet{2, 3});
  CHECK_THROWS_AS(Independency::make({0, 1}, {1, 2}, {}), Error);
  CHECK(Independency::make({0}, {1}, {}).all_encompassing(2));
  CHECK_FALSE(Independency::make({0}, {1}, {}).all_encompassing(3));
}
