#pragma once

#include <utility>
#include <vector>

#include "qbn/config.hpp"
#include "qbn/variable_space.hpp"

namespace qbn {

// Triple (J perp K | E) of disjoint variable-index sets. Construction
// normalizes: overlap of J or K with E is stripped, and J/K are ordered so
// that J's smallest index comes first (the relation is symmetric in J, K).
struct Independency {
  IndexSet j_set, k_set, e_set;

  static Independency make(IndexSet j, IndexSet k, IndexSet e);
  bool all_encompassing(int n) const {
    return int(j_set.size() + k_set.size() + e_set.size()) == n;
  }
  bool operator==(const Independency& o) const = default;
  bool operator<(const Independency& o) const;
};

using ISet = std::vector<Independency>;  // canonical ascending order

struct RelativeSets {
  IndexSet pa, ch, an, de, neg_de, neg_an;
  IndexSet pa_bar, ch_bar, an_bar, de_bar, neg_de_bar, neg_an_bar;  // s + {j}
};

class Dag {
 public:
  Dag(SpacePtr space, const std::vector<std::pair<int, int>>& arrows);

  const VariableSpace& space() const { return *space_; }
  SpacePtr space_ptr() const { return space_; }
  int node_count() const { return space_->size(); }
  const std::vector<std::pair<int, int>>& arrows() const { return arrows_; }
  const IndexSet& parents(int j) const;
  const IndexSet& children(int j) const;
  bool has_arrow(int from, int to) const;

  // Any order with parents before children.
  std::vector<int> topological_order() const;

 private:
  SpacePtr space_;
  std::vector<std::pair<int, int>> arrows_;
  std::vector<IndexSet> parents_, children_;
};

class Ug {
 public:
  Ug(SpacePtr space, const std::vector<std::pair<int, int>>& links);

  const VariableSpace& space() const { return *space_; }
  SpacePtr space_ptr() const { return space_; }
  int node_count() const { return space_->size(); }
  const std::vector<std::pair<int, int>>& links() const { return links_; }
  const IndexSet& neighbors(int j) const;
  bool has_link(int a, int b) const;

 private:
  SpacePtr space_;
  std::vector<std::pair<int, int>> links_;  // stored with first < second
  std::vector<IndexSet> neighbors_;
};

RelativeSets relatives(const Dag& dag, int j);
IndexSet neighbors(const Ug& ug, int j);

// Maximal fully-connected node sets; for a DAG arrow orientation is ignored.
std::vector<IndexSet> super_cliques(const Dag& g);
std::vector<IndexSet> super_cliques(const Ug& g);

// Linear-time reachability test (Bayes-ball style over (node, direction)
// states). Agrees with the exhaustive path oracle below.
bool d_separated_dag(const Dag& dag, const Independency& i);
bool separated_ug(const Ug& ug, const Independency& i);

// Path-enumeration witnesses: every path from J to K must be blocked.
// Exponential; retained for small graphs as the correctness oracle.
bool d_separated_dag_paths(const Dag& dag, const Independency& i);
bool separated_ug_paths(const Ug& ug, const Independency& i);

enum class GraphIsetKind { Loc, Pair, Glo };

ISet graphic_iset(const Dag& g, GraphIsetKind kind, const Config& cfg = default_config());
ISet graphic_iset(const Ug& g, GraphIsetKind kind, const Config& cfg = default_config());

// All disjoint nonempty (J, K) with tau_sep(J perp K | all - J - K), i.e. the
// graphically-certified unentangled pairs. Canonical: min(J) < min(K).
std::vector<std::pair<IndexSet, IndexSet>> d_glo(const Dag& g, const Config& cfg = default_config());
std::vector<std::pair<IndexSet, IndexSet>> d_glo(const Ug& g, const Config& cfg = default_config());

// Membership tests that avoid full enumeration.
bool d_glo_contains(const Dag& g, const IndexSet& j, const IndexSet& k);
bool d_glo_contains(const Ug& g, const IndexSet& j, const IndexSet& k);

// Enumerate all disjoint triples (J, K, E) over n nodes, J and K nonempty,
// canonicalized. Shared by graphic and probabilistic I-set construction.
std::vector<Independency> enumerate_triples(int n, const Config& cfg = default_config());

}  // namespace qbn
