#include "qbn/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <functional>
#include <set>

namespace qbn {

Independency Independency::make(IndexSet j, IndexSet k, IndexSet e) {
  j = sorted_unique(std::move(j));
  k = sorted_unique(std::move(k));
  e = sorted_unique(std::move(e));
  j = set_minus(j, e);
  k = set_minus(k, e);
  if (!sets_disjoint(j, k)) fail(Errc::SetsNotDisjoint, "J and K overlap");
  if (j.empty() || k.empty()) fail(Errc::ValidationError, "independency needs nonempty J and K");
  if (j.front() > k.front()) std::swap(j, k);
  return Independency{std::move(j), std::move(k), std::move(e)};
}

bool Independency::operator<(const Independency& o) const {
  if (j_set != o.j_set) return j_set < o.j_set;
  if (k_set != o.k_set) return k_set < o.k_set;
  return e_set < o.e_set;
}

namespace {

std::vector<std::pair<int, int>> dedupe_edges(const VariableSpace& space,
                                              std::vector<std::pair<int, int>> edges,
                                              bool undirected) {
  for (auto& [a, b] : edges) {
    if (a < 0 || a >= space.size() || b < 0 || b >= space.size())
      fail(Errc::IndexOutOfRange, "edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    if (a == b) fail(Errc::SelfEdge, "node " + std::to_string(a));
    if (undirected && a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// DFS that returns one directed cycle for the error message.
std::vector<int> find_cycle(const std::vector<IndexSet>& children, int n) {
  std::vector<int> color(std::size_t(n), 0), stack;
  std::vector<int> cycle;
  std::function<bool(int)> dfs = [&](int v) {
    color[std::size_t(v)] = 1;
    stack.push_back(v);
    for (int c : children[std::size_t(v)]) {
      if (color[std::size_t(c)] == 1) {
        auto it = std::find(stack.begin(), stack.end(), c);
        cycle.assign(it, stack.end());
        cycle.push_back(c);
        return true;
      }
      if (color[std::size_t(c)] == 0 && dfs(c)) return true;
    }
    stack.pop_back();
    color[std::size_t(v)] = 2;
    return false;
  };
  for (int v = 0; v < n; ++v)
    if (color[std::size_t(v)] == 0 && dfs(v)) return cycle;
  return {};
}

std::string cycle_string(const std::vector<int>& cycle) {
  std::string s;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (i) s += " -> ";
    s += std::to_string(cycle[i]);
  }
  return s;
}

IndexSet closure_from(const std::vector<IndexSet>& step, IndexSet frontier) {
  IndexSet out;
  std::deque<int> q(frontier.begin(), frontier.end());
  std::set<int> seen(frontier.begin(), frontier.end());
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int w : step[std::size_t(v)])
      if (seen.insert(w).second) q.push_back(w);
  }
  out.assign(seen.begin(), seen.end());
  return out;
}

}  // namespace

Dag::Dag(SpacePtr space, const std::vector<std::pair<int, int>>& arrows) : space_(std::move(space)) {
  arrows_ = dedupe_edges(*space_, arrows, false);
  int n = space_->size();
  parents_.assign(std::size_t(n), {});
  children_.assign(std::size_t(n), {});
  for (auto [p, c] : arrows_) {
    parents_[std::size_t(c)].push_back(p);
    children_[std::size_t(p)].push_back(c);
  }
  for (auto& v : parents_) std::sort(v.begin(), v.end());
  for (auto& v : children_) std::sort(v.begin(), v.end());
  auto cycle = find_cycle(children_, n);
  if (!cycle.empty()) fail(Errc::CycleDetected, cycle_string(cycle));
}

const IndexSet& Dag::parents(int j) const {
  space_->var(j);  // range check
  return parents_[std::size_t(j)];
}

const IndexSet& Dag::children(int j) const {
  space_->var(j);
  return children_[std::size_t(j)];
}

bool Dag::has_arrow(int from, int to) const {
  return std::binary_search(children(from).begin(), children(from).end(), to);
}

std::vector<int> Dag::topological_order() const {
  int n = node_count();
  std::vector<int> indeg(std::size_t(n), 0), order;
  for (int v = 0; v < n; ++v) indeg[std::size_t(v)] = int(parents_[std::size_t(v)].size());
  std::deque<int> q;
  for (int v = 0; v < n; ++v)
    if (indeg[std::size_t(v)] == 0) q.push_back(v);
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    order.push_back(v);
    for (int c : children_[std::size_t(v)])
      if (--indeg[std::size_t(c)] == 0) q.push_back(c);
  }
  return order;
}

Ug::Ug(SpacePtr space, const std::vector<std::pair<int, int>>& links) : space_(std::move(space)) {
  links_ = dedupe_edges(*space_, links, true);
  neighbors_.assign(std::size_t(space_->size()), {});
  for (auto [a, b] : links_) {
    neighbors_[std::size_t(a)].push_back(b);
    neighbors_[std::size_t(b)].push_back(a);
  }
  for (auto& v : neighbors_) std::sort(v.begin(), v.end());
}

const IndexSet& Ug::neighbors(int j) const {
  space_->var(j);
  return neighbors_[std::size_t(j)];
}

bool Ug::has_link(int a, int b) const {
  return std::binary_search(neighbors(a).begin(), neighbors(a).end(), b);
}

RelativeSets relatives(const Dag& dag, int j) {
  dag.space().var(j);
  int n = dag.node_count();
  RelativeSets r;
  std::vector<IndexSet> pa(static_cast<std::size_t>(n)), ch(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    pa[std::size_t(v)] = dag.parents(v);
    ch[std::size_t(v)] = dag.children(v);
  }
  r.pa = dag.parents(j);
  r.ch = dag.children(j);
  r.an = closure_from(pa, r.pa);
  r.de = closure_from(ch, r.ch);
  IndexSet self{j};
  IndexSet all = dag.space().all_indices();
  r.neg_de = set_minus(set_minus(all, r.de), self);
  r.neg_an = set_minus(set_minus(all, r.an), self);
  r.pa_bar = set_union(r.pa, self);
  r.ch_bar = set_union(r.ch, self);
  r.an_bar = set_union(r.an, self);
  r.de_bar = set_union(r.de, self);
  r.neg_de_bar = set_union(r.neg_de, self);
  r.neg_an_bar = set_union(r.neg_an, self);
  return r;
}

IndexSet neighbors(const Ug& ug, int j) { return ug.neighbors(j); }

namespace {

// Bron-Kerbosch over an adjacency-set view; fine at desk scale.
void bron_kerbosch(const std::vector<IndexSet>& adj, IndexSet r, IndexSet p, IndexSet x,
                   std::vector<IndexSet>& out) {
  if (p.empty() && x.empty()) {
    out.push_back(r);
    return;
  }
  IndexSet p_copy = p;
  for (int v : p_copy) {
    IndexSet rv = set_union(r, {v});
    bron_kerbosch(adj, rv, set_intersect(p, adj[std::size_t(v)]),
                  set_intersect(x, adj[std::size_t(v)]), out);
    p = set_minus(p, {v});
    x = set_union(x, {v});
  }
}

std::vector<IndexSet> super_cliques_adj(const std::vector<IndexSet>& adj, int n) {
  std::vector<IndexSet> out;
  IndexSet p(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) p[std::size_t(v)] = v;
  bron_kerbosch(adj, {}, p, {}, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<IndexSet> super_cliques(const Dag& g) {
  std::vector<IndexSet> adj(static_cast<std::size_t>(g.node_count()));
  for (int v = 0; v < g.node_count(); ++v)
    adj[std::size_t(v)] = set_union(g.parents(v), g.children(v));
  return super_cliques_adj(adj, g.node_count());
}

std::vector<IndexSet> super_cliques(const Ug& g) {
  std::vector<IndexSet> adj(static_cast<std::size_t>(g.node_count()));
  for (int v = 0; v < g.node_count(); ++v) adj[std::size_t(v)] = g.neighbors(v);
  return super_cliques_adj(adj, g.node_count());
}

namespace {

void check_independency_range(const VariableSpace& space, const Independency& i) {
  check_in_range(space, i.j_set, "J");
  check_in_range(space, i.k_set, "K");
  check_in_range(space, i.e_set, "E");
  if (!sets_disjoint(i.j_set, i.k_set) || !sets_disjoint(i.j_set, i.e_set) ||
      !sets_disjoint(i.k_set, i.e_set))
    fail(Errc::SetsNotDisjoint, "independency sets overlap");
}

}  // namespace

bool d_separated_dag(const Dag& dag, const Independency& i) {
  check_independency_range(dag.space(), i);
  int n = dag.node_count();
  std::vector<char> in_e(std::size_t(n), 0), in_k(std::size_t(n), 0);
  for (int v : i.e_set) in_e[std::size_t(v)] = 1;
  for (int v : i.k_set) in_k[std::size_t(v)] = 1;

  // an_e[v]: v is in E or has a descendant in E.
  std::vector<IndexSet> pa(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) pa[std::size_t(v)] = dag.parents(v);
  IndexSet an_e_set = closure_from(pa, i.e_set);
  an_e_set = set_union(an_e_set, i.e_set);
  std::vector<char> an_e(std::size_t(n), 0);
  for (int v : an_e_set) an_e[std::size_t(v)] = 1;

  // Traverse (node, direction) states; direction records whether the trail
  // enters the node from a child (up) or from a parent (down).
  enum { kUp = 0, kDown = 1 };
  std::vector<std::array<char, 2>> visited(std::size_t(n), {0, 0});
  std::deque<std::pair<int, int>> queue;
  for (int j : i.j_set) queue.emplace_back(j, kUp);
  while (!queue.empty()) {
    auto [v, dir] = queue.front();
    queue.pop_front();
    if (visited[std::size_t(v)][std::size_t(dir)]) continue;
    visited[std::size_t(v)][std::size_t(dir)] = 1;
    if (!in_e[std::size_t(v)] && in_k[std::size_t(v)]) return false;
    if (dir == kUp && !in_e[std::size_t(v)]) {
      for (int p : dag.parents(v)) queue.emplace_back(p, kUp);
      for (int c : dag.children(v)) queue.emplace_back(c, kDown);
    } else if (dir == kDown) {
      if (!in_e[std::size_t(v)])
        for (int c : dag.children(v)) queue.emplace_back(c, kDown);
      if (an_e[std::size_t(v)])
        for (int p : dag.parents(v)) queue.emplace_back(p, kUp);
    }
  }
  return true;
}

bool separated_ug(const Ug& ug, const Independency& i) {
  check_independency_range(ug.space(), i);
  int n = ug.node_count();
  std::vector<char> blocked(std::size_t(n), 0), seen(std::size_t(n), 0);
  for (int v : i.e_set) blocked[std::size_t(v)] = 1;
  std::deque<int> q;
  for (int v : i.j_set)
    if (!blocked[std::size_t(v)]) {
      q.push_back(v);
      seen[std::size_t(v)] = 1;
    }
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    if (set_contains(i.k_set, v)) return false;
    for (int w : ug.neighbors(v))
      if (!seen[std::size_t(w)] && !blocked[std::size_t(w)]) {
        seen[std::size_t(w)] = 1;
        q.push_back(w);
      }
  }
  return true;
}

namespace {

// Enumerates simple paths between endpoint sets over an adjacency view,
// calling `blocked` with the node sequence. Returns true when every path is
// blocked.
bool all_paths_blocked(const std::vector<IndexSet>& adj, const IndexSet& from, const IndexSet& to,
                       const std::function<bool(const std::vector<int>&)>& blocked) {
  std::size_t n = adj.size();
  std::vector<char> used(n, 0);
  std::vector<int> path;
  bool ok = true;
  std::function<void(int)> dfs = [&](int v) {
    if (!ok) return;
    path.push_back(v);
    used[std::size_t(v)] = 1;
    if (path.size() > 1 && set_contains(to, v)) {
      if (!blocked(path)) ok = false;
    } else {
      for (int w : adj[std::size_t(v)])
        if (!used[std::size_t(w)]) dfs(w);
    }
    used[std::size_t(v)] = 0;
    path.pop_back();
  };
  for (int s : from) {
    if (!ok) break;
    dfs(s);
  }
  return ok;
}

}  // namespace

bool d_separated_dag_paths(const Dag& dag, const Independency& i) {
  check_independency_range(dag.space(), i);
  int n = dag.node_count();
  std::vector<IndexSet> adj(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) adj[std::size_t(v)] = set_union(dag.parents(v), dag.children(v));

  std::vector<IndexSet> ch(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) ch[std::size_t(v)] = dag.children(v);

  auto path_blocked = [&](const std::vector<int>& path) {
    for (std::size_t t = 1; t + 1 < path.size(); ++t) {
      int prev = path[t - 1], v = path[t], next = path[t + 1];
      bool collider = dag.has_arrow(prev, v) && dag.has_arrow(next, v);
      if (!collider && set_contains(i.e_set, v)) return true;
      if (collider) {
        IndexSet de_bar = closure_from(ch, {v});
        de_bar = set_union(de_bar, {v});
        if (set_intersect(de_bar, i.e_set).empty()) return true;
      }
    }
    return false;
  };
  return all_paths_blocked(adj, i.j_set, i.k_set, path_blocked);
}

bool separated_ug_paths(const Ug& ug, const Independency& i) {
  check_independency_range(ug.space(), i);
  std::vector<IndexSet> adj(static_cast<std::size_t>(ug.node_count()));
  for (int v = 0; v < ug.node_count(); ++v) adj[std::size_t(v)] = ug.neighbors(v);
  auto path_blocked = [&](const std::vector<int>& path) {
    for (int v : path)
      if (set_contains(i.e_set, v)) return true;
    return false;
  };
  return all_paths_blocked(adj, i.j_set, i.k_set, path_blocked);
}

std::vector<Independency> enumerate_triples(int n, const Config& cfg) {
  if (n > cfg.enumeration_limit)
    fail(Errc::GraphTooLargeForGlobalEnumeration,
         std::to_string(n) + " nodes exceeds limit " + std::to_string(cfg.enumeration_limit));
  std::vector<Independency> out;
  std::size_t total = 1;
  for (int v = 0; v < n; ++v) total *= 4;  // J / K / E / out
  for (std::size_t code = 0; code < total; ++code) {
    IndexSet j, k, e;
    std::size_t c = code;
    for (int v = 0; v < n; ++v) {
      switch (c % 4) {
        case 0: j.push_back(v); break;
        case 1: k.push_back(v); break;
        case 2: e.push_back(v); break;
        default: break;
      }
      c /= 4;
    }
    if (j.empty() || k.empty()) continue;
    if (j.front() > k.front()) continue;  // canonical representative only
    out.push_back(Independency{j, k, e});
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

template <typename G, typename SepFn>
ISet graphic_glo(const G& g, SepFn sep, const Config& cfg) {
  ISet out;
  for (const Independency& i : enumerate_triples(g.node_count(), cfg))
    if (sep(g, i)) out.push_back(i);
  return out;
}

ISet canonicalize(ISet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

template <typename G, typename SepFn>
std::vector<std::pair<IndexSet, IndexSet>> d_glo_impl(const G& g, SepFn sep, const Config& cfg) {
  int n = g.node_count();
  if (n > cfg.enumeration_limit)
    fail(Errc::GraphTooLargeForGlobalEnumeration,
         std::to_string(n) + " nodes exceeds limit " + std::to_string(cfg.enumeration_limit));
  std::vector<std::pair<IndexSet, IndexSet>> out;
  std::size_t total = 1;
  for (int v = 0; v < n; ++v) total *= 3;  // J / K / out
  IndexSet all = g.space().all_indices();
  for (std::size_t code = 0; code < total; ++code) {
    IndexSet j, k;
    std::size_t c = code;
    for (int v = 0; v < n; ++v) {
      switch (c % 3) {
        case 0: j.push_back(v); break;
        case 1: k.push_back(v); break;
        default: break;
      }
      c /= 3;
    }
    if (j.empty() || k.empty() || j.front() > k.front()) continue;
    IndexSet e = set_minus(set_minus(all, j), k);
    if (sep(g, Independency{j, k, e})) out.emplace_back(j, k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ISet graphic_iset(const Dag& g, GraphIsetKind kind, const Config& cfg) {
  switch (kind) {
    case GraphIsetKind::Loc: {
      ISet out;
      for (int j = 0; j < g.node_count(); ++j) {
        RelativeSets r = relatives(g, j);
        IndexSet k = set_minus(r.neg_de, r.pa);
        if (k.empty()) continue;
        out.push_back(Independency::make({j}, k, r.pa));
      }
      return canonicalize(std::move(out));
    }
    case GraphIsetKind::Pair:
      fail(Errc::InvalidKind, "pairwise I-set is defined for undirected graphs only");
    case GraphIsetKind::Glo:
      return graphic_glo(g, [](const Dag& d, const Independency& i) { return d_separated_dag(d, i); }, cfg);
  }
  fail(Errc::InvalidKind, "unknown I-set kind");
}

ISet graphic_iset(const Ug& g, GraphIsetKind kind, const Config& cfg) {
  IndexSet all = g.space().all_indices();
  switch (kind) {
    case GraphIsetKind::Loc: {
      ISet out;
      for (int j = 0; j < g.node_count(); ++j) {
        IndexSet ne = g.neighbors(j);
        IndexSet k = set_minus(set_minus(all, ne), IndexSet{j});
        if (k.empty()) continue;
        out.push_back(Independency::make({j}, k, ne));
      }
      return canonicalize(std::move(out));
    }
    case GraphIsetKind::Pair: {
      ISet out;
      for (int a = 0; a < g.node_count(); ++a)
        for (int b = a + 1; b < g.node_count(); ++b) {
          if (g.has_link(a, b)) continue;
          IndexSet e = set_minus(all, IndexSet{a, b});
          out.push_back(Independency::make({a}, {b}, e));
        }
      return canonicalize(std::move(out));
    }
    case GraphIsetKind::Glo:
      return graphic_glo(g, [](const Ug& u, const Independency& i) { return separated_ug(u, i); }, cfg);
  }
  fail(Errc::InvalidKind, "unknown I-set kind");
}

std::vector<std::pair<IndexSet, IndexSet>> d_glo(const Dag& g, const Config& cfg) {
  return d_glo_impl(g, [](const Dag& d, const Independency& i) { return d_separated_dag(d, i); }, cfg);
}

std::vector<std::pair<IndexSet, IndexSet>> d_glo(const Ug& g, const Config& cfg) {
  return d_glo_impl(g, [](const Ug& u, const Independency& i) { return separated_ug(u, i); }, cfg);
}

bool d_glo_contains(const Dag& g, const IndexSet& j, const IndexSet& k) {
  IndexSet e = set_minus(set_minus(g.space().all_indices(), j), k);
  return d_separated_dag(g, Independency::make(j, k, e));
}

bool d_glo_contains(const Ug& g, const IndexSet& j, const IndexSet& k) {
  IndexSet e = set_minus(set_minus(g.space().all_indices(), j), k);
  return separated_ug(g, Independency::make(j, k, e));
}

}  // namespace qbn
