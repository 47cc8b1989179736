#include "qbn/network.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qbn {

using ordered_json = nlohmann::ordered_json;

const char* marker_name(MarkerKind k) {
  switch (k) {
    case MarkerKind::VisiblePre: return "visible_pre";
    case MarkerKind::VisiblePost: return "visible_post";
    case MarkerKind::Asum: return "asum";
    case MarkerKind::Psum: return "psum";
    case MarkerKind::Entry: return "entry";
    case MarkerKind::EntrySum: return "entry_sum";
    case MarkerKind::Trace: return "trace";
    case MarkerKind::Diag: return "diag";
  }
  return "?";
}

namespace {

std::optional<MarkerKind> marker_from(const std::string& s) {
  for (MarkerKind k : {MarkerKind::VisiblePre, MarkerKind::VisiblePost, MarkerKind::Asum,
                       MarkerKind::Psum, MarkerKind::Entry, MarkerKind::EntrySum, MarkerKind::Trace,
                       MarkerKind::Diag})
    if (s == marker_name(k)) return k;
  return std::nullopt;
}

[[noreturn]] void invalid(const std::string& path, const std::string& reason) {
  fail(Errc::ValidationError, path + ": " + reason);
}

void check_name(const std::string& name, const std::string& path) {
  if (name.empty()) invalid(path, "empty name");
  for (char c : name)
    if (c == '|' || c == ',' || c == '=' || c == ':' || std::isspace(static_cast<unsigned char>(c)))
      invalid(path, "name '" + name + "' contains a reserved character");
}

int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

cplx parse_complex(const ordered_json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    invalid(path, "complex values are two-element real arrays [re, im]");
  return cplx(v[0].get<double>(), v[1].get<double>());
}

ordered_json dump_complex(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

std::string clique_key(const VariableSpace& space, const IndexSet& clique) {
  std::string key;
  for (std::size_t i = 0; i < clique.size(); ++i) {
    if (i) key += "|";
    key += space.var(clique[i]).name;
  }
  return key;
}

}  // namespace

Dag NetworkFile::dag() const {
  if (kind != Kind::Bayesian) fail(Errc::InvalidKind, "not a Bayesian network");
  return Dag(space, edges);
}

Ug NetworkFile::ug() const {
  if (kind != Kind::Markov) fail(Errc::InvalidKind, "not a Markov network");
  return Ug(space, edges);
}

AmplitudeTensor NetworkFile::joint_amplitude(const Config& cfg) const {
  if (kind == Kind::Bayesian) return build_amplitude_from_bnet(dag(), tables, cfg);
  return build_amplitude_from_mnet(ug(), affinities, cfg);
}

MeasurementPlan NetworkFile::plan() const {
  MeasurementPlan p;
  for (int j = 0; j < space->size(); ++j) {
    auto it = markers.find(j);
    MarkerKind k = it == markers.end() ? MarkerKind::Psum : it->second.kind;
    switch (k) {
      case MarkerKind::VisiblePre:
        p.z_vis.push_back(j);
        p.z_pre.push_back(j);
        break;
      case MarkerKind::VisiblePost: p.z_vis.push_back(j); break;
      case MarkerKind::Asum:
      case MarkerKind::EntrySum: p.z_asum.push_back(j); break;
      case MarkerKind::Psum:
      case MarkerKind::Trace: p.z_psum.push_back(j); break;
      case MarkerKind::Entry:
      case MarkerKind::Diag:
        fail(Errc::ValidationError, "node '" + space->var(j).name + "' carries an " +
                                        marker_name(k) +
                                        " marker; apply or rewrite it before planning");
    }
  }
  return p;
}

IndexSet NetworkFile::ungroundable_nodes() const {
  IndexSet out;
  for (const auto& [j, m] : markers)
    if (m.kind == MarkerKind::Asum || m.kind == MarkerKind::EntrySum || m.kind == MarkerKind::Entry)
      out.push_back(j);
  return sorted_unique(std::move(out));
}

NetworkFile parse_network(const std::string& text, const Config& cfg) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const ordered_json::parse_error& e) {
    fail(Errc::SyntaxError,
         "line " + std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) fail(Errc::SyntaxError, "document must be a JSON object");
  if (doc.value("format", "") != std::string("qbn-1"))
    invalid("format", "expected \"qbn-1\"");

  NetworkFile net;
  std::string kind = doc.value("kind", "");
  if (kind == "bayesian") net.kind = NetworkFile::Kind::Bayesian;
  else if (kind == "markov") net.kind = NetworkFile::Kind::Markov;
  else invalid("kind", "expected \"bayesian\" or \"markov\"");

  if (!doc.contains("variables") || !doc["variables"].is_array())
    invalid("variables", "missing variable list");
  std::vector<Variable> vars;
  for (const auto& v : doc["variables"]) {
    if (!v.is_object() || !v.contains("name") || !v.contains("states"))
      invalid("variables", "each variable needs name and states");
    Variable var;
    var.name = v["name"].get<std::string>();
    check_name(var.name, "variables");
    for (const auto& s : v["states"]) var.states.push_back(s.get<std::string>());
    vars.push_back(std::move(var));
  }
  auto space = std::make_shared<VariableSpace>(std::move(vars));
  net.space = space;

  const char* edge_field = net.kind == NetworkFile::Kind::Bayesian ? "arrows" : "links";
  if (doc.contains(edge_field)) {
    for (const auto& e : doc[edge_field]) {
      if (!e.is_array() || e.size() != 2) invalid(edge_field, "edges are two-name arrays");
      net.edges.emplace_back(space->require_index(e[0].get<std::string>()),
                             space->require_index(e[1].get<std::string>()));
    }
  }

  if (net.kind == NetworkFile::Kind::Bayesian) {
    Dag g(space, net.edges);  // validates acyclicity before table checks
    if (!doc.contains("tables") || !doc["tables"].is_object())
      invalid("tables", "Bayesian networks need per-node tables");
    for (int j = 0; j < space->size(); ++j) {
      const std::string& name = space->var(j).name;
      std::string path = "tables/" + name;
      if (!doc["tables"].contains(name)) invalid(path, "missing node table");
      const ordered_json& t = doc["tables"][name];
      if (!t.is_object() || !t.contains("amps")) invalid(path, "table needs an amps field");
      IndexSet pa = g.parents(j);
      if (t.contains("given")) {
        IndexSet given;
        for (const auto& gname : t["given"]) given.push_back(space->require_index(gname.get<std::string>()));
        if (sorted_unique(given) != pa) invalid(path, "given list must equal the parent set");
      }
      ScopeIndexer pa_idx(*space, pa);
      const ordered_json& amps = t["amps"];
      if (!amps.is_array() || amps.size() != pa_idx.total())
        invalid(path, "amps needs one column per parent assignment (" +
                          std::to_string(pa_idx.total()) + ")");
      ConditionalTable table{j, pa, ComplexMatrix(space->state_count(j), int(pa_idx.total()))};
      for (std::size_t col = 0; col < amps.size(); ++col) {
        if (!amps[col].is_array() || int(amps[col].size()) != space->state_count(j))
          invalid(path, "column " + std::to_string(col) + " needs one entry per state");
        for (int row = 0; row < space->state_count(j); ++row)
          table.table.at(row, int(col)) = parse_complex(amps[col][std::size_t(row)], path);
        double nrm = 0.0;
        for (int row = 0; row < space->state_count(j); ++row)
          nrm += std::norm(table.table.at(row, int(col)));
        if (std::abs(nrm - 1.0) > cfg.norm_tol)
          fail(Errc::UnnormalizedNodeTable,
               path + ": column " + std::to_string(col) + " squared norm " + std::to_string(nrm));
      }
      net.tables.push_back(std::move(table));
    }
  } else {
    Ug g(space, net.edges);
    if (!doc.contains("affinities") || !doc["affinities"].is_object())
      invalid("affinities", "Markov networks need per-super-clique affinities");
    std::vector<IndexSet> cliques = super_cliques(g);
    for (const IndexSet& c : cliques) {
      std::string key = clique_key(*space, c);
      std::string path = "affinities/" + key;
      if (!doc["affinities"].contains(key)) invalid(path, "missing affinity for this super-clique");
      ScopeIndexer cidx(*space, c);
      const ordered_json& vals = doc["affinities"][key];
      if (!vals.is_array() || vals.size() != cidx.total())
        invalid(path, "needs " + std::to_string(cidx.total()) + " entries");
      std::vector<cplx> tab(cidx.total());
      for (std::size_t i = 0; i < tab.size(); ++i) tab[i] = parse_complex(vals[i], path);
      net.affinities.emplace(c, std::move(tab));
    }
    for (const auto& [key, unused] : doc["affinities"].items()) {
      (void)unused;
      bool known = false;
      for (const IndexSet& c : cliques)
        if (clique_key(*space, c) == key) known = true;
      if (!known) invalid("affinities/" + key, "not a super-clique of the declared graph");
    }
  }

  if (doc.contains("markers")) {
    for (const auto& [name, value] : doc["markers"].items()) {
      int j = space->require_index(name);
      NodeMarker marker{MarkerKind::Psum, -1};
      if (value.is_string()) {
        auto k = marker_from(value.get<std::string>());
        if (!k) invalid("markers/" + name, "unknown marker '" + value.get<std::string>() + "'");
        if (*k == MarkerKind::Entry) invalid("markers/" + name, "entry markers need a state value");
        marker.kind = *k;
      } else if (value.is_object() && value.contains("entry")) {
        marker.kind = MarkerKind::Entry;
        std::string st = value["entry"].get<std::string>();
        const auto& states = space->var(j).states;
        auto it = std::find(states.begin(), states.end(), st);
        if (it == states.end()) invalid("markers/" + name, "unknown state '" + st + "'");
        marker.entry_state = int(it - states.begin());
      } else {
        invalid("markers/" + name, "marker must be a string or {\"entry\": state}");
      }
      net.markers.emplace(j, marker);
    }
  }
  return net;
}

NetworkFile parse_network_file(const std::string& path, const Config& cfg) {
  std::ifstream in(path);
  if (!in) fail(Errc::ValidationError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str(), cfg);
}

std::string serialize_network(const NetworkFile& net) {
  const VariableSpace& space = *net.space;
  ordered_json doc;
  doc["format"] = "qbn-1";
  doc["kind"] = net.kind == NetworkFile::Kind::Bayesian ? "bayesian" : "markov";
  doc["variables"] = ordered_json::array();
  for (int j = 0; j < space.size(); ++j)
    doc["variables"].push_back({{"name", space.var(j).name}, {"states", space.var(j).states}});

  std::vector<std::pair<int, int>> edges = net.edges;
  if (net.kind == NetworkFile::Kind::Markov)
    for (auto& [a, b] : edges)
      if (a > b) std::swap(a, b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  ordered_json edge_list = ordered_json::array();
  for (auto [a, b] : edges)
    edge_list.push_back(ordered_json::array({space.var(a).name, space.var(b).name}));
  doc[net.kind == NetworkFile::Kind::Bayesian ? "arrows" : "links"] = edge_list;

  if (net.kind == NetworkFile::Kind::Bayesian) {
    ordered_json tables = ordered_json::object();
    std::vector<const ConditionalTable*> by_var(std::size_t(space.size()), nullptr);
    for (const ConditionalTable& t : net.tables) by_var[std::size_t(t.var)] = &t;
    for (int j = 0; j < space.size(); ++j) {
      const ConditionalTable* t = by_var[std::size_t(j)];
      if (!t) fail(Errc::ValidationError, "missing table for node " + space.var(j).name);
      ordered_json given = ordered_json::array();
      for (int p : t->given) given.push_back(space.var(p).name);
      ordered_json cols = ordered_json::array();
      for (int col = 0; col < t->table.cols(); ++col) {
        ordered_json colv = ordered_json::array();
        for (int row = 0; row < t->table.rows(); ++row)
          colv.push_back(dump_complex(t->table.at(row, col)));
        cols.push_back(colv);
      }
      tables[space.var(j).name] = {{"given", given}, {"amps", cols}};
    }
    doc["tables"] = tables;
  } else {
    ordered_json aff = ordered_json::object();
    for (const auto& [clique, tab] : net.affinities) {
      ordered_json vals = ordered_json::array();
      for (const cplx& z : tab) vals.push_back(dump_complex(z));
      aff[clique_key(space, clique)] = vals;
    }
    doc["affinities"] = aff;
  }

  if (!net.markers.empty()) {
    ordered_json markers = ordered_json::object();
    for (const auto& [j, m] : net.markers) {
      if (m.kind == MarkerKind::Entry)
        markers[space.var(j).name] = {{"entry", space.var(j).states[std::size_t(m.entry_state)]}};
      else
        markers[space.var(j).name] = marker_name(m.kind);
    }
    doc["markers"] = markers;
  }
  return doc.dump(2) + "\n";
}

NetworkFile replace_diag_with_traced_node(const NetworkFile& net, const Config& cfg) {
  if (net.kind != NetworkFile::Kind::Bayesian)
    fail(Errc::InvalidKind, "the diag rewrite operates on Bayesian networks");
  (void)cfg;

  NetworkFile out = net;
  bool again = true;
  while (again) {
    again = false;
    const VariableSpace& space = *out.space;
    for (const auto& [target, marker] : out.markers) {
      if (marker.kind != MarkerKind::Diag) continue;
      if (space.state_count(target) == 1) {
        // diag over a one-state variable is the identity.
        out.markers.erase(target);
        again = true;
        break;
      }

      // Append the twin; it inherits the target's table and parents, and the
      // target becomes a delta-linked copy of the twin.
      std::vector<Variable> vars;
      for (int j = 0; j < space.size(); ++j) vars.push_back(space.var(j));
      std::string twin_name = space.var(target).name + "_trace";
      while (space.index_of(twin_name) >= 0) twin_name += "'";
      vars.push_back(Variable{twin_name, space.var(target).states});
      auto new_space = std::make_shared<VariableSpace>(std::move(vars));
      int twin = new_space->size() - 1;

      std::vector<std::pair<int, int>> edges;
      for (auto [a, b] : out.edges) {
        if (b == target) b = twin;  // parents now feed the twin
        edges.emplace_back(a, b);
      }
      edges.emplace_back(twin, target);

      std::vector<ConditionalTable> tables;
      for (const ConditionalTable& t : out.tables) {
        if (t.var == target) {
          tables.push_back(ConditionalTable{twin, t.given, t.table});
        } else {
          tables.push_back(t);
        }
      }
      int n_states = new_space->state_count(target);
      ConditionalTable delta{target, {twin}, ComplexMatrix(n_states, n_states)};
      for (int s = 0; s < n_states; ++s) delta.table.at(s, s) = 1.0;
      tables.push_back(std::move(delta));

      std::map<int, NodeMarker> markers = out.markers;
      markers.erase(target);
      markers.emplace(twin, NodeMarker{MarkerKind::Trace, -1});

      out.space = new_space;
      out.edges = std::move(edges);
      out.tables = std::move(tables);
      out.markers = std::move(markers);
      again = true;
      break;
    }
  }
  return out;
}

}  // namespace qbn
