#pragma once

#include <map>
#include <string>

#include "qbn/amplitudes.hpp"
#include "qbn/density.hpp"
#include "qbn/graph.hpp"

namespace qbn {

// Per-node decorations: visibility for measurement plans, operator markers
// for states derived from the meta density matrix.
enum class MarkerKind { VisiblePre, VisiblePost, Asum, Psum, Entry, EntrySum, Trace, Diag };

const char* marker_name(MarkerKind k);

struct NodeMarker {
  MarkerKind kind;
  int entry_state = -1;  // for Entry: the pinned state index
};

// In-memory form of a .qbn document (JSON with // comments; see README for
// the field-by-field format). Parsing validates all structural invariants;
// serialization is canonical, so parse . serialize . parse is idempotent.
struct NetworkFile {
  enum class Kind { Bayesian, Markov };

  Kind kind = Kind::Bayesian;
  SpacePtr space;
  std::vector<std::pair<int, int>> edges;             // arrows or links
  std::vector<ConditionalTable> tables;               // bayesian, one per node
  std::map<IndexSet, std::vector<cplx>> affinities;   // markov, one per super-clique
  std::map<int, NodeMarker> markers;

  Dag dag() const;  // bayesian only
  Ug ug() const;    // markov only

  AmplitudeTensor joint_amplitude(const Config& cfg = default_config()) const;

  // Visible / A-summed / P-summed partition from the markers; unmarked nodes
  // are P-summed. Entry and diag markers must be rewritten or applied first.
  MeasurementPlan plan() const;

  // Nodes that cannot be grounded by the entanglement certificate because
  // they are coherently summed away (asum, entry-sum, entry markers).
  IndexSet ungroundable_nodes() const;
};

NetworkFile parse_network(const std::string& text, const Config& cfg = default_config());
NetworkFile parse_network_file(const std::string& path, const Config& cfg = default_config());
std::string serialize_network(const NetworkFile& net);

// Trades every diag marker for an extra traced twin node: the marked node's
// table moves onto the twin and is replaced by a Kronecker-delta link, so the
// partial trace over the twin of the rewritten meta density equals diag of
// the original. One-state nodes are a no-op (their diag is the identity).
NetworkFile replace_diag_with_traced_node(const NetworkFile& net, const Config& cfg = default_config());

}  // namespace qbn
