#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "qbn/errors.hpp"

namespace qbn {

using IndexSet = std::vector<int>;  // sorted ascending, unique

struct Variable {
  std::string name;
  std::vector<std::string> states;
};

// Ordered list of named discrete variables. Every graph, tensor and density
// matrix in the project indexes into one of these.
class VariableSpace {
 public:
  VariableSpace() = default;
  explicit VariableSpace(std::vector<Variable> vars);

  int size() const { return int(vars_.size()); }
  const Variable& var(int j) const;
  int state_count(int j) const { return int(var(j).states.size()); }
  int index_of(const std::string& name) const;  // -1 when absent
  int require_index(const std::string& name) const;

  // Product of state counts over a subset of variable indices.
  std::size_t joint_states(const IndexSet& scope) const;
  IndexSet all_indices() const;

  bool operator==(const VariableSpace& o) const;

 private:
  std::vector<Variable> vars_;
  std::unordered_map<std::string, int> index_;
};

using SpacePtr = std::shared_ptr<const VariableSpace>;

// Joint assignment of state indices to an ordered variable subset.
struct Assignment {
  IndexSet scope;           // sorted ascending
  std::vector<int> values;  // state index per scope member

  bool empty() const { return scope.empty(); }
  int value_of(int var) const;  // -1 when var not in scope
};

Assignment make_assignment(const VariableSpace& space, IndexSet scope, std::vector<int> values);

// --- set helpers over sorted IndexSets -------------------------------------

IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_minus(const IndexSet& a, const IndexSet& b);
IndexSet set_intersect(const IndexSet& a, const IndexSet& b);
bool set_contains(const IndexSet& a, int x);
bool is_subset(const IndexSet& sub, const IndexSet& super);
bool sets_disjoint(const IndexSet& a, const IndexSet& b);
IndexSet sorted_unique(IndexSet v);
void check_in_range(const VariableSpace& space, const IndexSet& s, const char* what);

// --- row-major index arithmetic over a scope --------------------------------
//
// A scope is a sorted ascending list of variable indices. Joint assignments
// enumerate row-major over the scope order: the last scope variable varies
// fastest. This fixes all serialization and matrix layouts project-wide.

class ScopeIndexer {
 public:
  ScopeIndexer(const VariableSpace& space, const IndexSet& scope);

  std::size_t total() const { return total_; }
  int arity() const { return int(card_.size()); }
  const IndexSet& scope() const { return scope_; }

  std::size_t flatten(const std::vector<int>& digits) const;
  std::vector<int> unflatten(std::size_t flat) const;

  // Flat index of the assignment restricted to a sub-scope (positions given
  // as indices into this scope).
  std::size_t flatten_positions(const std::vector<int>& positions,
                                const std::vector<int>& digits_at_positions,
                                const std::vector<int>& fill_digits) const;

 private:
  IndexSet scope_;
  std::vector<int> card_;
  std::vector<std::size_t> stride_;
  std::size_t total_ = 1;
};

}  // namespace qbn
