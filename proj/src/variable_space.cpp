#include "qbn/variable_space.hpp"

#include <algorithm>
#include <set>

namespace qbn {

VariableSpace::VariableSpace(std::vector<Variable> vars) : vars_(std::move(vars)) {
  for (int j = 0; j < int(vars_.size()); ++j) {
    const Variable& v = vars_[j];
    if (v.name.empty()) fail(Errc::ValidationError, "variable " + std::to_string(j) + " has empty name");
    if (v.states.empty()) fail(Errc::ValidationError, "variable '" + v.name + "' has no states");
    std::set<std::string> seen(v.states.begin(), v.states.end());
    if (seen.size() != v.states.size())
      fail(Errc::ValidationError, "variable '" + v.name + "' has duplicate state names");
    if (!index_.emplace(v.name, j).second)
      fail(Errc::ValidationError, "duplicate variable name '" + v.name + "'");
  }
}

const Variable& VariableSpace::var(int j) const {
  if (j < 0 || j >= size()) fail(Errc::IndexOutOfRange, "variable index " + std::to_string(j));
  return vars_[std::size_t(j)];
}

int VariableSpace::index_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int VariableSpace::require_index(const std::string& name) const {
  int j = index_of(name);
  if (j < 0) fail(Errc::IndexOutOfRange, "unknown variable '" + name + "'");
  return j;
}

std::size_t VariableSpace::joint_states(const IndexSet& scope) const {
  std::size_t n = 1;
  for (int j : scope) n *= std::size_t(state_count(j));
  return n;
}

IndexSet VariableSpace::all_indices() const {
  IndexSet all(static_cast<std::size_t>(size()));
  for (int j = 0; j < size(); ++j) all[std::size_t(j)] = j;
  return all;
}

bool VariableSpace::operator==(const VariableSpace& o) const {
  if (size() != o.size()) return false;
  for (int j = 0; j < size(); ++j) {
    if (vars_[std::size_t(j)].name != o.vars_[std::size_t(j)].name) return false;
    if (vars_[std::size_t(j)].states != o.vars_[std::size_t(j)].states) return false;
  }
  return true;
}

int Assignment::value_of(int var) const {
  for (std::size_t i = 0; i < scope.size(); ++i)
    if (scope[i] == var) return values[i];
  return -1;
}

Assignment make_assignment(const VariableSpace& space, IndexSet scope, std::vector<int> values) {
  if (scope.size() != values.size()) fail(Errc::ScopeMismatch, "assignment scope/value length mismatch");
  if (!std::is_sorted(scope.begin(), scope.end()) ||
      std::adjacent_find(scope.begin(), scope.end()) != scope.end())
    fail(Errc::ScopeMismatch, "assignment scope must be sorted and unique");
  check_in_range(space, scope, "assignment scope");
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (values[i] < 0 || values[i] >= space.state_count(scope[i]))
      fail(Errc::IndexOutOfRange, "state " + std::to_string(values[i]) + " of variable " +
                                      space.var(scope[i]).name);
  }
  return Assignment{std::move(scope), std::move(values)};
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_minus(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_intersect(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool set_contains(const IndexSet& a, int x) {
  return std::binary_search(a.begin(), a.end(), x);
}

bool is_subset(const IndexSet& sub, const IndexSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

bool sets_disjoint(const IndexSet& a, const IndexSet& b) {
  return set_intersect(a, b).empty();
}

IndexSet sorted_unique(IndexSet v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void check_in_range(const VariableSpace& space, const IndexSet& s, const char* what) {
  for (int j : s)
    if (j < 0 || j >= space.size())
      fail(Errc::IndexOutOfRange, std::string(what) + ": index " + std::to_string(j));
}

ScopeIndexer::ScopeIndexer(const VariableSpace& space, const IndexSet& scope) : scope_(scope) {
  check_in_range(space, scope, "scope");
  card_.reserve(scope.size());
  for (int j : scope) card_.push_back(space.state_count(j));
  stride_.assign(card_.size(), 1);
  for (int i = int(card_.size()) - 2; i >= 0; --i)
    stride_[std::size_t(i)] = stride_[std::size_t(i + 1)] * std::size_t(card_[std::size_t(i + 1)]);
  for (int c : card_) total_ *= std::size_t(c);
}

std::size_t ScopeIndexer::flatten(const std::vector<int>& digits) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < card_.size(); ++i) flat += stride_[i] * std::size_t(digits[i]);
  return flat;
}

std::vector<int> ScopeIndexer::unflatten(std::size_t flat) const {
  std::vector<int> digits(card_.size());
  for (std::size_t i = 0; i < card_.size(); ++i) {
    digits[i] = int(flat / stride_[i]);
    flat %= stride_[i];
  }
  return digits;
}

std::size_t ScopeIndexer::flatten_positions(const std::vector<int>& positions,
                                            const std::vector<int>& digits_at_positions,
                                            const std::vector<int>& fill_digits) const {
  std::vector<int> digits = fill_digits;
  for (std::size_t i = 0; i < positions.size(); ++i)
    digits[std::size_t(positions[i])] = digits_at_positions[i];
  return flatten(digits);
}

}  // namespace qbn
