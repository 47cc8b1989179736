#include "qbn/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace qbn {

namespace {

void check_scope(const VariableSpace& space, const IndexSet& scope, std::size_t n_entries,
                 const Config& cfg) {
  if (!std::is_sorted(scope.begin(), scope.end()) ||
      std::adjacent_find(scope.begin(), scope.end()) != scope.end())
    fail(Errc::ScopeMismatch, "tensor scope must be sorted and unique");
  check_in_range(space, scope, "tensor scope");
  std::size_t want = space.joint_states(scope);
  if (want > cfg.max_joint_states)
    fail(Errc::JointStateLimitExceeded,
         std::to_string(want) + " joint states exceeds " + std::to_string(cfg.max_joint_states));
  if (n_entries != want)
    fail(Errc::ScopeMismatch, "entry count " + std::to_string(n_entries) + " != joint states " +
                                  std::to_string(want));
}

// Positions (within `scope`) of the members of `sub`.
std::vector<int> positions_of(const IndexSet& scope, const IndexSet& sub) {
  std::vector<int> pos;
  pos.reserve(sub.size());
  for (int v : sub) {
    auto it = std::lower_bound(scope.begin(), scope.end(), v);
    if (it == scope.end() || *it != v) fail(Errc::ScopeMismatch, "variable not in scope");
    pos.push_back(int(it - scope.begin()));
  }
  return pos;
}

}  // namespace

AmplitudeTensor::AmplitudeTensor(SpacePtr space, IndexSet scope, std::vector<cplx> entries,
                                 const Config& cfg)
    : space_(std::move(space)),
      scope_(std::move(scope)),
      indexer_(*space_, scope_),
      entries_(std::move(entries)) {
  check_scope(*space_, scope_, entries_.size(), cfg);
  normalized_ = std::abs(norm_squared() - 1.0) <= cfg.norm_tol;
}

cplx AmplitudeTensor::at(const Assignment& a) const {
  if (a.scope.size() != scope_.size()) fail(Errc::ScopeMismatch, "assignment must cover full scope");
  auto pos = positions_of(scope_, a.scope);
  std::vector<int> fill(scope_.size(), 0);
  return entries_[indexer_.flatten_positions(pos, a.values, fill)];
}

double AmplitudeTensor::norm_squared() const {
  double s = 0;
  for (const cplx& z : entries_) s += std::norm(z);
  return s;
}

AmplitudeTensor AmplitudeTensor::normalized_copy() const {
  double n = std::sqrt(norm_squared());
  if (n == 0.0) fail(Errc::ZeroDenominator, "cannot normalize all-zero amplitude");
  std::vector<cplx> e = entries_;
  for (cplx& z : e) z /= n;
  return AmplitudeTensor(space_, scope_, std::move(e));
}

ProbTensor::ProbTensor(SpacePtr space, IndexSet scope, std::vector<double> entries,
                       const Config& cfg)
    : space_(std::move(space)),
      scope_(std::move(scope)),
      indexer_(*space_, scope_),
      entries_(std::move(entries)) {
  check_scope(*space_, scope_, entries_.size(), cfg);
  for (double v : entries_)
    if (v < 0.0) fail(Errc::ValidationError, "negative probability entry");
  normalized_ = std::abs(total_mass() - 1.0) <= cfg.norm_tol;
}

double ProbTensor::at(const Assignment& a) const {
  if (a.scope.size() != scope_.size()) fail(Errc::ScopeMismatch, "assignment must cover full scope");
  auto pos = positions_of(scope_, a.scope);
  std::vector<int> fill(scope_.size(), 0);
  return entries_[indexer_.flatten_positions(pos, a.values, fill)];
}

double ProbTensor::total_mass() const {
  double s = 0;
  for (double v : entries_) s += v;
  return s;
}

ProbTensor ProbTensor::normalized_copy() const {
  double m = total_mass();
  if (m == 0.0) fail(Errc::ZeroDenominator, "cannot normalize zero-mass tensor");
  std::vector<double> e = entries_;
  for (double& v : e) v /= m;
  return ProbTensor(space_, scope_, std::move(e));
}

ProbTensor marginalize(const ProbTensor& p, const IndexSet& drop) {
  if (!is_subset(drop, p.scope())) fail(Errc::ScopeMismatch, "drop set not within scope");
  IndexSet kept = set_minus(p.scope(), drop);
  ScopeIndexer out_idx(p.space(), kept);
  std::vector<double> out(out_idx.total(), 0.0);
  auto kept_pos = positions_of(p.scope(), kept);
  const ScopeIndexer& in_idx = p.indexer();
  for (std::size_t flat = 0; flat < in_idx.total(); ++flat) {
    std::vector<int> digits = in_idx.unflatten(flat);
    std::vector<int> kept_digits(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
      kept_digits[i] = digits[std::size_t(kept_pos[i])];
    out[out_idx.flatten(kept_digits)] += p.at(flat);
  }
  return ProbTensor(p.space_ptr(), kept, std::move(out));
}

ProbTensor condition(const ProbTensor& p, const Assignment& given, const Config& cfg) {
  if (!is_subset(given.scope, p.scope())) fail(Errc::ScopeMismatch, "condition scope not within scope");
  IndexSet kept = set_minus(p.scope(), given.scope);
  ScopeIndexer out_idx(p.space(), kept);
  std::vector<double> out(out_idx.total(), 0.0);
  auto kept_pos = positions_of(p.scope(), kept);
  auto given_pos = positions_of(p.scope(), given.scope);
  const ScopeIndexer& in_idx = p.indexer();

  std::vector<int> full(p.scope().size(), 0);
  for (std::size_t i = 0; i < given.scope.size(); ++i)
    full[std::size_t(given_pos[i])] = given.values[i];
  double mass = 0.0;
  for (std::size_t k = 0; k < out_idx.total(); ++k) {
    std::vector<int> kept_digits = out_idx.unflatten(k);
    for (std::size_t i = 0; i < kept.size(); ++i)
      full[std::size_t(kept_pos[i])] = kept_digits[i];
    out[k] = p.at(in_idx.flatten(full));
    mass += out[k];
  }
  bool regularized = false;
  if (mass <= 0.0) {
    if (cfg.eps <= 0.0) fail(Errc::ZeroConditionMass, "conditioning event has zero probability");
    mass = cfg.eps;
    regularized = true;
  }
  for (double& v : out) v /= mass;
  ProbTensor result(p.space_ptr(), kept, std::move(out));
  result.regularized_ = regularized;
  return result;
}

ProbTensor amp_to_prob(const AmplitudeTensor& a, const Config& cfg) {
  std::vector<double> out(a.entries().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(a.at(i));
  return ProbTensor(a.space_ptr(), a.scope(), std::move(out), cfg);
}

}  // namespace qbn
