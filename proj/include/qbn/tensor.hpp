#pragma once

#include <complex>
#include <vector>

#include "qbn/config.hpp"
#include "qbn/variable_space.hpp"

namespace qbn {

using cplx = std::complex<double>;

// Dense complex map from joint assignments of a variable subset to values.
// Entries are row-major over the scope (ascending variable index, last
// variable fastest).
class AmplitudeTensor {
 public:
  AmplitudeTensor(SpacePtr space, IndexSet scope, std::vector<cplx> entries,
                  const Config& cfg = default_config());

  const VariableSpace& space() const { return *space_; }
  SpacePtr space_ptr() const { return space_; }
  const IndexSet& scope() const { return scope_; }
  const std::vector<cplx>& entries() const { return entries_; }
  const ScopeIndexer& indexer() const { return indexer_; }
  cplx at(std::size_t flat) const { return entries_[flat]; }
  cplx at(const Assignment& a) const;

  bool normalized() const { return normalized_; }  // sum |A|^2 == 1
  double norm_squared() const;

  AmplitudeTensor normalized_copy() const;

 private:
  SpacePtr space_;
  IndexSet scope_;
  ScopeIndexer indexer_;
  std::vector<cplx> entries_;
  bool normalized_ = false;
};

class ProbTensor {
 public:
  ProbTensor(SpacePtr space, IndexSet scope, std::vector<double> entries,
             const Config& cfg = default_config());

  const VariableSpace& space() const { return *space_; }
  SpacePtr space_ptr() const { return space_; }
  const IndexSet& scope() const { return scope_; }
  const std::vector<double>& entries() const { return entries_; }
  const ScopeIndexer& indexer() const { return indexer_; }
  double at(std::size_t flat) const { return entries_[flat]; }
  double at(const Assignment& a) const;

  bool normalized() const { return normalized_; }
  bool regularized() const { return regularized_; }
  double total_mass() const;

  ProbTensor normalized_copy() const;

 private:
  friend ProbTensor condition(const ProbTensor&, const Assignment&, const Config&);
  SpacePtr space_;
  IndexSet scope_;
  ScopeIndexer indexer_;
  std::vector<double> entries_;
  bool normalized_ = false;
  bool regularized_ = false;
};

// Sum out `drop`; total mass is preserved up to float addition.
ProbTensor marginalize(const ProbTensor& p, const IndexSet& drop);

// P(rest | given) = P(rest, given) / P(given), normalized over the reduced
// scope. In strict mode a vanishing condition mass is an error; with eps > 0
// the mass is substituted and the result flagged `regularized`.
ProbTensor condition(const ProbTensor& p, const Assignment& given,
                     const Config& cfg = default_config());

// Pointwise |A|^2.
ProbTensor amp_to_prob(const AmplitudeTensor& a, const Config& cfg = default_config());

}  // namespace qbn
