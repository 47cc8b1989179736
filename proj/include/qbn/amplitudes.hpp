#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qbn/graph.hpp"
#include "qbn/numlin.hpp"
#include "qbn/tensor.hpp"

namespace qbn {

// A = e^{i theta} sqrt(P) parameterization of an amplitude, anchored so that
// theta vanishes at a distinguished reference assignment. Phases at
// zero-amplitude points are unconstrained; they are stored as 0 and flagged.
// Marginal phases follow the reference-completion convention:
// theta(x_J) is theta at the point (x_J, reference values elsewhere).
class ThetaField {
 public:
  enum class ReferencePolicy { Strict, AllowZero };

  static ThetaField from_amplitude(AmplitudeTensor a, Assignment reference,
                                   ReferencePolicy policy = ReferencePolicy::Strict,
                                   const Config& cfg = default_config());

  const AmplitudeTensor& base() const { return base_; }
  const VariableSpace& space() const { return base_.space(); }
  const IndexSet& scope() const { return base_.scope(); }
  const Assignment& reference() const { return reference_; }

  double theta(std::size_t flat) const { return theta_[flat]; }
  bool unconstrained(std::size_t flat) const { return unconstrained_[flat] != 0; }
  double prob(std::size_t flat) const { return prob_[flat]; }
  // Phase of A at the reference (0 when the reference amplitude vanishes);
  // reconstruction is A = e^{i global_phase} e^{i theta} sqrt(P).
  double global_phase() const { return global_phase_; }
  bool reference_zero() const { return reference_zero_; }

  // Flat index of (sub = values, reference elsewhere).
  std::size_t anchored_flat(const IndexSet& sub, const std::vector<int>& values) const;

  double marginal_prob(const IndexSet& sub, const std::vector<int>& values) const;
  double marginal_theta(const IndexSet& sub, const std::vector<int>& values) const;
  cplx marginal_amp(const IndexSet& sub, const std::vector<int>& values) const;

  // A(x_J1 | x_J2); throws ZeroConditionMass in strict mode when the
  // conditioning marginal vanishes; with eps > 0 the mass is substituted.
  cplx conditional_amp(const IndexSet& j1, const std::vector<int>& v1, const IndexSet& j2,
                       const std::vector<int>& v2, const Config& cfg = default_config()) const;

 private:
  ThetaField(AmplitudeTensor a, Assignment ref);
  AmplitudeTensor base_;
  Assignment reference_;
  std::vector<double> theta_;
  std::vector<double> prob_;
  std::vector<char> unconstrained_;
  double global_phase_ = 0.0;
  bool reference_zero_ = false;
};

// Convenience: all-first-states reference (used verbatim even when the
// amplitude vanishes there, matching the counterexample convention).
ThetaField theta_field(const AmplitudeTensor& a, const Config& cfg = default_config());
ThetaField theta_field(const AmplitudeTensor& a, const Assignment& reference,
                       ThetaField::ReferencePolicy policy = ThetaField::ReferencePolicy::Strict,
                       const Config& cfg = default_config());
// Lexicographically smallest assignment with |A| above threshold.
Assignment scan_reference(const AmplitudeTensor& a, const Config& cfg = default_config());

// One factor of a chain or graph factorization: A(x_var | x_given).
struct ConditionalTable {
  int var;
  IndexSet given;
  ComplexMatrix table;  // rows: states of var; cols: joint assignments of given

  // (states - 1) complex slots per column, the free content after the unit
  // norm and reference-phase constraints.
  std::size_t free_parameters() const;
};

// A(x.) = prod_m A(x_{o_m} | x_{o_1..o_{m-1}}) for a node ordering. The first
// factor carries the global phase so the product reproduces A exactly.
std::vector<ConditionalTable> chain_factorize(const ThetaField& tf, const std::vector<int>& order,
                                              const Config& cfg = default_config());

// Evaluate a product of conditional tables as a joint amplitude.
AmplitudeTensor product_of_tables(const ThetaField& like, const std::vector<ConditionalTable>& tables);

// --- Mobius transforms over subset masks ------------------------------------
// Values indexed by bitmask over a ground set of n elements (n <= 20).
// forward:  f(J) = sum_{J' subset J} g(J')
// invert:   g(J) = sum_{J' subset J} (-1)^{|J - J'|} f(J')
std::vector<cplx> mobius_forward(std::vector<cplx> g, int n, const Config& cfg = default_config());
std::vector<cplx> mobius_invert(std::vector<cplx> f, int n, const Config& cfg = default_config());

// lambda(x_J) tables of the power-set rule: alternating-sign sums of
// ln A over reference-anchored points, with the log branch fixed by the
// theta field. prod_J e^{lambda(x_J)} = A(x.).
struct LambdaTable {
  IndexSet scope;
  // Key: subset bitmask over scope positions; value: lambda over the subset's
  // joint assignments (row-major).
  std::map<std::uint32_t, std::vector<cplx>> lambda;
};
LambdaTable powerset_lambda(const ThetaField& tf, const Config& cfg = default_config());

// Joint amplitude reconstructed from a lambda table (exp of the lattice sum).
AmplitudeTensor lambda_product(const ThetaField& like, const LambdaTable& table);

// A(x.) == prod_j A(x_j | x_pa(j)) within tolerance.
bool factors_according_dag(const ThetaField& tf, const Dag& g, const Config& cfg = default_config());

// True iff lambda(x_J) vanishes (e^lambda == 1; phases compared mod 2 pi) for
// every subset J not contained in a super-clique.
bool factors_according_ug(const ThetaField& tf, const Ug& g, const Config& cfg = default_config());

// Joint amplitude of a Bayesian net: product over nodes of per-node
// transition tables with unit-norm columns.
AmplitudeTensor build_amplitude_from_bnet(const Dag& g, const std::vector<ConditionalTable>& tables,
                                          const Config& cfg = default_config());

// Joint amplitude of a Markov net: normalized product of super-clique
// affinities. Keys of `affinities` are the super-cliques of g.
AmplitudeTensor build_amplitude_from_mnet(const Ug& g,
                                          const std::map<IndexSet, std::vector<cplx>>& affinities,
                                          const Config& cfg = default_config());

// Free-phase transition table rewritten as a product of three
// constrained-phase tables, each carrying an all-real row: f = c1 c2 c3 with
// c1 = f diag(e^{-i phi_k}) for the first-row phases phi_k.
struct FpToCpResult {
  ComplexMatrix c1, c2, c3;
};
FpToCpResult fp_to_cp(const ComplexMatrix& f);

}  // namespace qbn
