#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qbn/numlin.hpp"
#include "qbn/tensor.hpp"

namespace qbn {

// An operator on the joint Hilbert space of an ordered variable subset.
// Row/column indices enumerate assignments row-major over the scope, matching
// the tensor layout. Super-operator outputs are generally not density
// matrices (no renormalization happens below the measurement level).
struct ScopedMatrix {
  SpacePtr space;
  IndexSet scope;
  ComplexMatrix m;

  cplx scalar() const;  // requires empty scope (1x1 matrix)
};

class DensityMatrix {
 public:
  // Validates Hermiticity and unit trace; positivity is enforced where the
  // spectrum is actually consumed (entropies error below -eig_clamp).
  static DensityMatrix make(SpacePtr space, IndexSet scope, ComplexMatrix m,
                            const Config& cfg = default_config());

  const VariableSpace& space() const { return sm_.space ? *sm_.space : empty_space(); }
  SpacePtr space_ptr() const { return sm_.space; }
  const IndexSet& scope() const { return sm_.scope; }
  const ComplexMatrix& matrix() const { return sm_.m; }
  const ScopedMatrix& scoped() const { return sm_; }
  int dim() const { return sm_.m.rows(); }

 private:
  static const VariableSpace& empty_space();
  explicit DensityMatrix(ScopedMatrix sm) : sm_(std::move(sm)) {}
  ScopedMatrix sm_;
};

// Z_vis / Z_Asum / Z_Psum partition of the variable set, with the optional
// visible split Z_vis = Z_post + Z_pre.
struct MeasurementPlan {
  IndexSet z_vis, z_asum, z_psum;
  IndexSet z_pre;  // subset of z_vis; empty means everything is post-viewed

  IndexSet z_post() const { return set_minus(z_vis, z_pre); }
  void validate(const VariableSpace& space, const IndexSet& full_scope) const;
};

// Rank-1 projector onto the joint amplitude vector.
DensityMatrix meta_density(const AmplitudeTensor& a, const Config& cfg = default_config());

DensityMatrix partial_trace(const DensityMatrix& rho, const IndexSet& drop,
                            const Config& cfg = default_config());

enum class SuperOpKind { Entry, EntrySum, Trace, Diag };

// The four measurement super-operators. Entry, entry-sum and trace shrink the
// scope; diag keeps it and zeroes off-diagonal blocks of the target.
// `value` is required for Entry and must cover the target.
ScopedMatrix superop(const ScopedMatrix& in, SuperOpKind kind, const IndexSet& target,
                     const std::optional<Assignment>& value = std::nullopt);

// P(x_Zvis) computed through the super-operator pipeline
// entry . entry-sum . trace applied to the meta density matrix, normalized
// over outcomes once at this level.
ProbTensor measurement_distribution(const AmplitudeTensor& a, const MeasurementPlan& plan,
                                    const Config& cfg = default_config());

// Same distribution through the three-projector expectation value; the
// average vector over Z_Asum is normalized by its joint state count. Agrees
// with measurement_distribution after normalization.
ProbTensor measurement_distribution_projector(const AmplitudeTensor& a,
                                              const MeasurementPlan& plan,
                                              const Config& cfg = default_config());

double measurement_prob(const AmplitudeTensor& a, const MeasurementPlan& plan,
                        const Assignment& outcome, const Config& cfg = default_config());

double conditional_measurement_prob(const AmplitudeTensor& a, const MeasurementPlan& plan,
                                    const Assignment& post_outcome, const Assignment& pre_outcome,
                                    const Config& cfg = default_config());

// Sum over post outcomes of lambda(vis outcome) * P(post | pre). The
// eigenvalue table is indexed by the flat Z_vis outcome and must cover it.
double expected_value(const AmplitudeTensor& a, const MeasurementPlan& plan,
                      const std::vector<double>& lambda_by_vis_flat,
                      const Assignment& pre_outcome, const Config& cfg = default_config());

// Traced purification: eigenvectors become the transition amplitudes A(x|j),
// square roots of the eigenvalues become the amplitudes A(j) of the traced
// node.
struct Purification {
  ComplexMatrix cond;             // A(x|j): column j is the j-th eigenvector
  std::vector<double> node_amps;  // A(j) >= 0, descending
};
Purification purify(const DensityMatrix& rho, const Config& cfg = default_config());
DensityMatrix purification_rebuild(const Purification& p, const DensityMatrix& like,
                                   const Config& cfg = default_config());

// A(x,y) = sum_j A(x|j) A(y|j) A(j) over a declared bipartition of the scope.
struct SchmidtResult {
  ComplexMatrix x_given_j;        // unit columns
  std::vector<double> coeffs;     // A(j) >= 0, descending
  ComplexMatrix y_given_j;        // unit columns
};
SchmidtResult schmidt(const AmplitudeTensor& a, const IndexSet& left_group,
                      const Config& cfg = default_config());

double von_neumann_entropy(const DensityMatrix& rho, const Config& cfg = default_config());

struct CmiValue {
  double value = 0.0;
  bool clamped = false;  // raw value fell in [-clamp, 0) and was reported as 0
};

// S(J:K|E) of the reduction of rho onto J+K+E (variables outside are traced
// out first). Slightly negative values within the clamp are reported as zero;
// anything more negative is a numerical-health error.
CmiValue quantum_cmi(const DensityMatrix& rho, const IndexSet& j_set, const IndexSet& k_set,
                     const IndexSet& e_set, const Config& cfg = default_config());

CmiValue classical_cmi(const ProbTensor& p, const IndexSet& j_set, const IndexSet& k_set,
                       const IndexSet& e_set, const Config& cfg = default_config());

// Monte-Carlo implementation of diag over `target`: average of conjugations
// by random diagonal phase unitaries, uniform phases on [0, 2pi). Converges
// to superop(Diag) at rate O(1/sqrt(samples)); deterministic given the seed.
DensityMatrix random_phase_dephase(const DensityMatrix& rho, const IndexSet& target,
                                   std::size_t samples, std::uint64_t seed,
                                   const Config& cfg = default_config());

}  // namespace qbn
