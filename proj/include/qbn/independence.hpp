#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qbn/amplitudes.hpp"
#include "qbn/density.hpp"
#include "qbn/graph.hpp"

namespace qbn {

enum class TauKind { P, A, CMI, CMIP };

const char* tau_kind_name(TauKind k);
std::optional<TauKind> tau_kind_from(const std::string& s);

struct TauReport {
  bool value = false;
  bool indeterminate = false;        // CMI kinds landing inside the hysteresis band
  double max_residual = 0.0;         // factor kinds: worst per-entry residual
  double cmi = 0.0;                  // CMI kinds: the computed value
  std::size_t skipped_zero_mass = 0; // conditioning points with no mass
};

// tau^P: P(J,K|E) = P(J|E) P(K|E) at every point with P(E) > 0.
TauReport tau_detailed(TauKind kind, const ProbTensor& p, const Independency& i, double tol,
                       const Config& cfg = default_config());

// tau^A / tau^CMI / tau^CMI': amplitude factorization, vanishing CMI of the
// traced meta density, vanishing CMI after diagonalizing the E variables.
TauReport tau_detailed(TauKind kind, const ThetaField& tf, const Independency& i, double tol,
                       const Config& cfg = default_config());

bool tau(TauKind kind, const ProbTensor& p, const Independency& i, double tol,
         const Config& cfg = default_config());
bool tau(TauKind kind, const ThetaField& tf, const Independency& i, double tol,
         const Config& cfg = default_config());

// Exhaustive probabilistic I-sets over all disjoint triples.
ISet prob_iset(TauKind kind, const ProbTensor& p, double tol, const Config& cfg = default_config());
ISet prob_iset(TauKind kind, const ThetaField& tf, double tol, const Config& cfg = default_config());

// --- reduction and combination rules ----------------------------------------

enum class Rule { Decomposition, WeakUnion, Contraction, Intersection };
const char* rule_name(Rule r);

struct RuleViolation {
  Rule rule;
  std::string instantiation;  // the premise/conclusion triple that failed
};

struct RulesReport {
  std::size_t instantiations = 0;
  std::vector<RuleViolation> violations;
  bool intersection_checked = true;  // false when the model has zeros
  bool informational = false;        // CMI kinds: search only, never asserted
};

RulesReport check_rules(TauKind kind, const ProbTensor& p, double tol,
                        const Config& cfg = default_config());
RulesReport check_rules(TauKind kind, const ThetaField& tf, double tol,
                        const Config& cfg = default_config());

// --- all-encompassing agreement ----------------------------------------------

struct AgreementResult {
  bool tau_a = false;
  bool tau_cmip = false;
};

// For |J|+|K|+|E| = N the two truth functions must coincide; a mismatch is a
// numerical-health signal, raised as ToleranceInconsistency.
AgreementResult all_encompassing_agreement(const ThetaField& tf, const Independency& i, double tol,
                                           const Config& cfg = default_config());

// --- entanglement certificates ------------------------------------------------

struct CertificateResult {
  bool certified_zero = false;
  std::optional<IndexSet> witness;  // the grounding set E when certified
  double upper_bound = 0.0;         // 0.5 * S_{diag_E mu}(J:K|E), always reported
};

// Grounds every variable outside J and K except the `ungroundable` ones
// (coherently-summed nodes); certifies E^CMI(J:K) = 0 when the graph
// separates J from K given that grounding. The one-extension upper bound is
// computed from the joint amplitude with the ungroundable variables
// entry-summed away.
CertificateResult entanglement_zero_certificate(const Dag& g, const AmplitudeTensor& joint,
                                                const IndexSet& j_set, const IndexSet& k_set,
                                                const IndexSet& ungroundable = {},
                                                const Config& cfg = default_config());
CertificateResult entanglement_zero_certificate(const Ug& g, const AmplitudeTensor& joint,
                                                const IndexSet& j_set, const IndexSet& k_set,
                                                const IndexSet& ungroundable = {},
                                                const Config& cfg = default_config());

}  // namespace qbn
