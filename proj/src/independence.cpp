#include "qbn/independence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace qbn {

const char* tau_kind_name(TauKind k) {
  switch (k) {
    case TauKind::P: return "P";
    case TauKind::A: return "A";
    case TauKind::CMI: return "CMI";
    case TauKind::CMIP: return "CMI'";
  }
  return "?";
}

std::optional<TauKind> tau_kind_from(const std::string& s) {
  if (s == "P" || s == "p") return TauKind::P;
  if (s == "A" || s == "a") return TauKind::A;
  if (s == "CMI" || s == "cmi") return TauKind::CMI;
  if (s == "CMIP" || s == "cmip" || s == "CMI'" || s == "cmi'") return TauKind::CMIP;
  return std::nullopt;
}

namespace {

void check_sets(const VariableSpace& space, const IndexSet& scope, const Independency& i) {
  check_in_range(space, i.j_set, "J");
  check_in_range(space, i.k_set, "K");
  check_in_range(space, i.e_set, "E");
  IndexSet all = set_union(set_union(i.j_set, i.k_set), i.e_set);
  if (!is_subset(all, scope)) fail(Errc::ScopeMismatch, "independency sets not within scope");
  if (!sets_disjoint(i.j_set, i.k_set) || !sets_disjoint(i.j_set, i.e_set) ||
      !sets_disjoint(i.k_set, i.e_set))
    fail(Errc::SetsNotDisjoint, "independency sets overlap");
}

// Merge two (sorted set, values) pairs into values over the sorted union.
std::vector<int> merge_values(const IndexSet& s1, const std::vector<int>& v1, const IndexSet& s2,
                              const std::vector<int>& v2) {
  IndexSet both = set_union(s1, s2);
  std::vector<int> out(both.size());
  for (std::size_t i = 0; i < both.size(); ++i) {
    auto it = std::lower_bound(s1.begin(), s1.end(), both[i]);
    if (it != s1.end() && *it == both[i])
      out[i] = v1[std::size_t(it - s1.begin())];
    else {
      auto it2 = std::lower_bound(s2.begin(), s2.end(), both[i]);
      out[i] = v2[std::size_t(it2 - s2.begin())];
    }
  }
  return out;
}

TauReport tau_cmi_kinds(TauKind kind, const ThetaField& tf, const Independency& i, double tol,
                        const Config& cfg) {
  DensityMatrix mu = meta_density(tf.base(), cfg);
  IndexSet jke = set_union(set_union(i.j_set, i.k_set), i.e_set);
  DensityMatrix reduced = partial_trace(mu, set_minus(tf.scope(), jke), cfg);
  if (kind == TauKind::CMIP && !i.e_set.empty()) {
    ScopedMatrix diag = superop(reduced.scoped(), SuperOpKind::Diag, i.e_set);
    reduced = DensityMatrix::make(diag.space, diag.scope, std::move(diag.m), cfg);
  }
  CmiValue v = quantum_cmi(reduced, i.j_set, i.k_set, i.e_set, cfg);
  TauReport rep;
  rep.cmi = v.value;
  rep.value = v.value < tol;
  rep.indeterminate = v.value >= tol && v.value < cfg.cmi_band_factor * tol;
  return rep;
}

}  // namespace

TauReport tau_detailed(TauKind kind, const ProbTensor& p, const Independency& i, double tol,
                       const Config& cfg) {
  if (kind != TauKind::P) fail(Errc::InvalidKind, "this overload evaluates tau^P only");
  check_sets(p.space(), p.scope(), i);

  IndexSet jke = set_union(set_union(i.j_set, i.k_set), i.e_set);
  ProbTensor marg = marginalize(p, set_minus(p.scope(), jke));
  ProbTensor p_e = marginalize(marg, set_union(i.j_set, i.k_set));
  ProbTensor p_je = marginalize(marg, i.k_set);
  ProbTensor p_ke = marginalize(marg, i.j_set);

  ScopeIndexer j_idx(p.space(), i.j_set), k_idx(p.space(), i.k_set), e_idx(p.space(), i.e_set);
  TauReport rep;
  rep.value = true;
  for (std::size_t e = 0; e < e_idx.total(); ++e) {
    std::vector<int> ev = e_idx.unflatten(e);
    double pe = p_e.entries().empty() ? 1.0 : p_e.at(e);
    if (i.e_set.empty()) pe = 1.0;
    if (pe <= 0.0) {
      ++rep.skipped_zero_mass;
      continue;
    }
    for (std::size_t j = 0; j < j_idx.total(); ++j) {
      std::vector<int> jv = j_idx.unflatten(j);
      std::vector<int> jev = merge_values(i.j_set, jv, i.e_set, ev);
      double pje = p_je.at(p_je.indexer().flatten(jev));
      for (std::size_t k = 0; k < k_idx.total(); ++k) {
        std::vector<int> kv = k_idx.unflatten(k);
        std::vector<int> kev = merge_values(i.k_set, kv, i.e_set, ev);
        double pke = p_ke.at(p_ke.indexer().flatten(kev));
        std::vector<int> jkev = merge_values(set_union(i.j_set, i.k_set),
                                             merge_values(i.j_set, jv, i.k_set, kv), i.e_set, ev);
        double pjke = marg.at(marg.indexer().flatten(jkev));
        double residual = std::abs(pjke / pe - (pje / pe) * (pke / pe));
        rep.max_residual = std::max(rep.max_residual, residual);
      }
    }
  }
  rep.value = rep.max_residual <= tol;
  return rep;
}

TauReport tau_detailed(TauKind kind, const ThetaField& tf, const Independency& i, double tol,
                       const Config& cfg) {
  check_sets(tf.space(), tf.scope(), i);
  if (kind == TauKind::P)
    fail(Errc::InvalidKind, "tau^P takes a probability tensor; convert with amp_to_prob");
  if (kind == TauKind::CMI || kind == TauKind::CMIP) return tau_cmi_kinds(kind, tf, i, tol, cfg);

  // tau^A: A(j,k|e) = A(j|e) A(k|e) wherever the conditioning mass is nonzero.
  ScopeIndexer j_idx(tf.space(), i.j_set), k_idx(tf.space(), i.k_set), e_idx(tf.space(), i.e_set);
  TauReport rep;
  for (std::size_t e = 0; e < e_idx.total(); ++e) {
    std::vector<int> ev = e_idx.unflatten(e);
    double pe = i.e_set.empty() ? 1.0 : tf.marginal_prob(i.e_set, ev);
    if (pe <= 0.0 && cfg.eps <= 0.0) {
      ++rep.skipped_zero_mass;
      continue;
    }
    for (std::size_t j = 0; j < j_idx.total(); ++j) {
      std::vector<int> jv = j_idx.unflatten(j);
      cplx a_j = tf.conditional_amp(i.j_set, jv, i.e_set, ev, cfg);
      for (std::size_t k = 0; k < k_idx.total(); ++k) {
        std::vector<int> kv = k_idx.unflatten(k);
        cplx a_k = tf.conditional_amp(i.k_set, kv, i.e_set, ev, cfg);
        IndexSet jk = set_union(i.j_set, i.k_set);
        std::vector<int> jkv = merge_values(i.j_set, jv, i.k_set, kv);
        cplx a_jk = tf.conditional_amp(jk, jkv, i.e_set, ev, cfg);
        rep.max_residual = std::max(rep.max_residual, std::abs(a_jk - a_j * a_k));
      }
    }
  }
  rep.value = rep.max_residual <= tol;
  return rep;
}

bool tau(TauKind kind, const ProbTensor& p, const Independency& i, double tol, const Config& cfg) {
  return tau_detailed(kind, p, i, tol, cfg).value;
}

bool tau(TauKind kind, const ThetaField& tf, const Independency& i, double tol, const Config& cfg) {
  return tau_detailed(kind, tf, i, tol, cfg).value;
}

namespace {

template <typename Model>
ISet prob_iset_impl(TauKind kind, const Model& m, int n, double tol, const Config& cfg) {
  ISet out;
  for (const Independency& i : enumerate_triples(n, cfg))
    if (tau(kind, m, i, tol, cfg)) out.push_back(i);
  return out;
}

}  // namespace

ISet prob_iset(TauKind kind, const ProbTensor& p, double tol, const Config& cfg) {
  return prob_iset_impl(kind, p, int(p.scope().size()), tol, cfg);
}

ISet prob_iset(TauKind kind, const ThetaField& tf, double tol, const Config& cfg) {
  return prob_iset_impl(kind, tf, int(tf.scope().size()), tol, cfg);
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Decomposition: return "decomposition";
    case Rule::WeakUnion: return "weak_union";
    case Rule::Contraction: return "contraction";
    case Rule::Intersection: return "intersection";
  }
  return "?";
}

namespace {

std::string describe_sets(const IndexSet& x, const IndexSet& y1, const IndexSet& y2,
                          const IndexSet& e) {
  auto show = [](const IndexSet& s) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "}";
    return os.str();
  };
  return "x=" + show(x) + " y1=" + show(y1) + " y2=" + show(y2) + " e=" + show(e);
}

template <typename Model>
bool model_strictly_positive(const Model&);

template <>
bool model_strictly_positive(const ProbTensor& p) {
  for (double v : p.entries())
    if (v <= 0.0) return false;
  return true;
}

template <>
bool model_strictly_positive(const ThetaField& tf) {
  for (std::size_t i = 0; i < tf.base().entries().size(); ++i)
    if (tf.unconstrained(i)) return false;
  return true;
}

template <typename Model>
RulesReport check_rules_impl(TauKind kind, const Model& m, int n, double tol, const Config& cfg) {
  if (n > cfg.enumeration_limit)
    fail(Errc::GraphTooLargeForGlobalEnumeration,
         std::to_string(n) + " nodes exceeds limit " + std::to_string(cfg.enumeration_limit));

  RulesReport rep;
  rep.informational = kind == TauKind::CMI || kind == TauKind::CMIP;
  rep.intersection_checked = model_strictly_positive(m);

  std::map<Independency, bool> cache;
  auto t = [&](IndexSet j, IndexSet k, IndexSet e) {
    Independency i = Independency::make(std::move(j), std::move(k), std::move(e));
    auto it = cache.find(i);
    if (it != cache.end()) return it->second;
    bool v = tau(kind, m, i, tol, cfg);
    cache.emplace(i, v);
    return v;
  };

  std::size_t total = 1;
  for (int v = 0; v < n; ++v) total *= 5;  // x / y1 / y2 / e / out
  for (std::size_t code = 0; code < total; ++code) {
    IndexSet x, y1, y2, e;
    std::size_t c = code;
    for (int v = 0; v < n; ++v) {
      switch (c % 5) {
        case 0: x.push_back(v); break;
        case 1: y1.push_back(v); break;
        case 2: y2.push_back(v); break;
        case 3: e.push_back(v); break;
        default: break;
      }
      c /= 5;
    }
    if (x.empty() || y1.empty() || y2.empty()) continue;
    ++rep.instantiations;

    IndexSet y12 = set_union(y1, y2);
    IndexSet y2e = set_union(y2, e);
    IndexSet y1e = set_union(y1, e);
    bool whole = t(x, y12, e);

    if (whole && !t(x, y2, e))
      rep.violations.push_back({Rule::Decomposition, describe_sets(x, y1, y2, e)});
    if (whole && !t(x, y1, y2e))
      rep.violations.push_back({Rule::WeakUnion, describe_sets(x, y1, y2, e)});
    if (t(x, y1, y2e) && t(x, y2, e) && !whole)
      rep.violations.push_back({Rule::Contraction, describe_sets(x, y1, y2, e)});
    if (rep.intersection_checked && t(x, y1, y2e) && t(x, y2, y1e) && !whole)
      rep.violations.push_back({Rule::Intersection, describe_sets(x, y1, y2, e)});
  }
  return rep;
}

}  // namespace

RulesReport check_rules(TauKind kind, const ProbTensor& p, double tol, const Config& cfg) {
  if (kind != TauKind::P) fail(Errc::InvalidKind, "probability models check tau^P rules");
  return check_rules_impl(kind, p, int(p.scope().size()), tol, cfg);
}

RulesReport check_rules(TauKind kind, const ThetaField& tf, double tol, const Config& cfg) {
  if (kind == TauKind::P) fail(Errc::InvalidKind, "tau^P rules take a probability tensor");
  return check_rules_impl(kind, tf, int(tf.scope().size()), tol, cfg);
}

AgreementResult all_encompassing_agreement(const ThetaField& tf, const Independency& i, double tol,
                                           const Config& cfg) {
  if (!i.all_encompassing(int(tf.scope().size())))
    fail(Errc::NotAllEncompassing, "|J|+|K|+|E| must equal the variable count");
  AgreementResult out;
  out.tau_a = tau(TauKind::A, tf, i, tol, cfg);
  out.tau_cmip = tau(TauKind::CMIP, tf, i, tol, cfg);
  if (out.tau_a != out.tau_cmip)
    fail(Errc::ToleranceInconsistency,
         std::string("tau^A=") + (out.tau_a ? "true" : "false") + " vs tau^CMI'=" +
             (out.tau_cmip ? "true" : "false") + " on an all-encompassing independency");
  return out;
}

namespace {

template <typename G, typename SepFn>
CertificateResult certificate_impl(const G& g, SepFn sep, const AmplitudeTensor& joint,
                                   const IndexSet& j_set, const IndexSet& k_set,
                                   const IndexSet& ungroundable, const Config& cfg) {
  const VariableSpace& space = g.space();
  check_in_range(space, j_set, "J");
  check_in_range(space, k_set, "K");
  if (!sets_disjoint(j_set, k_set)) fail(Errc::SetsNotDisjoint, "J and K overlap");
  if (!sets_disjoint(j_set, ungroundable) || !sets_disjoint(k_set, ungroundable))
    fail(Errc::SetsNotDisjoint, "queried sets include coherently-summed nodes");

  IndexSet all = space.all_indices();
  IndexSet e = set_minus(set_minus(set_minus(all, j_set), k_set), ungroundable);

  CertificateResult out;
  out.certified_zero = sep(g, Independency{j_set, k_set, e});
  if (out.certified_zero) out.witness = e;

  // One-extension upper bound from the reduced state: coherently-summed
  // variables leave the purification, everything else stays and E is
  // diagonalized.
  DensityMatrix mu = meta_density(joint, cfg);
  ScopedMatrix state = mu.scoped();
  if (!ungroundable.empty()) {
    state = superop(state, SuperOpKind::EntrySum, ungroundable);
    cplx tr = state.m.trace();
    if (std::abs(tr) < 1e-300) fail(Errc::ZeroDenominator, "entry-summed state has zero trace");
    state.m = state.m.scaled(1.0 / tr.real());
  }
  if (!e.empty()) state = superop(state, SuperOpKind::Diag, e);
  DensityMatrix rho = DensityMatrix::make(state.space, state.scope, std::move(state.m), cfg);
  out.upper_bound = 0.5 * quantum_cmi(rho, j_set, k_set, e, cfg).value;
  return out;
}

}  // namespace

CertificateResult entanglement_zero_certificate(const Dag& g, const AmplitudeTensor& joint,
                                                const IndexSet& j_set, const IndexSet& k_set,
                                                const IndexSet& ungroundable, const Config& cfg) {
  return certificate_impl(
      g, [](const Dag& d, const Independency& i) { return d_separated_dag(d, i); }, joint, j_set,
      k_set, ungroundable, cfg);
}

CertificateResult entanglement_zero_certificate(const Ug& g, const AmplitudeTensor& joint,
                                                const IndexSet& j_set, const IndexSet& k_set,
                                                const IndexSet& ungroundable, const Config& cfg) {
  return certificate_impl(
      g, [](const Ug& u, const Independency& i) { return separated_ug(u, i); }, joint, j_set,
      k_set, ungroundable, cfg);
}

}  // namespace qbn
