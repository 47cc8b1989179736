#include "qbn/amplitudes.hpp"

#include <algorithm>
#include <cmath>

namespace qbn {

namespace {

constexpr double kZeroMag = 1e-300;

double wrap_phase(double x) {
  double r = std::remainder(x, 2.0 * M_PI);
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

std::vector<int> positions_of(const IndexSet& scope, const IndexSet& sub) {
  std::vector<int> pos;
  pos.reserve(sub.size());
  for (int v : sub) {
    auto it = std::lower_bound(scope.begin(), scope.end(), v);
    if (it == scope.end() || *it != v) fail(Errc::ScopeMismatch, "variable not in field scope");
    pos.push_back(int(it - scope.begin()));
  }
  return pos;
}

}  // namespace

ThetaField::ThetaField(AmplitudeTensor a, Assignment ref)
    : base_(std::move(a)), reference_(std::move(ref)) {}

ThetaField ThetaField::from_amplitude(AmplitudeTensor a, Assignment reference,
                                      ReferencePolicy policy, const Config& cfg) {
  if (reference.scope != a.scope())
    fail(Errc::ScopeMismatch, "reference must assign every variable in scope");
  cplx ref_amp = a.at(a.indexer().flatten(reference.values));
  bool ref_zero = std::abs(ref_amp) < kZeroMag;
  if (ref_zero && policy == ReferencePolicy::Strict && cfg.eps <= 0.0)
    fail(Errc::ZeroReferenceAmplitude, "amplitude vanishes at the reference state");

  ThetaField tf(std::move(a), std::move(reference));
  tf.reference_zero_ = ref_zero;
  tf.global_phase_ = ref_zero ? 0.0 : std::arg(ref_amp);
  std::size_t n = tf.base_.entries().size();
  tf.theta_.resize(n);
  tf.prob_.resize(n);
  tf.unconstrained_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cplx z = tf.base_.at(i);
    tf.prob_[i] = std::norm(z);
    if (std::abs(z) < kZeroMag) {
      tf.theta_[i] = 0.0;
      tf.unconstrained_[i] = 1;
    } else {
      tf.theta_[i] = wrap_phase(std::arg(z) - tf.global_phase_);
    }
  }
  return tf;
}

ThetaField theta_field(const AmplitudeTensor& a, const Config& cfg) {
  Assignment ref{a.scope(), std::vector<int>(a.scope().size(), 0)};
  return ThetaField::from_amplitude(a, std::move(ref), ThetaField::ReferencePolicy::AllowZero, cfg);
}

ThetaField theta_field(const AmplitudeTensor& a, const Assignment& reference,
                       ThetaField::ReferencePolicy policy, const Config& cfg) {
  return ThetaField::from_amplitude(a, reference, policy, cfg);
}

Assignment scan_reference(const AmplitudeTensor& a, const Config& cfg) {
  double threshold = std::max(10.0 * cfg.eps, kZeroMag);
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    if (std::abs(a.at(i)) > threshold) return Assignment{a.scope(), a.indexer().unflatten(i)};
  fail(Errc::ZeroReferenceAmplitude, "no assignment with |A| above threshold");
}

std::size_t ThetaField::anchored_flat(const IndexSet& sub, const std::vector<int>& values) const {
  auto pos = positions_of(scope(), sub);
  return base_.indexer().flatten_positions(pos, values, reference_.values);
}

double ThetaField::marginal_prob(const IndexSet& sub, const std::vector<int>& values) const {
  auto pos = positions_of(scope(), sub);
  const ScopeIndexer& idx = base_.indexer();
  double total = 0.0;
  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    std::vector<int> digits = idx.unflatten(flat);
    bool match = true;
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (digits[std::size_t(pos[i])] != values[i]) {
        match = false;
        break;
      }
    if (match) total += prob_[flat];
  }
  return total;
}

double ThetaField::marginal_theta(const IndexSet& sub, const std::vector<int>& values) const {
  return theta_[anchored_flat(sub, values)];
}

cplx ThetaField::marginal_amp(const IndexSet& sub, const std::vector<int>& values) const {
  double p = marginal_prob(sub, values);
  double th = marginal_theta(sub, values);
  return std::polar(std::sqrt(p), th);
}

cplx ThetaField::conditional_amp(const IndexSet& j1, const std::vector<int>& v1,
                                 const IndexSet& j2, const std::vector<int>& v2,
                                 const Config& cfg) const {
  if (!sets_disjoint(j1, j2)) fail(Errc::SetsNotDisjoint, "conditional amplitude sets overlap");
  IndexSet both = set_union(j1, j2);
  std::vector<int> vboth(both.size());
  for (std::size_t i = 0; i < both.size(); ++i) {
    int var = both[i];
    auto it = std::lower_bound(j1.begin(), j1.end(), var);
    if (it != j1.end() && *it == var)
      vboth[i] = v1[std::size_t(it - j1.begin())];
    else {
      auto it2 = std::lower_bound(j2.begin(), j2.end(), var);
      vboth[i] = v2[std::size_t(it2 - j2.begin())];
    }
  }
  double p12 = marginal_prob(both, vboth);
  double p2 = j2.empty() ? 1.0 : marginal_prob(j2, v2);
  if (p2 <= 0.0) {
    if (cfg.eps <= 0.0) fail(Errc::ZeroConditionMass, "conditioning marginal vanishes");
    p2 = cfg.eps;
  }
  double th12 = marginal_theta(both, vboth);
  double th2 = j2.empty() ? 0.0 : marginal_theta(j2, v2);
  return std::polar(std::sqrt(p12 / p2), th12 - th2);
}

std::size_t ConditionalTable::free_parameters() const {
  return std::size_t(table.cols()) * std::size_t(table.rows() - 1);
}

namespace {

ConditionalTable conditional_table(const ThetaField& tf, int var, const IndexSet& given,
                                   const Config& cfg, bool carry_global_phase) {
  const VariableSpace& space = tf.space();
  ScopeIndexer given_idx(space, given);
  ConditionalTable out{var, given, ComplexMatrix(space.state_count(var), int(given_idx.total()))};
  cplx phase = carry_global_phase ? std::polar(1.0, tf.global_phase()) : cplx(1.0);
  for (std::size_t col = 0; col < given_idx.total(); ++col) {
    std::vector<int> gv = given_idx.unflatten(col);
    for (int s = 0; s < space.state_count(var); ++s)
      out.table.at(s, int(col)) = phase * tf.conditional_amp({var}, {s}, given, gv, cfg);
  }
  return out;
}

void require_nonzero_everywhere(const ThetaField& tf, const Config& cfg) {
  if (cfg.eps > 0.0) return;
  for (std::size_t i = 0; i < tf.base().entries().size(); ++i)
    if (tf.unconstrained(i))
      fail(Errc::ZeroAmplitudeStrictMode,
           "amplitude vanishes at point " + std::to_string(i) + "; strict mode");
}

}  // namespace

std::vector<ConditionalTable> chain_factorize(const ThetaField& tf, const std::vector<int>& order,
                                              const Config& cfg) {
  IndexSet check = sorted_unique(IndexSet(order.begin(), order.end()));
  if (check != tf.scope()) fail(Errc::ScopeMismatch, "order must be a permutation of the scope");
  require_nonzero_everywhere(tf, cfg);

  std::vector<ConditionalTable> out;
  IndexSet given;
  for (std::size_t m = 0; m < order.size(); ++m) {
    out.push_back(conditional_table(tf, order[m], given, cfg, m == 0));
    given = set_union(given, {order[m]});
  }
  return out;
}

AmplitudeTensor product_of_tables(const ThetaField& like, const std::vector<ConditionalTable>& tables) {
  const ScopeIndexer& idx = like.base().indexer();
  const IndexSet& scope = like.scope();
  std::vector<cplx> entries(idx.total());
  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    std::vector<int> digits = idx.unflatten(flat);
    cplx prod = 1.0;
    for (const ConditionalTable& t : tables) {
      auto var_pos = positions_of(scope, {t.var});
      auto given_pos = positions_of(scope, t.given);
      std::vector<int> gv(t.given.size());
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = digits[std::size_t(given_pos[i])];
      ScopeIndexer gidx(like.space(), t.given);
      prod *= t.table.at(digits[std::size_t(var_pos[0])], int(gidx.flatten(gv)));
    }
    entries[flat] = prod;
  }
  return AmplitudeTensor(like.base().space_ptr(), scope, std::move(entries));
}

std::vector<cplx> mobius_forward(std::vector<cplx> g, int n, const Config& cfg) {
  if (n > cfg.mobius_ground_limit) fail(Errc::GroundSetTooLarge, std::to_string(n) + " elements");
  std::size_t size = std::size_t(1) << n;
  if (g.size() != size) fail(Errc::ScopeMismatch, "table size != 2^n");
  for (int b = 0; b < n; ++b)
    for (std::size_t mask = 0; mask < size; ++mask)
      if (mask & (std::size_t(1) << b)) g[mask] += g[mask ^ (std::size_t(1) << b)];
  return g;
}

std::vector<cplx> mobius_invert(std::vector<cplx> f, int n, const Config& cfg) {
  if (n > cfg.mobius_ground_limit) fail(Errc::GroundSetTooLarge, std::to_string(n) + " elements");
  std::size_t size = std::size_t(1) << n;
  if (f.size() != size) fail(Errc::ScopeMismatch, "table size != 2^n");
  for (int b = 0; b < n; ++b)
    for (std::size_t mask = 0; mask < size; ++mask)
      if (mask & (std::size_t(1) << b)) f[mask] -= f[mask ^ (std::size_t(1) << b)];
  return f;
}

namespace {

// ln A at a reference-anchored point, branch fixed by the theta field. The
// reference phase is folded back in so that exp sums rebuild A itself.
cplx log_amp_at(const ThetaField& tf, std::size_t flat, const Config& cfg) {
  double p = tf.prob(flat);
  if (p <= 0.0) {
    if (cfg.eps <= 0.0) fail(Errc::ZeroAmplitudeStrictMode, "ln A at zero-amplitude point");
    p = cfg.eps * cfg.eps;
  }
  return cplx(0.5 * std::log(p), tf.theta(flat) + tf.global_phase());
}

}  // namespace

LambdaTable powerset_lambda(const ThetaField& tf, const Config& cfg) {
  int n = int(tf.scope().size());
  if (n > cfg.mobius_ground_limit) fail(Errc::GroundSetTooLarge, std::to_string(n) + " variables");
  const ScopeIndexer& idx = tf.base().indexer();

  LambdaTable out;
  out.scope = tf.scope();
  std::size_t masks = std::size_t(1) << n;
  // Subset assignment indexers, one per mask.
  std::vector<ScopeIndexer> sub_idx;
  sub_idx.reserve(masks);
  for (std::size_t mask = 0; mask < masks; ++mask) {
    IndexSet sub;
    for (int b = 0; b < n; ++b)
      if (mask & (std::size_t(1) << b)) sub.push_back(tf.scope()[std::size_t(b)]);
    sub_idx.emplace_back(tf.space(), sub);
    out.lambda[std::uint32_t(mask)].assign(sub_idx.back().total(), cplx(0.0));
  }

  // Per full assignment: anchor every subset restriction, Mobius-invert over
  // the mask lattice, scatter into the tables (duplicates agree).
  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    std::vector<int> digits = idx.unflatten(flat);
    std::vector<cplx> f(masks);
    for (std::size_t mask = 0; mask < masks; ++mask) {
      std::vector<int> anchored = tf.reference().values;
      for (int b = 0; b < n; ++b)
        if (mask & (std::size_t(1) << b)) anchored[std::size_t(b)] = digits[std::size_t(b)];
      f[mask] = log_amp_at(tf, idx.flatten(anchored), cfg);
    }
    std::vector<cplx> g = mobius_invert(std::move(f), n, cfg);
    for (std::size_t mask = 0; mask < masks; ++mask) {
      std::vector<int> restricted;
      for (int b = 0; b < n; ++b)
        if (mask & (std::size_t(1) << b)) restricted.push_back(digits[std::size_t(b)]);
      out.lambda[std::uint32_t(mask)][sub_idx[mask].flatten(restricted)] = g[mask];
    }
  }
  return out;
}

AmplitudeTensor lambda_product(const ThetaField& like, const LambdaTable& table) {
  const ScopeIndexer& idx = like.base().indexer();
  int n = int(like.scope().size());
  std::vector<cplx> entries(idx.total());
  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    std::vector<int> digits = idx.unflatten(flat);
    cplx log_sum = 0.0;
    for (const auto& [mask, values] : table.lambda) {
      IndexSet sub;
      std::vector<int> restricted;
      for (int b = 0; b < n; ++b)
        if (mask & (std::uint32_t(1) << b)) {
          sub.push_back(like.scope()[std::size_t(b)]);
          restricted.push_back(digits[std::size_t(b)]);
        }
      ScopeIndexer sidx(like.space(), sub);
      log_sum += values[sidx.flatten(restricted)];
    }
    entries[flat] = std::exp(log_sum);
  }
  return AmplitudeTensor(like.base().space_ptr(), like.scope(), std::move(entries));
}

namespace {

bool amp_close(cplx lhs, cplx rhs, const Config& cfg) {
  return std::abs(lhs - rhs) <= cfg.factor_abs_tol + cfg.factor_rel_tol * std::abs(rhs);
}

}  // namespace

bool factors_according_dag(const ThetaField& tf, const Dag& g, const Config& cfg) {
  if (g.space() != tf.space()) fail(Errc::ScopeMismatch, "graph and field spaces differ");
  const ScopeIndexer& idx = tf.base().indexer();
  const IndexSet& scope = tf.scope();

  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    std::vector<int> digits = idx.unflatten(flat);
    cplx prod = std::polar(1.0, tf.global_phase());
    bool vacuous = false;
    for (int j : scope) {
      const IndexSet& pa = g.parents(j);
      auto pa_pos = positions_of(scope, pa);
      std::vector<int> pav(pa.size());
      for (std::size_t i = 0; i < pa.size(); ++i) pav[i] = digits[std::size_t(pa_pos[i])];
      double mass = pa.empty() ? 1.0 : tf.marginal_prob(pa, pav);
      if (mass <= 0.0 && cfg.eps <= 0.0) {
        // A vanishing parent marginal forces A = 0 at this point; the
        // factorization equation holds in the eps limit.
        vacuous = true;
        break;
      }
      auto var_pos = positions_of(scope, {j});
      prod *= tf.conditional_amp({j}, {digits[std::size_t(var_pos[0])]}, pa, pav, cfg);
    }
    if (vacuous) {
      if (std::abs(tf.base().at(flat)) > cfg.factor_abs_tol) return false;
      continue;
    }
    if (!amp_close(prod, tf.base().at(flat), cfg)) return false;
  }
  return true;
}

bool factors_according_ug(const ThetaField& tf, const Ug& g, const Config& cfg) {
  if (g.space() != tf.space()) fail(Errc::ScopeMismatch, "graph and field spaces differ");
  require_nonzero_everywhere(tf, cfg);
  int n = int(tf.scope().size());

  std::vector<IndexSet> cliques = super_cliques(g);
  LambdaTable table = powerset_lambda(tf, cfg);
  for (const auto& [mask, values] : table.lambda) {
    IndexSet sub;
    for (int b = 0; b < n; ++b)
      if (mask & (std::uint32_t(1) << b)) sub.push_back(tf.scope()[std::size_t(b)]);
    bool inside = false;
    for (const IndexSet& c : cliques)
      if (is_subset(sub, c)) {
        inside = true;
        break;
      }
    if (inside) continue;
    // lambda == 0 compared multiplicatively, so phases count modulo 2 pi.
    for (const cplx& lam : values)
      if (std::abs(std::exp(lam) - cplx(1.0)) > cfg.factor_rel_tol) return false;
  }
  return true;
}

AmplitudeTensor build_amplitude_from_bnet(const Dag& g, const std::vector<ConditionalTable>& tables,
                                          const Config& cfg) {
  const VariableSpace& space = g.space();
  if (int(tables.size()) != space.size())
    fail(Errc::ValidationError, "need exactly one table per node");
  std::vector<const ConditionalTable*> by_var(std::size_t(space.size()), nullptr);
  for (const ConditionalTable& t : tables) {
    if (t.var < 0 || t.var >= space.size()) fail(Errc::IndexOutOfRange, "table node index");
    if (t.given != g.parents(t.var))
      fail(Errc::ValidationError, "table for node " + space.var(t.var).name +
                                      " is not keyed by its parent set");
    if (by_var[std::size_t(t.var)]) fail(Errc::ValidationError, "duplicate table");
    by_var[std::size_t(t.var)] = &t;
    for (int col = 0; col < t.table.cols(); ++col) {
      double nrm = 0.0;
      for (int row = 0; row < t.table.rows(); ++row) nrm += std::norm(t.table.at(row, col));
      if (std::abs(nrm - 1.0) > cfg.norm_tol)
        fail(Errc::UnnormalizedNodeTable, "node " + space.var(t.var).name + " column " +
                                              std::to_string(col) + " has squared norm " +
                                              std::to_string(nrm));
    }
  }

  IndexSet scope = space.all_indices();
  ScopeIndexer idx(space, scope);
  std::vector<cplx> entries(idx.total());
  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    std::vector<int> digits = idx.unflatten(flat);
    cplx prod = 1.0;
    for (int j = 0; j < space.size(); ++j) {
      const ConditionalTable& t = *by_var[std::size_t(j)];
      ScopeIndexer gidx(space, t.given);
      std::vector<int> gv(t.given.size());
      for (std::size_t i = 0; i < t.given.size(); ++i) gv[i] = digits[std::size_t(t.given[i])];
      prod *= t.table.at(digits[std::size_t(j)], int(gidx.flatten(gv)));
    }
    entries[flat] = prod;
  }
  return AmplitudeTensor(g.space_ptr(), scope, std::move(entries), cfg);
}

AmplitudeTensor build_amplitude_from_mnet(const Ug& g,
                                          const std::map<IndexSet, std::vector<cplx>>& affinities,
                                          const Config& cfg) {
  const VariableSpace& space = g.space();
  std::vector<IndexSet> cliques = super_cliques(g);
  for (const IndexSet& c : cliques)
    if (!affinities.count(c))
      fail(Errc::ValidationError, "missing affinity table for a super-clique");
  if (affinities.size() != cliques.size())
    fail(Errc::ValidationError, "affinity table does not match the super-clique set");

  IndexSet scope = space.all_indices();
  ScopeIndexer idx(space, scope);
  std::vector<cplx> entries(idx.total());
  double norm2 = 0.0;
  for (std::size_t flat = 0; flat < idx.total(); ++flat) {
    std::vector<int> digits = idx.unflatten(flat);
    cplx prod = 1.0;
    for (const IndexSet& c : cliques) {
      ScopeIndexer cidx(space, c);
      std::vector<int> cv(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) cv[i] = digits[std::size_t(c[i])];
      const std::vector<cplx>& tab = affinities.at(c);
      if (tab.size() != cidx.total()) fail(Errc::ValidationError, "affinity table size mismatch");
      prod *= tab[cidx.flatten(cv)];
    }
    entries[flat] = prod;
    norm2 += std::norm(prod);
  }
  if (norm2 <= 0.0) fail(Errc::AllZeroAffinityProduct, "affinity product vanishes identically");
  double denom = std::sqrt(norm2);
  for (cplx& z : entries) z /= denom;
  return AmplitudeTensor(g.space_ptr(), scope, std::move(entries), cfg);
}

FpToCpResult fp_to_cp(const ComplexMatrix& f) {
  if (f.rows() < 1) fail(Errc::ValidationError, "transition table needs at least one row");
  int n = f.cols();
  std::vector<double> phi(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    cplx z = f.at(0, k);
    phi[std::size_t(k)] = std::abs(z) < kZeroMag ? 0.0 : std::arg(z);
  }
  FpToCpResult out{ComplexMatrix(f.rows(), n), ComplexMatrix(n, n), ComplexMatrix(n, n)};
  for (int r = 0; r < f.rows(); ++r)
    for (int k = 0; k < n; ++k)
      out.c1.at(r, k) = f.at(r, k) * std::polar(1.0, -phi[std::size_t(k)]);
  for (int k = 0; k < n; ++k) {
    out.c2.at(k, k) = k == 0 ? cplx(1.0) : std::polar(1.0, phi[std::size_t(k)]);
    out.c3.at(k, k) = k == 0 ? std::polar(1.0, phi[0]) : cplx(1.0);
  }
  return out;
}

}  // namespace qbn
