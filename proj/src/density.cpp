#include "qbn/density.hpp"

#include <algorithm>
#include <cmath>

#include "qbn/rng.hpp"

namespace qbn {

cplx ScopedMatrix::scalar() const {
  if (!scope.empty() || m.rows() != 1 || m.cols() != 1)
    fail(Errc::ScopeMismatch, "operator is not a scalar");
  return m.at(0, 0);
}

const VariableSpace& DensityMatrix::empty_space() {
  static const VariableSpace s{};
  return s;
}

DensityMatrix DensityMatrix::make(SpacePtr space, IndexSet scope, ComplexMatrix m,
                                  const Config& cfg) {
  std::size_t side = space->joint_states(scope);
  if (m.rows() != m.cols() || std::size_t(m.rows()) != side)
    fail(Errc::ScopeMismatch, "density matrix side does not match scope joint states");
  if (!m.is_hermitian(cfg.hermitian_tol)) fail(Errc::NotHermitian, "density matrix");
  cplx tr = m.trace();
  if (std::abs(tr - cplx(1.0)) > cfg.trace_tol)
    fail(Errc::TraceNotOne, "trace = " + std::to_string(tr.real()));
  return DensityMatrix(ScopedMatrix{std::move(space), std::move(scope), std::move(m)});
}

void MeasurementPlan::validate(const VariableSpace& space, const IndexSet& full_scope) const {
  check_in_range(space, z_vis, "z_vis");
  check_in_range(space, z_asum, "z_asum");
  check_in_range(space, z_psum, "z_psum");
  if (!sets_disjoint(z_vis, z_asum) || !sets_disjoint(z_vis, z_psum) ||
      !sets_disjoint(z_asum, z_psum))
    fail(Errc::SetsNotDisjoint, "measurement plan parts overlap");
  if (set_union(set_union(z_vis, z_asum), z_psum) != full_scope)
    fail(Errc::ScopeMismatch, "measurement plan does not cover the variable set");
  if (!is_subset(z_pre, z_vis)) fail(Errc::ScopeMismatch, "z_pre must be a subset of z_vis");
}

DensityMatrix meta_density(const AmplitudeTensor& a, const Config& cfg) {
  if (!a.normalized()) fail(Errc::NotNormalized, "meta density needs a normalized amplitude");
  int n = int(a.entries().size());
  ComplexMatrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      m.at(r, c) = a.at(static_cast<std::size_t>(r)) * std::conj(a.at(static_cast<std::size_t>(c)));
  return DensityMatrix::make(a.space_ptr(), a.scope(), std::move(m), cfg);
}

namespace {

struct ScopeSplit {
  ScopeIndexer in;          // full scope
  ScopeIndexer kept;        // scope minus target
  ScopeIndexer target;      // target alone
  std::vector<int> kept_pos, target_pos;

  ScopeSplit(const VariableSpace& space, const IndexSet& scope, const IndexSet& tgt)
      : in(space, scope), kept(space, set_minus(scope, tgt)), target(space, tgt) {
    for (std::size_t i = 0; i < scope.size(); ++i) {
      if (set_contains(tgt, scope[i]))
        target_pos.push_back(int(i));
      else
        kept_pos.push_back(int(i));
    }
  }

  std::size_t merge(std::size_t kept_flat, std::size_t target_flat) const {
    std::vector<int> digits(in.arity());
    std::vector<int> kd = kept.unflatten(kept_flat);
    std::vector<int> td = target.unflatten(target_flat);
    for (std::size_t i = 0; i < kd.size(); ++i) digits[std::size_t(kept_pos[i])] = kd[i];
    for (std::size_t i = 0; i < td.size(); ++i) digits[std::size_t(target_pos[i])] = td[i];
    return in.flatten(digits);
  }
};

}  // namespace

ScopedMatrix superop(const ScopedMatrix& in, SuperOpKind kind, const IndexSet& target,
                     const std::optional<Assignment>& value) {
  if (!is_subset(target, in.scope)) fail(Errc::ScopeMismatch, "target not within operator scope");

  if (kind == SuperOpKind::Diag) {
    ScopeSplit sp(*in.space, in.scope, target);
    ComplexMatrix out = in.m;
    for (std::size_t r = 0; r < sp.in.total(); ++r) {
      std::vector<int> rd = sp.in.unflatten(r);
      for (std::size_t c = 0; c < sp.in.total(); ++c) {
        std::vector<int> cd = sp.in.unflatten(c);
        for (int pos : sp.target_pos)
          if (rd[std::size_t(pos)] != cd[std::size_t(pos)]) {
            out.at(int(r), int(c)) = 0.0;
            break;
          }
      }
    }
    return ScopedMatrix{in.space, in.scope, std::move(out)};
  }

  ScopeSplit sp(*in.space, in.scope, target);
  IndexSet kept_scope = set_minus(in.scope, target);
  ComplexMatrix out(int(sp.kept.total()), int(sp.kept.total()));

  std::size_t fixed = 0;
  if (kind == SuperOpKind::Entry) {
    if (!value) fail(Errc::MissingValue, "entry super-operator needs a target assignment");
    if (value->scope != target) fail(Errc::ScopeMismatch, "entry value must cover the target");
    fixed = sp.target.flatten(value->values);
  }

  for (std::size_t r = 0; r < sp.kept.total(); ++r)
    for (std::size_t c = 0; c < sp.kept.total(); ++c) {
      cplx acc = 0.0;
      switch (kind) {
        case SuperOpKind::Entry:
          acc = in.m.at(int(sp.merge(r, fixed)), int(sp.merge(c, fixed)));
          break;
        case SuperOpKind::EntrySum:
          for (std::size_t t = 0; t < sp.target.total(); ++t)
            for (std::size_t t2 = 0; t2 < sp.target.total(); ++t2)
              acc += in.m.at(int(sp.merge(r, t)), int(sp.merge(c, t2)));
          break;
        case SuperOpKind::Trace:
          for (std::size_t t = 0; t < sp.target.total(); ++t)
            acc += in.m.at(int(sp.merge(r, t)), int(sp.merge(c, t)));
          break;
        case SuperOpKind::Diag:
          break;  // handled above
      }
      out.at(int(r), int(c)) = acc;
    }
  return ScopedMatrix{in.space, kept_scope, std::move(out)};
}

DensityMatrix partial_trace(const DensityMatrix& rho, const IndexSet& drop, const Config& cfg) {
  ScopedMatrix out = superop(rho.scoped(), SuperOpKind::Trace, drop);
  return DensityMatrix::make(out.space, out.scope, std::move(out.m), cfg);
}

namespace {

ProbTensor normalize_outcome_values(SpacePtr space, const IndexSet& vis,
                                    std::vector<double> vals, const Config& cfg) {
  double total = 0.0;
  for (double& v : vals) {
    if (v < 0.0 && v > -1e-12) v = 0.0;  // rounding guard on |.|^2 sums
    total += v;
  }
  if (total <= 0.0) fail(Errc::ZeroDenominator, "all-outcome probability sum vanishes");
  for (double& v : vals) v /= total;
  return ProbTensor(std::move(space), vis, std::move(vals), cfg);
}

}  // namespace

ProbTensor measurement_distribution(const AmplitudeTensor& a, const MeasurementPlan& plan,
                                    const Config& cfg) {
  plan.validate(a.space(), a.scope());
  DensityMatrix mu = meta_density(a, cfg);
  ScopedMatrix traced = superop(mu.scoped(), SuperOpKind::Trace, plan.z_psum);
  ScopedMatrix summed = superop(traced, SuperOpKind::EntrySum, plan.z_asum);

  ScopeIndexer vis_idx(a.space(), plan.z_vis);
  std::vector<double> vals(vis_idx.total());
  for (std::size_t o = 0; o < vis_idx.total(); ++o) {
    Assignment out{plan.z_vis, vis_idx.unflatten(o)};
    vals[o] = superop(summed, SuperOpKind::Entry, plan.z_vis, out).scalar().real();
  }
  return normalize_outcome_values(a.space_ptr(), plan.z_vis, std::move(vals), cfg);
}

ProbTensor measurement_distribution_projector(const AmplitudeTensor& a,
                                              const MeasurementPlan& plan, const Config& cfg) {
  plan.validate(a.space(), a.scope());
  DensityMatrix mu = meta_density(a, cfg);

  const ScopeIndexer& full = a.indexer();
  ScopeIndexer vis_idx(a.space(), plan.z_vis);
  ScopeIndexer asum_idx(a.space(), plan.z_asum);
  ScopeIndexer psum_idx(a.space(), plan.z_psum);

  std::vector<int> vis_pos, asum_pos, psum_pos;
  for (std::size_t i = 0; i < a.scope().size(); ++i) {
    int v = a.scope()[i];
    if (set_contains(plan.z_vis, v)) vis_pos.push_back(int(i));
    else if (set_contains(plan.z_asum, v)) asum_pos.push_back(int(i));
    else psum_pos.push_back(int(i));
  }

  double av_norm = std::sqrt(double(asum_idx.total()));
  std::vector<double> vals(vis_idx.total(), 0.0);
  std::vector<int> digits(full.arity());
  for (std::size_t o = 0; o < vis_idx.total(); ++o) {
    std::vector<int> od = vis_idx.unflatten(o);
    double acc = 0.0;
    for (std::size_t pblock = 0; pblock < psum_idx.total(); ++pblock) {
      std::vector<int> pd = psum_idx.unflatten(pblock);
      // w = |outcome> (x) |AV over Z_Asum> (x) |pblock>, then <w| mu |w>.
      std::vector<std::size_t> support;
      support.reserve(asum_idx.total());
      for (std::size_t t = 0; t < asum_idx.total(); ++t) {
        std::vector<int> td = asum_idx.unflatten(t);
        for (std::size_t i = 0; i < od.size(); ++i) digits[std::size_t(vis_pos[i])] = od[i];
        for (std::size_t i = 0; i < td.size(); ++i) digits[std::size_t(asum_pos[i])] = td[i];
        for (std::size_t i = 0; i < pd.size(); ++i) digits[std::size_t(psum_pos[i])] = pd[i];
        support.push_back(full.flatten(digits));
      }
      cplx exp_val = 0.0;
      for (std::size_t r : support)
        for (std::size_t c : support)
          exp_val += mu.matrix().at(int(r), int(c));
      acc += exp_val.real() / (av_norm * av_norm);
    }
    vals[o] = acc;
  }
  return normalize_outcome_values(a.space_ptr(), plan.z_vis, std::move(vals), cfg);
}

double measurement_prob(const AmplitudeTensor& a, const MeasurementPlan& plan,
                        const Assignment& outcome, const Config& cfg) {
  if (outcome.scope != plan.z_vis) fail(Errc::ScopeMismatch, "outcome must cover z_vis");
  ProbTensor dist = measurement_distribution(a, plan, cfg);
  return dist.at(outcome);
}

double conditional_measurement_prob(const AmplitudeTensor& a, const MeasurementPlan& plan,
                                    const Assignment& post_outcome, const Assignment& pre_outcome,
                                    const Config& cfg) {
  IndexSet post = plan.z_post();
  if (post_outcome.scope != post) fail(Errc::ScopeMismatch, "post outcome must cover z_post");
  if (pre_outcome.scope != plan.z_pre) fail(Errc::ScopeMismatch, "pre outcome must cover z_pre");
  ProbTensor dist = measurement_distribution(a, plan, cfg);

  // P(pre) sums the visible distribution over post outcomes.
  double joint = 0.0, pre_mass = 0.0;
  ScopeIndexer post_idx(a.space(), post);
  ScopeIndexer vis_idx(a.space(), plan.z_vis);
  std::vector<int> vis_digits(vis_idx.arity());
  std::vector<int> post_pos, pre_pos;
  for (std::size_t i = 0; i < plan.z_vis.size(); ++i) {
    if (set_contains(post, plan.z_vis[i])) post_pos.push_back(int(i));
    else pre_pos.push_back(int(i));
  }
  for (std::size_t i = 0; i < pre_pos.size(); ++i)
    vis_digits[std::size_t(pre_pos[i])] = pre_outcome.values[i];
  for (std::size_t t = 0; t < post_idx.total(); ++t) {
    std::vector<int> td = post_idx.unflatten(t);
    for (std::size_t i = 0; i < post_pos.size(); ++i)
      vis_digits[std::size_t(post_pos[i])] = td[i];
    double p = dist.at(vis_idx.flatten(vis_digits));
    pre_mass += p;
    bool is_query = true;
    for (std::size_t i = 0; i < td.size(); ++i)
      if (td[i] != post_outcome.values[i]) {
        is_query = false;
        break;
      }
    if (is_query) joint = p;
  }
  if (pre_mass <= 0.0) {
    if (cfg.eps <= 0.0) fail(Errc::ZeroConditionMass, "pre-viewed outcome has zero probability");
    pre_mass = cfg.eps;
  }
  return joint / pre_mass;
}

double expected_value(const AmplitudeTensor& a, const MeasurementPlan& plan,
                      const std::vector<double>& lambda_by_vis_flat,
                      const Assignment& pre_outcome, const Config& cfg) {
  ScopeIndexer vis_idx(a.space(), plan.z_vis);
  if (lambda_by_vis_flat.size() != vis_idx.total())
    fail(Errc::MissingValue, "eigenvalue table must cover every visible outcome");
  IndexSet post = plan.z_post();
  ScopeIndexer post_idx(a.space(), post);
  double acc = 0.0;
  for (std::size_t t = 0; t < post_idx.total(); ++t) {
    Assignment po{post, post_idx.unflatten(t)};
    double p = conditional_measurement_prob(a, plan, po, pre_outcome, cfg);
    // Rebuild the flat visible index for the eigenvalue lookup.
    std::vector<int> vis_digits(vis_idx.arity());
    std::size_t pi = 0, qi = 0;
    for (std::size_t i = 0; i < plan.z_vis.size(); ++i) {
      if (set_contains(post, plan.z_vis[i]))
        vis_digits[i] = po.values[pi++];
      else
        vis_digits[i] = pre_outcome.values[qi++];
    }
    acc += lambda_by_vis_flat[vis_idx.flatten(vis_digits)] * p;
  }
  return acc;
}

Purification purify(const DensityMatrix& rho, const Config& cfg) {
  EigResult eig = hermitian_eig(rho.matrix(), cfg);
  Purification out;
  out.cond = eig.eigenvectors;
  out.node_amps.resize(eig.eigenvalues.size());
  for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i) {
    double lam = eig.eigenvalues[i];
    if (lam < -cfg.eig_clamp)
      fail(Errc::NegativeEigenvalueBeyondTolerance, "eigenvalue " + std::to_string(lam));
    out.node_amps[i] = std::sqrt(std::max(lam, 0.0));
  }
  return out;
}

DensityMatrix purification_rebuild(const Purification& p, const DensityMatrix& like,
                                   const Config& cfg) {
  int n = p.cond.rows();
  ComplexMatrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      cplx acc = 0.0;
      for (int j = 0; j < int(p.node_amps.size()); ++j)
        acc += p.cond.at(r, j) * p.node_amps[std::size_t(j)] * p.node_amps[std::size_t(j)] *
               std::conj(p.cond.at(c, j));
      m.at(r, c) = acc;
    }
  return DensityMatrix::make(like.space_ptr(), like.scope(), std::move(m), cfg);
}

SchmidtResult schmidt(const AmplitudeTensor& a, const IndexSet& left_group, const Config& cfg) {
  IndexSet right_group = set_minus(a.scope(), left_group);
  if (!is_subset(left_group, a.scope()) || left_group.empty() || right_group.empty())
    fail(Errc::ScopePartitionInvalid, "scope must split into two nonempty groups");

  ScopeIndexer left_idx(a.space(), left_group), right_idx(a.space(), right_group);
  std::vector<int> left_pos, right_pos;
  for (std::size_t i = 0; i < a.scope().size(); ++i) {
    if (set_contains(left_group, a.scope()[i])) left_pos.push_back(int(i));
    else right_pos.push_back(int(i));
  }
  ComplexMatrix mat(int(left_idx.total()), int(right_idx.total()));
  std::vector<int> digits(a.indexer().arity());
  for (std::size_t x = 0; x < left_idx.total(); ++x) {
    std::vector<int> xd = left_idx.unflatten(x);
    for (std::size_t i = 0; i < xd.size(); ++i) digits[std::size_t(left_pos[i])] = xd[i];
    for (std::size_t y = 0; y < right_idx.total(); ++y) {
      std::vector<int> yd = right_idx.unflatten(y);
      for (std::size_t i = 0; i < yd.size(); ++i) digits[std::size_t(right_pos[i])] = yd[i];
      mat.at(int(x), int(y)) = a.at(a.indexer().flatten(digits));
    }
  }

  SvdResult sv = svd(mat, cfg);
  SchmidtResult out;
  int r = int(sv.s.size());
  out.coeffs = sv.s;
  out.x_given_j = ComplexMatrix(int(left_idx.total()), r);
  out.y_given_j = ComplexMatrix(int(right_idx.total()), r);
  for (int j = 0; j < r; ++j) {
    for (int x = 0; x < int(left_idx.total()); ++x) out.x_given_j.at(x, j) = sv.u.at(x, j);
    // A(y|j) = conj(V_{y,j}) so that A(x,y) = sum_j A(x|j) A(y|j) A(j).
    for (int y = 0; y < int(right_idx.total()); ++y)
      out.y_given_j.at(y, j) = std::conj(sv.v.at(y, j));
  }
  return out;
}

double von_neumann_entropy(const DensityMatrix& rho, const Config& cfg) {
  return spectral_entropy(hermitian_eig(rho.matrix(), cfg).eigenvalues, cfg);
}

namespace {

CmiValue clamp_cmi(double raw, double clamp, Errc errc) {
  if (raw < -clamp) fail(errc, "CMI = " + std::to_string(raw) + " beyond clamp");
  if (raw < 0.0) return CmiValue{0.0, true};
  return CmiValue{raw, false};
}

}  // namespace

CmiValue quantum_cmi(const DensityMatrix& rho, const IndexSet& j_set, const IndexSet& k_set,
                     const IndexSet& e_set, const Config& cfg) {
  if (!sets_disjoint(j_set, k_set) || !sets_disjoint(j_set, e_set) || !sets_disjoint(k_set, e_set))
    fail(Errc::SetsNotDisjoint, "CMI sets overlap");
  IndexSet jke = set_union(set_union(j_set, k_set), e_set);
  if (!is_subset(jke, rho.scope())) fail(Errc::ScopeMismatch, "CMI sets not within scope");

  DensityMatrix reduced = partial_trace(rho, set_minus(rho.scope(), jke), cfg);
  auto entropy_of = [&](const IndexSet& keep) {
    DensityMatrix part = partial_trace(reduced, set_minus(reduced.scope(), keep), cfg);
    return von_neumann_entropy(part, cfg);
  };
  double s_je = entropy_of(set_union(j_set, e_set));
  double s_ke = entropy_of(set_union(k_set, e_set));
  double s_jke = entropy_of(jke);
  double s_e = entropy_of(e_set);
  return clamp_cmi(s_je + s_ke - s_jke - s_e, cfg.cmi_clamp,
                   Errc::NegativeEigenvalueBeyondTolerance);
}

CmiValue classical_cmi(const ProbTensor& p, const IndexSet& j_set, const IndexSet& k_set,
                       const IndexSet& e_set, const Config& cfg) {
  if (!sets_disjoint(j_set, k_set) || !sets_disjoint(j_set, e_set) || !sets_disjoint(k_set, e_set))
    fail(Errc::SetsNotDisjoint, "CMI sets overlap");
  IndexSet jke = set_union(set_union(j_set, k_set), e_set);
  if (!is_subset(jke, p.scope())) fail(Errc::ScopeMismatch, "CMI sets not within scope");

  auto shannon = [&](const IndexSet& keep) {
    ProbTensor marg = marginalize(p, set_minus(p.scope(), keep));
    double h = 0.0;
    for (double v : marg.entries())
      if (v > 0.0) h -= v * std::log(v);
    return h;
  };
  double h_je = shannon(set_union(j_set, e_set));
  double h_ke = shannon(set_union(k_set, e_set));
  double h_jke = shannon(jke);
  double h_e = shannon(e_set);
  return clamp_cmi(h_je + h_ke - h_jke - h_e, 1e-10, Errc::NegativeEigenvalueBeyondTolerance);
}

DensityMatrix random_phase_dephase(const DensityMatrix& rho, const IndexSet& target,
                                   std::size_t samples, std::uint64_t seed, const Config& cfg) {
  if (samples < 1) fail(Errc::ValidationError, "sample count must be >= 1");
  if (!is_subset(target, rho.scope())) fail(Errc::ScopeMismatch, "target not within scope");

  ScopeSplit sp(rho.space(), rho.scope(), target);
  int dim = rho.dim();
  // target_of[flat]: flat target-part of each full index.
  std::vector<std::size_t> target_of(static_cast<std::size_t>(dim));
  for (std::size_t f = 0; f < std::size_t(dim); ++f) {
    std::vector<int> digits = sp.in.unflatten(f);
    std::vector<int> td(sp.target_pos.size());
    for (std::size_t i = 0; i < td.size(); ++i) td[i] = digits[std::size_t(sp.target_pos[i])];
    target_of[f] = sp.target.flatten(td);
  }

  Rng rng(seed);
  ComplexMatrix acc(dim, dim);
  std::vector<cplx> phase(sp.target.total());
  for (std::size_t s = 0; s < samples; ++s) {
    for (cplx& z : phase) {
      double th = rng.uniform(0.0, 2.0 * M_PI);
      z = cplx(std::cos(th), std::sin(th));
    }
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        acc.at(r, c) += rho.matrix().at(r, c) * phase[target_of[std::size_t(r)]] *
                        std::conj(phase[target_of[std::size_t(c)]]);
  }
  ComplexMatrix avg = acc.scaled(1.0 / double(samples));
  // The diagonal is untouched by conjugation, so trace and Hermiticity hold.
  return DensityMatrix::make(rho.space_ptr(), rho.scope(), std::move(avg), cfg);
}

}  // namespace qbn
