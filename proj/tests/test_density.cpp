#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "qbn/density.hpp"
#include "qbn/harness.hpp"

using namespace qbn;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

AmplitudeTensor bell_amp() {
  return AmplitudeTensor(random_binary_space(2), {0, 1}, {kInvSqrt2, 0.0, 0.0, kInvSqrt2});
}

// Explicit double-loop partial trace over the last variable block;
// independent of the ScopeIndexer plumbing.
ComplexMatrix loop_trace_last(const ComplexMatrix& rho, int kept_dim, int traced_dim) {
  ComplexMatrix out(kept_dim, kept_dim);
  for (int r = 0; r < kept_dim; ++r)
    for (int c = 0; c < kept_dim; ++c)
      for (int t = 0; t < traced_dim; ++t)
        out.at(r, c) += rho.at(r * traced_dim + t, c * traced_dim + t);
  return out;
}

// The paper's direct formula: P(vis) proportional to
// sum_{psum} | sum_{asum} A |^2, evaluated with nested loops.
std::vector<double> direct_measurement_formula(const AmplitudeTensor& a,
                                               const MeasurementPlan& plan) {
  const VariableSpace& space = a.space();
  ScopeIndexer vis(space, plan.z_vis), asum(space, plan.z_asum), psum(space, plan.z_psum);
  std::vector<int> vis_pos, asum_pos, psum_pos;
  for (std::size_t i = 0; i < a.scope().size(); ++i) {
    int v = a.scope()[i];
    if (set_contains(plan.z_vis, v)) vis_pos.push_back(int(i));
    else if (set_contains(plan.z_asum, v)) asum_pos.push_back(int(i));
    else psum_pos.push_back(int(i));
  }
  std::vector<double> vals(vis.total(), 0.0);
  std::vector<int> digits(a.scope().size());
  for (std::size_t o = 0; o < vis.total(); ++o) {
    auto od = vis.unflatten(o);
    for (std::size_t i = 0; i < od.size(); ++i) digits[std::size_t(vis_pos[i])] = od[i];
    double total = 0.0;
    for (std::size_t p = 0; p < psum.total(); ++p) {
      auto pd = psum.unflatten(p);
      for (std::size_t i = 0; i < pd.size(); ++i) digits[std::size_t(psum_pos[i])] = pd[i];
      cplx coherent = 0.0;
      for (std::size_t t = 0; t < asum.total(); ++t) {
        auto td = asum.unflatten(t);
        for (std::size_t i = 0; i < td.size(); ++i) digits[std::size_t(asum_pos[i])] = td[i];
        coherent += a.at(a.indexer().flatten(digits));
      }
      total += std::norm(coherent);
    }
    vals[o] = total;
  }
  double denom = 0.0;
  for (double v : vals) denom += v;
  for (double& v : vals) v /= denom;
  return vals;
}

}  // namespace

TEST_CASE("meta_density") {
  SpacePtr one = random_binary_space(1);
  AmplitudeTensor point(one, {0}, {1.0, 0.0});
  DensityMatrix mu = meta_density(point);
  CHECK(mu.matrix().at(0, 0) == cplx(1.0));
  CHECK(mu.matrix().at(1, 1) == cplx(0.0));

  DensityMatrix bell = meta_density(bell_amp());
  CHECK(bell.matrix().at(0, 0).real() == doctest::Approx(0.5));
  CHECK(bell.matrix().at(0, 3).real() == doctest::Approx(0.5));
  CHECK(bell.matrix().at(3, 0).real() == doctest::Approx(0.5));
  CHECK(bell.matrix().at(1, 1).real() == doctest::Approx(0.0));
  EigResult e = hermitian_eig(bell.matrix());
  CHECK(e.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(std::abs(e.eigenvalues[1]) < 1e-9);

  AmplitudeTensor unnorm(one, {0}, {0.5, 0.0});
  CHECK_THROWS_AS(meta_density(unnorm), Error);

  // projector property mu^2 == mu on a random meta state
  Rng rng(2);
  AmplitudeTensor r = random_amplitude(random_binary_space(3), rng);
  DensityMatrix m = meta_density(r);
  CHECK((m.matrix() * m.matrix()).max_abs_diff(m.matrix()) < 1e-9);
}

TEST_CASE("partial_trace") {
  DensityMatrix bell = meta_density(bell_amp());
  DensityMatrix half = partial_trace(bell, {1});
  CHECK(half.scope() == IndexSet{0});
  CHECK(half.matrix().at(0, 0).real() == doctest::Approx(0.5));
  CHECK(half.matrix().at(1, 1).real() == doctest::Approx(0.5));
  CHECK(std::abs(half.matrix().at(0, 1)) < 1e-12);

  // product state reduces to its factor
  SpacePtr two = random_binary_space(2);
  Rng rng(5);
  AmplitudeTensor ax = random_amplitude(random_binary_space(1), rng);
  AmplitudeTensor ay = random_amplitude(random_binary_space(1), rng);
  std::vector<cplx> prod(4);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      prod[std::size_t(x * 2 + y)] = ax.at(std::size_t(x)) * ay.at(std::size_t(y));
  DensityMatrix mu = meta_density(AmplitudeTensor(two, {0, 1}, prod));
  DensityMatrix mx = partial_trace(mu, {1});
  DensityMatrix want = meta_density(ax);
  CHECK(mx.matrix().max_abs_diff(want.matrix()) < 1e-12);

  // random state matches the explicit index-loop oracle
  AmplitudeTensor r3 = random_amplitude(random_binary_space(3), rng);
  DensityMatrix mu3 = meta_density(r3);
  DensityMatrix red = partial_trace(mu3, {2});
  CHECK(red.matrix().max_abs_diff(loop_trace_last(mu3.matrix(), 4, 2)) < 1e-12);

  CHECK_THROWS_AS(partial_trace(bell, {7}), Error);
}

TEST_CASE("superop identities and shapes") {
  Rng rng(9);
  SpacePtr space = random_binary_space(2);
  IndexSet scope = {0, 1};

  // random (not necessarily Hermitian) operator
  ComplexMatrix m(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m.at(r, c) = rng.complex_normal();
  ScopedMatrix sm{space, scope, m};

  // entry_sum . diag == trace, exactly
  for (IndexSet target : {IndexSet{0}, IndexSet{1}, IndexSet{0, 1}}) {
    ScopedMatrix lhs = superop(superop(sm, SuperOpKind::Diag, target), SuperOpKind::EntrySum, target);
    ScopedMatrix rhs = superop(sm, SuperOpKind::Trace, target);
    CHECK(lhs.m.max_abs_diff(rhs.m) == 0.0);
  }

  // diag over the full scope leaves the classical diagonal
  ScopedMatrix full_diag = superop(sm, SuperOpKind::Diag, scope);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      CHECK(full_diag.m.at(r, c) == (r == c ? m.at(r, c) : cplx(0.0)));

  // entry requires a value over the target
  CHECK_THROWS_AS(superop(sm, SuperOpKind::Entry, {0}), Error);
  Assignment v0 = make_assignment(*space, {0}, {1});
  ScopedMatrix entry = superop(sm, SuperOpKind::Entry, {0}, v0);
  CHECK(entry.scope == IndexSet{1});
  CHECK(entry.m.at(0, 1) == m.at(2, 3));

  // entry-sum on a rank-1 projector drops the tensor rank but stays rank 1
  AmplitudeTensor r3 = random_amplitude(random_binary_space(3), rng);
  DensityMatrix mu = meta_density(r3);
  ScopedMatrix dropped = superop(mu.scoped(), SuperOpKind::EntrySum, {1});
  EigResult e = hermitian_eig(dropped.m.scaled(1.0 / dropped.m.trace().real()));
  CHECK(std::abs(e.eigenvalues[1]) < 1e-9);  // second eigenvalue vanishes
}

TEST_CASE("measurement probabilities: the spec's two-bit example") {
  SpacePtr space = make_space({Variable{"x", {"0", "1"}}, Variable{"a", {"0", "1"}}});
  AmplitudeTensor a(space, {0, 1}, {0.5, 0.5, 0.5, -0.5});

  MeasurementPlan asum_plan{{0}, {1}, {}, {}};
  ProbTensor p1 = measurement_distribution(a, asum_plan);
  CHECK(p1.at(std::size_t(0)) == doctest::Approx(1.0));
  CHECK(p1.at(std::size_t(1)) == doctest::Approx(0.0));

  MeasurementPlan psum_plan{{0}, {}, {1}, {}};
  ProbTensor p2 = measurement_distribution(a, psum_plan);
  CHECK(p2.at(std::size_t(0)) == doctest::Approx(0.5));
  CHECK(p2.at(std::size_t(1)) == doctest::Approx(0.5));

  // no summed nodes at all: plain |A|^2
  MeasurementPlan vis_all{{0, 1}, {}, {}, {}};
  ProbTensor p3 = measurement_distribution(a, vis_all);
  for (std::size_t i = 0; i < 4; ++i) CHECK(p3.at(i) == doctest::Approx(0.25));
}

TEST_CASE("measurement paths agree with each other and the direct formula") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    int n = 2 + int(rng.index(2));
    SpacePtr space = random_binary_space(n);
    AmplitudeTensor a = random_amplitude(space, rng);
    MeasurementPlan plan;
    for (int v = 0; v < n; ++v) {
      double u = rng.uniform();
      if (u < 0.34 || (v == n - 1 && plan.z_vis.empty())) plan.z_vis.push_back(v);
      else if (u < 0.67) plan.z_asum.push_back(v);
      else plan.z_psum.push_back(v);
    }
    ProbTensor via_superop = measurement_distribution(a, plan);
    ProbTensor via_projector = measurement_distribution_projector(a, plan);
    std::vector<double> via_formula = direct_measurement_formula(a, plan);
    for (std::size_t i = 0; i < via_formula.size(); ++i) {
      CHECK(via_superop.at(i) == doctest::Approx(via_formula[i]).epsilon(1e-10));
      CHECK(std::abs(via_superop.at(i) - via_projector.at(i)) < 1e-9);
    }
  }
}

TEST_CASE("conditional measurement and expected values") {
  SpacePtr space = make_space({Variable{"x", {"0", "1"}}, Variable{"y", {"0", "1"}}});
  // amplitude supported on x == y
  AmplitudeTensor xor_amp(space, {0, 1}, {kInvSqrt2, 0.0, 0.0, kInvSqrt2});
  MeasurementPlan plan{{0, 1}, {}, {}, {1}};  // y pre-viewed

  Assignment post0 = make_assignment(*space, {0}, {0});
  Assignment pre0 = make_assignment(*space, {1}, {0});
  CHECK(conditional_measurement_prob(xor_amp, plan, post0, pre0) == doctest::Approx(1.0));
  Assignment post1 = make_assignment(*space, {0}, {1});
  CHECK(conditional_measurement_prob(xor_amp, plan, post1, pre0) == doctest::Approx(0.0));

  // independent product amplitude: conditional equals marginal
  Rng rng(3);
  AmplitudeTensor ax = random_amplitude(random_binary_space(1), rng);
  AmplitudeTensor ay = random_amplitude(random_binary_space(1), rng);
  std::vector<cplx> prod(4);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) prod[std::size_t(x * 2 + y)] = ax.at(std::size_t(x)) * ay.at(std::size_t(y));
  AmplitudeTensor pa(space, {0, 1}, prod);
  double marginal = std::norm(ax.at(std::size_t(0)));
  CHECK(conditional_measurement_prob(pa, plan, post0, pre0) == doctest::Approx(marginal).epsilon(1e-10));

  // conditioning on an impossible pre-view
  AmplitudeTensor pinned(space, {0, 1}, {1.0, 0.0, 0.0, 0.0});
  try {
    conditional_measurement_prob(pinned, plan, post0, make_assignment(*space, {1}, {1}));
    FAIL("zero condition mass not raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroConditionMass);
  }

  // expected values: constants pass through; indicators give probabilities
  MeasurementPlan unconditional{{0, 1}, {}, {}, {}};
  Assignment no_pre{{}, {}};
  std::vector<double> constant(4, 2.5);
  CHECK(expected_value(xor_amp, unconditional, constant, no_pre) == doctest::Approx(2.5));
  std::vector<double> indicator = {1.0, 0.0, 0.0, 0.0};
  CHECK(expected_value(xor_amp, unconditional, indicator, no_pre) == doctest::Approx(0.5));

  // +/-1 parity of one qubit of the Bell state averages to zero
  std::vector<double> parity = {1.0, 1.0, -1.0, -1.0};
  CHECK(expected_value(bell_amp(), unconditional, parity, no_pre) == doctest::Approx(0.0));
}

TEST_CASE("purify") {
  SpacePtr space = make_space({Variable{"v", {"0", "1"}}});
  ComplexMatrix d(2, 2);
  d.at(0, 0) = 0.7;
  d.at(1, 1) = 0.3;
  DensityMatrix rho = DensityMatrix::make(space, {0}, d);
  Purification p = purify(rho);
  CHECK(p.node_amps[0] == doctest::Approx(std::sqrt(0.7)));
  CHECK(p.node_amps[1] == doctest::Approx(std::sqrt(0.3)));
  // identity columns up to phase for an already-diagonal matrix
  CHECK(std::abs(p.cond.at(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(p.cond.at(1, 1)) == doctest::Approx(1.0));

  // pure state: single unit amplitude
  DensityMatrix pure = meta_density(AmplitudeTensor(space, {0}, {kInvSqrt2, cplx(0, kInvSqrt2)}));
  Purification pp = purify(pure);
  CHECK(pp.node_amps[0] == doctest::Approx(1.0));
  CHECK(pp.node_amps[1] == doctest::Approx(0.0));

  Rng rng(8);
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<std::string> states;
    for (int s = 0; s < 6; ++s) states.push_back(std::to_string(s));
    SpacePtr s6 = make_space({Variable{"w", states}});
    DensityMatrix r = random_density(s6, {0}, rng);
    DensityMatrix back = purification_rebuild(purify(r), r);
    CHECK(back.matrix().max_abs_diff(r.matrix()) < 1e-9);
  }
}

TEST_CASE("schmidt") {
  // product amplitude: a single Schmidt term
  Rng rng(4);
  SpacePtr space = random_binary_space(2);
  AmplitudeTensor ax = random_amplitude(random_binary_space(1), rng);
  AmplitudeTensor ay = random_amplitude(random_binary_space(1), rng);
  std::vector<cplx> prod(4);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) prod[std::size_t(x * 2 + y)] = ax.at(std::size_t(x)) * ay.at(std::size_t(y));
  SchmidtResult sp = schmidt(AmplitudeTensor(space, {0, 1}, prod), {0});
  CHECK(sp.coeffs[0] == doctest::Approx(1.0));
  CHECK(sp.coeffs[1] == doctest::Approx(0.0));

  SchmidtResult sb = schmidt(bell_amp(), {0});
  CHECK(sb.coeffs[0] == doctest::Approx(kInvSqrt2).epsilon(1e-12));
  CHECK(sb.coeffs[1] == doctest::Approx(kInvSqrt2).epsilon(1e-12));

  // partition must be a nonempty bipartition of the scope
  CHECK_THROWS_AS(schmidt(bell_amp(), {}), Error);
  CHECK_THROWS_AS(schmidt(bell_amp(), {0, 1}), Error);

  // random 3x4 amplitude: unit columns and reconstruction
  SpacePtr s34 = make_space({Variable{"x", {"0", "1", "2"}}, Variable{"y", {"0", "1", "2", "3"}}});
  AmplitudeTensor a = random_amplitude(s34, rng);
  SchmidtResult sc = schmidt(a, {0});
  for (std::size_t j = 0; j < sc.coeffs.size(); ++j) {
    double nx = 0, ny = 0;
    for (int x = 0; x < 3; ++x) nx += std::norm(sc.x_given_j.at(x, int(j)));
    for (int y = 0; y < 4; ++y) ny += std::norm(sc.y_given_j.at(y, int(j)));
    CHECK(nx == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ny == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 4; ++y) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j < sc.coeffs.size(); ++j)
        acc += sc.x_given_j.at(x, int(j)) * sc.coeffs[j] * sc.y_given_j.at(y, int(j));
      CHECK(std::abs(acc - a.at(std::size_t(x * 4 + y))) < 1e-9);
    }
}

TEST_CASE("quantum CMI") {
  // product state: zero mutual information
  Rng rng(6);
  SpacePtr space = random_binary_space(2);
  AmplitudeTensor ax = random_amplitude(random_binary_space(1), rng);
  AmplitudeTensor ay = random_amplitude(random_binary_space(1), rng);
  std::vector<cplx> prod(4);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) prod[std::size_t(x * 2 + y)] = ax.at(std::size_t(x)) * ay.at(std::size_t(y));
  DensityMatrix mu = meta_density(AmplitudeTensor(space, {0, 1}, prod));
  CHECK(quantum_cmi(mu, {0}, {1}, {}).value == doctest::Approx(0.0).epsilon(1e-10));

  // Bell state: S(x:y) = 2 ln 2
  DensityMatrix bell = meta_density(bell_amp());
  CHECK(quantum_cmi(bell, {0}, {1}, {}).value == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));

  CHECK_THROWS_AS(quantum_cmi(bell, {0}, {0}, {}), Error);

  // four-entropy formula recomputed through the independent QR oracle
  for (int trial = 0; trial < 8; ++trial) {
    SpacePtr s3 = random_binary_space(3);
    AmplitudeTensor a = random_amplitude(s3, rng);
    DensityMatrix m = meta_density(a);
    double got = quantum_cmi(m, {0}, {1}, {2}).value;
    auto entropy_of = [&](const IndexSet& keep) {
      DensityMatrix part = partial_trace(m, set_minus(IndexSet{0, 1, 2}, keep));
      return qbn_test::oracle_entropy(part.matrix());
    };
    double want = entropy_of({0, 2}) + entropy_of({1, 2}) - entropy_of({0, 1, 2}) - entropy_of({2});
    CHECK(got == doctest::Approx(std::max(want, 0.0)).epsilon(1e-7));
  }
}

TEST_CASE("classical CMI") {
  SpacePtr space = random_binary_space(2);
  ProbTensor indep(space, {0, 1}, {0.25, 0.25, 0.25, 0.25});
  CHECK(classical_cmi(indep, {0}, {1}, {}).value == doctest::Approx(0.0));

  // xor triple: P uniform on e = x ^ y, so H(x:y|e) = ln 2 (hand sum over
  // the 8 outcomes: each e-slice holds two equally likely (x,y) pairs with
  // x determining y).
  SpacePtr s3 = random_binary_space(3);
  std::vector<double> xor_p(8, 0.0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) xor_p[std::size_t(x * 4 + y * 2 + (x ^ y))] = 0.25;
  ProbTensor xt(s3, {0, 1, 2}, xor_p);
  CHECK(classical_cmi(xt, {0}, {1}, {2}).value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // and unconditionally x, y are independent here
  CHECK(classical_cmi(xt, {0}, {1}, {}).value == doctest::Approx(0.0).epsilon(1e-12));

  // chain rule identity on a random positive model
  Rng rng(12);
  SpacePtr s4 = random_binary_space(4);
  ProbTensor p = random_positive_prob(s4, rng);
  double lhs = classical_cmi(p, {0}, {1, 2}, {3}).value;
  double rhs = classical_cmi(p, {0}, {1}, {2, 3}).value + classical_cmi(p, {0}, {2}, {3}).value;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("random_phase_dephase") {
  DensityMatrix bell = meta_density(bell_amp());
  // already-diagonal states are fixed points for any sample count
  DensityMatrix diag_all = DensityMatrix::make(
      bell.space_ptr(), {0, 1}, superop(bell.scoped(), SuperOpKind::Diag, {0, 1}).m);
  for (std::size_t samples : {std::size_t(1), std::size_t(10), std::size_t(200)}) {
    DensityMatrix d = random_phase_dephase(diag_all, {0}, samples, 77);
    CHECK(d.matrix().max_abs_diff(diag_all.matrix()) < 1e-12);
  }

  // a single sample is still a valid density matrix
  CHECK_NOTHROW(random_phase_dephase(bell, {0}, 1, 5));

  // deterministic given the seed
  DensityMatrix a = random_phase_dephase(bell, {0}, 64, 123);
  DensityMatrix b = random_phase_dephase(bell, {0}, 64, 123);
  CHECK(a.matrix().max_abs_diff(b.matrix()) == 0.0);

  // statistical convergence to the diag super-operator
  ScopedMatrix want = superop(bell.scoped(), SuperOpKind::Diag, {0});
  DensityMatrix deph = random_phase_dephase(bell, {0}, 100000, 2024);
  CHECK(deph.matrix().max_abs_diff(want.m) < 0.02);
}
