#include "doctest.h"

#include <cmath>

#include "qbn/harness.hpp"
#include "qbn/tensor.hpp"

using namespace qbn;

namespace {

// Per-entry loop-sum marginalization oracle: iterate the full joint and
// accumulate into the kept coordinates by hand.
std::vector<double> loop_sum_marginal(const ProbTensor& p, const IndexSet& kept) {
  ScopeIndexer out_idx(p.space(), kept);
  std::vector<double> out(out_idx.total(), 0.0);
  const ScopeIndexer& idx = p.indexer();
  for (std::size_t f = 0; f < idx.total(); ++f) {
    std::vector<int> digits = idx.unflatten(f);
    std::vector<int> kd;
    for (std::size_t i = 0; i < p.scope().size(); ++i)
      if (set_contains(kept, p.scope()[i])) kd.push_back(digits[i]);
    out[out_idx.flatten(kd)] += p.at(f);
  }
  return out;
}

ProbTensor xor_pair() {
  // P(x,y) supported on x == y
  return ProbTensor(random_binary_space(2), {0, 1}, {0.5, 0.0, 0.0, 0.5});
}

}  // namespace

TEST_CASE("tensor construction validates scope and entries") {
  SpacePtr space = random_binary_space(2);
  CHECK_THROWS_AS(ProbTensor(space, {0, 1}, {0.5, 0.5}), Error);          // wrong length
  CHECK_THROWS_AS(ProbTensor(space, {1, 0}, {1, 0, 0, 0}), Error);        // unsorted scope
  CHECK_THROWS_AS(ProbTensor(space, {0, 1}, {0.5, -0.1, 0.3, 0.3}), Error);  // negative
  ProbTensor ok(space, {0, 1}, {0.25, 0.25, 0.25, 0.25});
  CHECK(ok.normalized());

  Config tiny;
  tiny.max_joint_states = 2;
  try {
    ProbTensor guard(space, {0, 1}, {0.25, 0.25, 0.25, 0.25}, tiny);
    FAIL("joint-state guard not enforced");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::JointStateLimitExceeded);
  }
}

TEST_CASE("marginalize") {
  SpacePtr space = random_binary_space(2);
  ProbTensor uniform(space, {0, 1}, {0.25, 0.25, 0.25, 0.25});
  ProbTensor m = marginalize(uniform, {1});
  CHECK(m.scope() == IndexSet{0});
  CHECK(m.at(std::size_t(0)) == doctest::Approx(0.5));
  CHECK(m.at(std::size_t(1)) == doctest::Approx(0.5));

  ProbTensor mx = marginalize(xor_pair(), {1});
  CHECK(mx.at(std::size_t(0)) == doctest::Approx(0.5));
  CHECK(mx.at(std::size_t(1)) == doctest::Approx(0.5));

  CHECK_THROWS_AS(marginalize(uniform, {5}), Error);
}

TEST_CASE("marginalize matches the loop-sum oracle and composes") {
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    SpacePtr space = random_binary_space(3);
    ProbTensor p = random_positive_prob(space, rng);

    ProbTensor m = marginalize(p, {1, 2});
    std::vector<double> want = loop_sum_marginal(p, {0});
    for (std::size_t i = 0; i < want.size(); ++i)
      CHECK(m.at(i) == doctest::Approx(want[i]).epsilon(1e-12));

    // marginalize . marginalize == marginalize of the union, either order
    ProbTensor two_step = marginalize(marginalize(p, {1}), {2});
    ProbTensor other_order = marginalize(marginalize(p, {2}), {1});
    ProbTensor one_step = marginalize(p, {1, 2});
    for (std::size_t i = 0; i < one_step.entries().size(); ++i) {
      CHECK(two_step.at(i) == doctest::Approx(one_step.at(i)).epsilon(1e-12));
      CHECK(other_order.at(i) == doctest::Approx(one_step.at(i)).epsilon(1e-12));
    }

    // total mass preserved
    CHECK(m.total_mass() == doctest::Approx(p.total_mass()).epsilon(1e-12));
  }
}

TEST_CASE("condition") {
  SpacePtr space = random_binary_space(2);
  // xor pair conditioned on y = 0 puts all mass on x = 0
  ProbTensor c = condition(xor_pair(), make_assignment(*space, {1}, {0}));
  CHECK(c.scope() == IndexSet{0});
  CHECK(c.at(std::size_t(0)) == doctest::Approx(1.0));
  CHECK(c.at(std::size_t(1)) == doctest::Approx(0.0));

  ProbTensor uniform(space, {0, 1}, {0.25, 0.25, 0.25, 0.25});
  ProbTensor cu = condition(uniform, make_assignment(*space, {0}, {1}));
  CHECK(cu.at(std::size_t(0)) == doctest::Approx(0.5));

  // conditioning on a zero-probability event
  ProbTensor point(space, {0, 1}, {1.0, 0.0, 0.0, 0.0});
  try {
    condition(point, make_assignment(*space, {0}, {1}));
    FAIL("zero condition mass not raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroConditionMass);
  }
  // eps mode substitutes and flags instead
  Config eps_cfg;
  eps_cfg.eps = 1e-9;
  ProbTensor reg = condition(point, make_assignment(*space, {0}, {1}), eps_cfg);
  CHECK(reg.regularized());
}

TEST_CASE("condition re-multiplied by the event mass reproduces the slice") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    SpacePtr space = random_binary_space(3);
    ProbTensor p = random_positive_prob(space, rng);
    Assignment given = make_assignment(*space, {1}, {int(rng.index(2))});
    ProbTensor c = condition(p, given);
    double mass = marginalize(p, {0, 2}).at(std::size_t(given.values[0]));
    const ScopeIndexer& cidx = c.indexer();
    for (std::size_t f = 0; f < cidx.total(); ++f) {
      std::vector<int> digits = cidx.unflatten(f);  // over {0, 2}
      std::vector<int> full = {digits[0], given.values[0], digits[1]};
      CHECK(c.at(f) * mass == doctest::Approx(p.at(p.indexer().flatten(full))).epsilon(1e-12));
    }
  }
}

TEST_CASE("amp_to_prob") {
  SpacePtr space = random_binary_space(1);
  const double s = 1.0 / std::sqrt(2.0);
  AmplitudeTensor a(space, {0}, {cplx(s, 0), cplx(0, s)});
  ProbTensor p = amp_to_prob(a);
  CHECK(p.at(std::size_t(0)) == doctest::Approx(0.5));
  CHECK(p.at(std::size_t(1)) == doctest::Approx(0.5));
  CHECK(p.normalized());

  AmplitudeTensor zero(space, {0}, {cplx(0, 0), cplx(0, 0)});
  CHECK_FALSE(zero.normalized());
  CHECK_FALSE(amp_to_prob(zero).normalized());

  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    AmplitudeTensor r = random_amplitude(random_binary_space(3), rng);
    ProbTensor rp = amp_to_prob(r);
    for (std::size_t i = 0; i < rp.entries().size(); ++i)
      CHECK(rp.at(i) == doctest::Approx(std::norm(r.at(i))).epsilon(1e-14));
    // normalized amplitude gives a normalized probability within 1e-12
    CHECK(std::abs(rp.total_mass() - 1.0) < 1e-12);
  }
}
