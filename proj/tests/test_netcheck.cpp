#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qbn/harness.hpp"
#include "qbn/independence.hpp"
#include "qbn/network.hpp"

using namespace qbn;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(QBN_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double joint_diff(const NetworkFile& a, const NetworkFile& b) {
  AmplitudeTensor ja = a.joint_amplitude();
  AmplitudeTensor jb = b.joint_amplitude();
  double worst = 0.0;
  for (std::size_t i = 0; i < ja.entries().size(); ++i)
    worst = std::max(worst, std::abs(ja.at(i) - jb.at(i)));
  return worst;
}

}  // namespace

TEST_CASE("every repository fixture validates and round-trips") {
  for (const char* name :
       {"diamond_bayesian.qbn", "diamond_markov.qbn", "counterexample1.qbn",
        "counterexample2.qbn", "fig3_chain.qbn", "fig3_common_cause.qbn", "fig3_collider.qbn",
        "fig3_collider_descendant.qbn"}) {
    CAPTURE(name);
    std::string text = slurp(fixture_path(name));
    NetworkFile net = parse_network(text);
    std::string once = serialize_network(net);
    std::string twice = serialize_network(parse_network(once));
    CHECK(once == twice);  // parse . serialize . parse is idempotent
    CHECK_NOTHROW(net.joint_amplitude());
  }
}

TEST_CASE("fixture files agree with the programmatic builders") {
  CHECK(joint_diff(parse_network(slurp(fixture_path("diamond_bayesian.qbn"))),
                   diamond_bayesian_fixture()) < 1e-12);
  CHECK(joint_diff(parse_network(slurp(fixture_path("diamond_markov.qbn"))),
                   diamond_markov_fixture()) < 1e-12);
  CHECK(joint_diff(parse_network(slurp(fixture_path("counterexample1.qbn"))),
                   counterexample1_fixture(M_PI / 2)) < 1e-12);
  CHECK(joint_diff(parse_network(slurp(fixture_path("counterexample2.qbn"))),
                   counterexample2_fixture(M_PI / 2)) < 1e-12);
}

TEST_CASE("serialization is canonical for randomly generated nets") {
  Rng rng(301);
  for (int trial = 0; trial < 10; ++trial) {
    SpacePtr space = random_binary_space(2 + int(rng.index(3)));
    Dag g = random_dag(space, rng);
    NetworkFile net;
    net.kind = NetworkFile::Kind::Bayesian;
    net.space = space;
    net.edges = g.arrows();
    net.tables = random_bnet_tables(g, rng);
    std::string once = serialize_network(net);
    CHECK(once == serialize_network(parse_network(once)));

    Ug u = random_ug(space, rng);
    NetworkFile mnet;
    mnet.kind = NetworkFile::Kind::Markov;
    mnet.space = space;
    mnet.edges = u.links();
    mnet.affinities = random_affinities(u, rng);
    std::string monce = serialize_network(mnet);
    CHECK(monce == serialize_network(parse_network(monce)));
  }
}

TEST_CASE("parse errors are line-anchored; validation errors carry paths") {
  try {
    parse_network("{\n  \"format\": \"qbn-1\",\n  bogus\n}");
    FAIL("syntax error not raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SyntaxError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  // comments are allowed
  CHECK_NOTHROW(parse_network(
      "// a comment\n" + serialize_network(counterexample1_fixture(M_PI / 2))));

  // markov net missing one clique affinity
  NetworkFile mnet = diamond_markov_fixture();
  mnet.affinities.erase(IndexSet{0, 1});
  std::string text = serialize_network(mnet);
  try {
    parse_network(text);
    FAIL("missing affinity accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ValidationError);
    CHECK(std::string(e.what()).find("affinities/x1|x2") != std::string::npos);
  }

  // bayesian net with an unnormalized column
  std::string btext = serialize_network(diamond_bayesian_fixture());
  std::string needle = "0.7071067811865476";
  btext.replace(btext.find(needle), needle.size(), "0.5");
  try {
    parse_network(btext);
    FAIL("unnormalized column accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnnormalizedNodeTable);
  }

  // reserved characters in names
  CHECK_THROWS_AS(
      parse_network("{\"format\":\"qbn-1\",\"kind\":\"bayesian\",\"variables\":"
                    "[{\"name\":\"a|b\",\"states\":[\"0\"]}],\"tables\":{}}"),
      Error);
}

TEST_CASE("markers build measurement plans") {
  NetworkFile net = parse_network(slurp(fixture_path("fig3_chain.qbn")));
  net.markers.emplace(0, NodeMarker{MarkerKind::VisiblePre, -1});
  net.markers.emplace(2, NodeMarker{MarkerKind::VisiblePost, -1});
  net.markers.emplace(1, NodeMarker{MarkerKind::Asum, -1});
  MeasurementPlan plan = net.plan();
  CHECK(plan.z_vis == IndexSet{0, 2});
  CHECK(plan.z_pre == IndexSet{0});
  CHECK(plan.z_asum == IndexSet{1});
  CHECK(plan.z_psum.empty());
  CHECK(plan.z_post() == IndexSet{2});

  // unmarked nodes default to P-summed
  net.markers.erase(1);
  MeasurementPlan plan2 = net.plan();
  CHECK(plan2.z_psum == IndexSet{1});

  // diag markers must be rewritten before planning
  net.markers.emplace(1, NodeMarker{MarkerKind::Diag, -1});
  CHECK_THROWS_AS(net.plan(), Error);

  // marker round-trip, including entry values
  net.markers[1] = NodeMarker{MarkerKind::Entry, 1};
  std::string text = serialize_network(net);
  NetworkFile back = parse_network(text);
  CHECK(back.markers.at(1).kind == MarkerKind::Entry);
  CHECK(back.markers.at(1).entry_state == 1);
  CHECK(back.ungroundable_nodes() == IndexSet{1});
}

TEST_CASE("replace_diag_with_traced_node reproduces the diag operator") {
  // one-node example: rho = diag(mu) == tr over the twin of the rewritten net
  SpacePtr one = make_space({Variable{"x", {"0", "1"}}});
  NetworkFile net;
  net.kind = NetworkFile::Kind::Bayesian;
  net.space = one;
  ConditionalTable t{0, {}, ComplexMatrix(2, 1)};
  const double s = 1.0 / std::sqrt(2.0);
  t.table.at(0, 0) = s;
  t.table.at(1, 0) = cplx(0, s);
  net.tables.push_back(t);
  net.markers.emplace(0, NodeMarker{MarkerKind::Diag, -1});

  NetworkFile rewritten = replace_diag_with_traced_node(net);
  CHECK(rewritten.space->size() == 2);
  CHECK(rewritten.markers.at(1).kind == MarkerKind::Trace);

  DensityMatrix mu = meta_density(net.joint_amplitude());
  ScopedMatrix want = superop(mu.scoped(), SuperOpKind::Diag, {0});
  DensityMatrix mu2 = meta_density(rewritten.joint_amplitude());
  DensityMatrix got = partial_trace(mu2, {1});
  CHECK(got.matrix().max_abs_diff(want.m) < 1e-9);

  // two-node example y <- x with x diag-marked
  Rng rng(17);
  SpacePtr two = make_space({Variable{"y", {"0", "1"}}, Variable{"x", {"0", "1"}}});
  Dag g(two, {{1, 0}});
  NetworkFile net2;
  net2.kind = NetworkFile::Kind::Bayesian;
  net2.space = two;
  net2.edges = g.arrows();
  net2.tables = random_bnet_tables(g, rng);
  net2.markers.emplace(1, NodeMarker{MarkerKind::Diag, -1});

  NetworkFile rw = replace_diag_with_traced_node(net2);
  CHECK(rw.space->size() == 3);
  DensityMatrix m2 = meta_density(net2.joint_amplitude());
  ScopedMatrix want2 = superop(m2.scoped(), SuperOpKind::Diag, {1});
  DensityMatrix got2 = partial_trace(meta_density(rw.joint_amplitude()), {2});
  CHECK(got2.matrix().max_abs_diff(want2.m) < 1e-9);

  // the rewritten net round-trips through the serializer
  std::string text = serialize_network(rw);
  CHECK(text == serialize_network(parse_network(text)));

  // a one-state diag node is a no-op
  SpacePtr trivial = make_space({Variable{"t", {"only"}}});
  NetworkFile triv;
  triv.kind = NetworkFile::Kind::Bayesian;
  triv.space = trivial;
  ConditionalTable tt{0, {}, ComplexMatrix(1, 1)};
  tt.table.at(0, 0) = 1.0;
  triv.tables.push_back(tt);
  triv.markers.emplace(0, NodeMarker{MarkerKind::Diag, -1});
  NetworkFile triv_rw = replace_diag_with_traced_node(triv);
  CHECK(triv_rw.space->size() == 1);
  CHECK(triv_rw.markers.empty());
}

TEST_CASE("diag rewrite feeds the certificate path") {
  // a chain whose middle node is diag-marked: after the rewrite the traced
  // twin joins the groundable set and the certificate still fires
  Rng rng(23);
  Fig3Case c = fig3_case(Fig3Shape::Chain);
  Dag g(c.space, c.arrows);
  NetworkFile net;
  net.kind = NetworkFile::Kind::Bayesian;
  net.space = c.space;
  net.edges = c.arrows;
  net.tables = random_bnet_tables(g, rng);
  net.markers.emplace(c.a, NodeMarker{MarkerKind::Diag, -1});

  NetworkFile rw = replace_diag_with_traced_node(net);
  AmplitudeTensor amp = rw.joint_amplitude();
  CertificateResult cert =
      entanglement_zero_certificate(rw.dag(), amp, {c.x}, {c.y}, rw.ungroundable_nodes());
  CHECK(cert.certified_zero);
  CHECK(cert.upper_bound < 1e-8);
}

TEST_CASE("harness registry") {
  auto names = harness_checks();
  CHECK(std::find(names.begin(), names.end(), "dsep-soundness") != names.end());
  HarnessParams p;
  p.trials = 5;
  p.max_nodes = 4;
  p.seed = 7;
  HarnessReport rep = run_harness("dsep-soundness", p);
  CHECK(rep.passed());
  CHECK(rep.trials == 5);
  CHECK_THROWS_AS(run_harness("no-such-check", p), Error);

  // deterministic given the seed
  HarnessReport rep2 = run_harness("dsep-soundness", p);
  CHECK(rep.failures.size() == rep2.failures.size());
}
