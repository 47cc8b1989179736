#include "qbn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

namespace qbn {

namespace {

std::string show_set(const IndexSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

std::string show_indep(const Independency& i) {
  return show_set(i.j_set) + " _|_ " + show_set(i.k_set) + " | " + show_set(i.e_set);
}

}  // namespace

SpacePtr random_binary_space(int n) {
  std::vector<Variable> vars;
  for (int j = 0; j < n; ++j)
    vars.push_back(Variable{"x" + std::to_string(j + 1), {"0", "1"}});
  return std::make_shared<VariableSpace>(std::move(vars));
}

SpacePtr make_space(std::vector<Variable> vars) {
  return std::make_shared<VariableSpace>(std::move(vars));
}

Dag random_dag(SpacePtr space, Rng& rng, double edge_prob) {
  int n = space->size();
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[std::size_t(i)] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[std::size_t(i)], perm[rng.index(std::size_t(i) + 1)]);
  std::vector<std::pair<int, int>> arrows;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < edge_prob) arrows.emplace_back(perm[std::size_t(i)], perm[std::size_t(j)]);
  return Dag(std::move(space), arrows);
}

Ug random_ug(SpacePtr space, Rng& rng, double edge_prob) {
  int n = space->size();
  std::vector<std::pair<int, int>> links;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < edge_prob) links.emplace_back(i, j);
  return Ug(std::move(space), links);
}

std::vector<ConditionalTable> random_bnet_tables(const Dag& g, Rng& rng) {
  const VariableSpace& space = g.space();
  std::vector<ConditionalTable> tables;
  for (int j = 0; j < space.size(); ++j) {
    IndexSet pa = g.parents(j);
    ScopeIndexer pa_idx(space, pa);
    ConditionalTable t{j, pa, ComplexMatrix(space.state_count(j), int(pa_idx.total()))};
    for (int col = 0; col < t.table.cols(); ++col) {
      double nrm = 0.0;
      for (int row = 0; row < t.table.rows(); ++row) {
        cplx z = rng.complex_normal();
        t.table.at(row, col) = z;
        nrm += std::norm(z);
      }
      nrm = std::sqrt(nrm);
      // Constrained phases: the reference row of every column is made real
      // nonnegative. Nets built from free-phase tables define the same kind
      // of joint amplitude but need the FP -> CP rewrite before the
      // factorization and d-separation theorems apply to their graph.
      cplx lead = t.table.at(0, col);
      cplx rot = std::abs(lead) > 1e-300 ? std::conj(lead) / std::abs(lead) : cplx(1.0);
      for (int row = 0; row < t.table.rows(); ++row) t.table.at(row, col) *= rot / nrm;
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

std::map<IndexSet, std::vector<cplx>> random_affinities(const Ug& g, Rng& rng,
                                                        bool magnitude_floor) {
  std::map<IndexSet, std::vector<cplx>> out;
  for (const IndexSet& c : super_cliques(g)) {
    ScopeIndexer idx(g.space(), c);
    std::vector<cplx> tab(idx.total());
    for (cplx& z : tab) {
      double mag = magnitude_floor ? 0.4 + 1.2 * rng.uniform() : rng.uniform();
      z = std::polar(mag, rng.uniform(-M_PI, M_PI));
    }
    out.emplace(c, std::move(tab));
  }
  return out;
}

AmplitudeTensor random_amplitude(SpacePtr space, Rng& rng, bool strictly_nonzero) {
  IndexSet scope = space->all_indices();
  ScopeIndexer idx(*space, scope);
  std::vector<cplx> entries(idx.total());
  for (cplx& z : entries)
    z = strictly_nonzero ? std::polar(0.3 + 0.7 * rng.uniform(), rng.uniform(-M_PI, M_PI))
                         : rng.complex_normal();
  double nrm = 0.0;
  for (const cplx& z : entries) nrm += std::norm(z);
  nrm = std::sqrt(nrm);
  for (cplx& z : entries) z /= nrm;
  return AmplitudeTensor(std::move(space), scope, std::move(entries));
}

ProbTensor random_positive_prob(SpacePtr space, Rng& rng) {
  IndexSet scope = space->all_indices();
  ScopeIndexer idx(*space, scope);
  std::vector<double> entries(idx.total());
  double total = 0.0;
  for (double& v : entries) {
    v = 0.1 + rng.uniform();
    total += v;
  }
  for (double& v : entries) v /= total;
  return ProbTensor(std::move(space), scope, std::move(entries));
}

DensityMatrix random_density(SpacePtr space, const IndexSet& scope, Rng& rng) {
  int d = int(space->joint_states(scope));
  ComplexMatrix g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g.at(r, c) = rng.complex_normal();
  ComplexMatrix rho = g * g.adjoint();
  double tr = rho.trace().real();
  rho = rho.scaled(1.0 / tr);
  // Round symmetrically so the Hermiticity check is exact.
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) {
      cplx avg = 0.5 * (rho.at(r, c) + std::conj(rho.at(c, r)));
      rho.at(r, c) = avg;
      rho.at(c, r) = std::conj(avg);
    }
  return DensityMatrix::make(std::move(space), scope, std::move(rho));
}

ComplexMatrix random_unitary_column_table(int rows, int cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    double nrm = 0.0;
    for (int r = 0; r < rows; ++r) {
      m.at(r, c) = rng.complex_normal();
      nrm += std::norm(m.at(r, c));
    }
    nrm = std::sqrt(nrm);
    for (int r = 0; r < rows; ++r) m.at(r, c) /= nrm;
  }
  return m;
}

std::vector<Dag> enumerate_all_dags(SpacePtr space) {
  int n = space->size();
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<Dag> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::pair<int, int>> arrows;
    std::size_t c = code;
    for (auto [i, j] : pairs) {
      switch (c % 3) {
        case 1: arrows.emplace_back(i, j); break;
        case 2: arrows.emplace_back(j, i); break;
        default: break;
      }
      c /= 3;
    }
    try {
      out.emplace_back(space, arrows);
    } catch (const Error& e) {
      if (e.code() != Errc::CycleDetected) throw;
    }
  }
  return out;
}

// --- fixtures -------------------------------------------------------------------

namespace {

ConditionalTable table_from_columns(int var, IndexSet given,
                                    std::vector<std::vector<cplx>> cols) {
  int rows = int(cols[0].size());
  ConditionalTable t{var, std::move(given), ComplexMatrix(rows, int(cols.size()))};
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (int r = 0; r < rows; ++r) t.table.at(r, int(c)) = cols[c][std::size_t(r)];
  return t;
}

}  // namespace

NetworkFile diamond_bayesian_fixture() {
  const double s = 1.0 / std::sqrt(2.0);
  NetworkFile net;
  net.kind = NetworkFile::Kind::Bayesian;
  net.space = random_binary_space(4);  // x1..x4
  net.edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  // Constrained-phase columns (first entry real): nets written this way
  // factor according to their own graph.
  net.tables.push_back(table_from_columns(0, {}, {{s, cplx(0, s)}}));
  net.tables.push_back(table_from_columns(1, {0}, {{s, s}, {s, -s}}));
  net.tables.push_back(table_from_columns(2, {0}, {{s, cplx(0, s)}, {s, cplx(0, -s)}}));
  net.tables.push_back(table_from_columns(
      3, {1, 2}, {{1.0, 0.0}, {0.0, 1.0}, {s, cplx(0, s)}, {s, cplx(0, -s)}}));
  return net;
}

NetworkFile diamond_markov_fixture() {
  NetworkFile net;
  net.kind = NetworkFile::Kind::Markov;
  net.space = random_binary_space(4);
  net.edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  net.affinities.emplace(IndexSet{0, 1},
                         std::vector<cplx>{{1.0, 0.0}, {0.5, 0.2}, {0.3, -0.4}, {0.9, 0.1}});
  net.affinities.emplace(IndexSet{0, 2},
                         std::vector<cplx>{{0.7, 0.0}, {0.2, 0.6}, {1.0, -0.1}, {0.4, 0.4}});
  net.affinities.emplace(IndexSet{1, 3},
                         std::vector<cplx>{{0.8, 0.3}, {0.6, 0.0}, {0.5, 0.5}, {1.0, 0.0}});
  net.affinities.emplace(IndexSet{2, 3},
                         std::vector<cplx>{{0.9, -0.2}, {0.4, 0.1}, {0.7, 0.7}, {0.6, 0.0}});
  return net;
}

namespace {

SpacePtr counterexample_space() {
  return make_space({Variable{"x1", {"0", "1"}}, Variable{"x2", {"0", "1"}},
                     Variable{"a", {"0", "1"}}});
}

}  // namespace

NetworkFile counterexample1_fixture(double xi) {
  // A(x1,x2,a) = delta(x1,1) delta(x2,1) e^{i xi delta(a,0)} / sqrt(2)
  const double s = 1.0 / std::sqrt(2.0);
  NetworkFile net;
  net.kind = NetworkFile::Kind::Bayesian;
  net.space = counterexample_space();
  net.edges = {{0, 1}, {0, 2}, {1, 2}};
  net.tables.push_back(table_from_columns(0, {}, {{0.0, 1.0}}));
  net.tables.push_back(table_from_columns(1, {0}, {{1.0, 0.0}, {0.0, 1.0}}));
  net.tables.push_back(table_from_columns(
      2, {0, 1},
      {{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, {std::polar(s, xi), cplx(s, 0.0)}}));
  return net;
}

NetworkFile counterexample2_fixture(double xi) {
  // A(x1,x2,a) = e^{i xi delta((x1,x2,a),(1,1,1))} / sqrt(8)
  const double s = 1.0 / std::sqrt(2.0);
  NetworkFile net;
  net.kind = NetworkFile::Kind::Bayesian;
  net.space = counterexample_space();
  net.edges = {{0, 1}, {0, 2}, {1, 2}};
  net.tables.push_back(table_from_columns(0, {}, {{s, s}}));
  net.tables.push_back(table_from_columns(1, {0}, {{s, s}, {s, s}}));
  net.tables.push_back(table_from_columns(
      2, {0, 1}, {{s, s}, {s, s}, {s, s}, {cplx(s, 0.0), std::polar(s, xi)}}));
  return net;
}

Fig3Case fig3_case(Fig3Shape shape) {
  Fig3Case c;
  c.shape = shape;
  switch (shape) {
    case Fig3Shape::Chain:
      c.space = make_space({{"x", {"0", "1"}}, {"a", {"0", "1"}}, {"y", {"0", "1"}}});
      c.arrows = {{0, 1}, {1, 2}};
      c.x = 0; c.a = 1; c.y = 2;
      break;
    case Fig3Shape::CommonCause:
      c.space = make_space({{"x", {"0", "1"}}, {"a", {"0", "1"}}, {"y", {"0", "1"}}});
      c.arrows = {{1, 0}, {1, 2}};
      c.x = 0; c.a = 1; c.y = 2;
      break;
    case Fig3Shape::Collider:
      c.space = make_space({{"x", {"0", "1"}}, {"a", {"0", "1"}}, {"y", {"0", "1"}}});
      c.arrows = {{0, 1}, {2, 1}};
      c.x = 0; c.a = 1; c.y = 2;
      break;
    case Fig3Shape::ColliderDescendant:
      c.space = make_space(
          {{"x", {"0", "1"}}, {"b", {"0", "1"}}, {"y", {"0", "1"}}, {"a", {"0", "1"}}});
      c.arrows = {{0, 1}, {2, 1}, {1, 3}};
      c.x = 0; c.a = 3; c.y = 2;
      break;
  }
  return c;
}

const std::vector<Fig3Row>& fig3_truth_table() {
  static const std::vector<Fig3Row> rows = {
      {Fig3Shape::Chain, false, false},
      {Fig3Shape::Chain, true, true},
      {Fig3Shape::CommonCause, false, false},
      {Fig3Shape::CommonCause, true, true},
      {Fig3Shape::Collider, false, true},
      {Fig3Shape::Collider, true, false},
      {Fig3Shape::ColliderDescendant, false, true},
      {Fig3Shape::ColliderDescendant, true, false},
  };
  return rows;
}

// --- harness ----------------------------------------------------------------------

void parallel_trials(std::size_t trials, std::uint64_t master_seed, int workers,
                     const std::function<std::vector<std::string>(std::size_t, std::uint64_t)>& body,
                     std::vector<HarnessFailure>& failures) {
  if (workers <= 0) workers = int(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min<int>(workers, int(trials) > 0 ? int(trials) : 1);

  std::vector<std::vector<std::string>> results(trials);
  std::atomic<std::size_t> next{0};
  auto run = [&]() {
    for (;;) {
      std::size_t t = next.fetch_add(1);
      if (t >= trials) return;
      std::uint64_t trial_seed = Rng::derive(master_seed, t);
      try {
        results[t] = body(t, trial_seed);
      } catch (const std::exception& e) {
        results[t] = {std::string("exception: ") + e.what()};
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  for (std::size_t t = 0; t < trials; ++t)
    for (const std::string& msg : results[t])
      failures.push_back(HarnessFailure{t, Rng::derive(master_seed, t), msg});
}

namespace {

constexpr double kTheoremTol = 1e-8;

using CheckFn = HarnessReport (*)(const HarnessParams&);

std::string net_artifact(const NetworkFile& net) {
  return "\n--- reproduction net ---\n" + serialize_network(net);
}

NetworkFile net_from_dag(const Dag& g, std::vector<ConditionalTable> tables) {
  NetworkFile net;
  net.kind = NetworkFile::Kind::Bayesian;
  net.space = g.space_ptr();
  net.edges = g.arrows();
  net.tables = std::move(tables);
  return net;
}

HarnessReport check_dsep_soundness_impl(const HarnessParams& p, bool classical) {
  HarnessReport rep;
  rep.check = classical ? "dsep-soundness-classical" : "dsep-soundness";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    int n = 3 + int(rng.index(static_cast<std::size_t>(std::max(1, p.max_nodes - 2))));
    Dag g = random_dag(random_binary_space(n), rng);
    auto tables = random_bnet_tables(g, rng);
    AmplitudeTensor amp = build_amplitude_from_bnet(g, tables, p.cfg);
    ThetaField tf = theta_field(amp, p.cfg);
    ProbTensor prob = amp_to_prob(amp, p.cfg);
    for (const Independency& i : enumerate_triples(n, p.cfg)) {
      bool sep = d_separated_dag(g, i);
      if (sep != d_separated_dag_paths(g, i))
        fails.push_back("reachability disagrees with path oracle on " + show_indep(i));
      if (!sep) continue;
      bool ok = classical ? tau(TauKind::P, prob, i, kTheoremTol, p.cfg)
                          : tau(TauKind::A, tf, i, kTheoremTol, p.cfg);
      if (!ok)
        fails.push_back("d-separated but tau failed: " + show_indep(i) +
                        net_artifact(net_from_dag(g, tables)));
    }
    return fails;
  }, rep.failures);
  return rep;
}

HarnessReport check_dsep_soundness(const HarnessParams& p) {
  return check_dsep_soundness_impl(p, false);
}

HarnessReport check_dsep_soundness_classical(const HarnessParams& p) {
  return check_dsep_soundness_impl(p, true);
}

HarnessReport check_markov_pairwise_equiv(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "markov-pairwise-equiv";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    int n = 2 + int(rng.index(static_cast<std::size_t>(std::max(1, p.max_nodes - 1))));
    SpacePtr space = random_binary_space(n);
    Ug g(space, random_ug(space, rng).links());

    // Factorized side: a clique-affinity product must pass the lambda test
    // and every pairwise independency.
    AmplitudeTensor amp = build_amplitude_from_mnet(g, random_affinities(g, rng, true), p.cfg);
    ThetaField tf = theta_field(amp, p.cfg);
    if (!factors_according_ug(tf, g, p.cfg))
      fails.push_back("clique-built amplitude failed the factorization test");
    for (const Independency& i : graphic_iset(g, GraphIsetKind::Pair, p.cfg))
      if (!tau(TauKind::A, tf, i, kTheoremTol, p.cfg))
        fails.push_back("pairwise independency failed on factorized net: " + show_indep(i));
    for (const Independency& i : graphic_iset(g, GraphIsetKind::Glo, p.cfg))
      if (!tau(TauKind::A, tf, i, kTheoremTol, p.cfg))
        fails.push_back("global independency failed on factorized net: " + show_indep(i));

    // Generic side: the biconditional between factorization and the pairwise
    // I-set, with positivity enforced.
    AmplitudeTensor gen = random_amplitude(space, rng, true);
    ThetaField gtf = theta_field(gen, p.cfg);
    bool factored = factors_according_ug(gtf, g, p.cfg);
    bool pairwise = true;
    for (const Independency& i : graphic_iset(g, GraphIsetKind::Pair, p.cfg))
      if (!tau(TauKind::A, gtf, i, kTheoremTol, p.cfg)) pairwise = false;
    if (factored != pairwise)
      fails.push_back(std::string("factorization/pairwise mismatch on generic amplitude: ") +
                      (factored ? "factored" : "unfactored") + " vs " +
                      (pairwise ? "pairwise" : "not pairwise"));
    return fails;
  }, rep.failures);
  return rep;
}

HarnessReport check_dag_fact_iff_loc(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "dag-fact-iff-loc";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    int n = 2 + int(rng.index(static_cast<std::size_t>(std::max(1, p.max_nodes - 1))));
    SpacePtr space = random_binary_space(n);
    Dag g = random_dag(space, rng);

    AmplitudeTensor amp = build_amplitude_from_bnet(g, random_bnet_tables(g, rng), p.cfg);
    ThetaField tf = theta_field(amp, p.cfg);
    if (!factors_according_dag(tf, g, p.cfg))
      fails.push_back("graph-built amplitude failed the factorization test");
    for (const Independency& i : graphic_iset(g, GraphIsetKind::Loc, p.cfg))
      if (!tau(TauKind::A, tf, i, kTheoremTol, p.cfg))
        fails.push_back("local independency failed on factorized net: " + show_indep(i));

    AmplitudeTensor gen = random_amplitude(space, rng, true);
    ThetaField gtf = theta_field(gen, p.cfg);
    bool factored = factors_according_dag(gtf, g, p.cfg);
    bool local = true;
    for (const Independency& i : graphic_iset(g, GraphIsetKind::Loc, p.cfg))
      if (!tau(TauKind::A, gtf, i, kTheoremTol, p.cfg)) local = false;
    if (factored != local)
      fails.push_back(std::string("factorization/local-I-set mismatch: ") +
                      (factored ? "factored" : "unfactored") + " vs " +
                      (local ? "local holds" : "local fails"));
    return fails;
  }, rep.failures);
  return rep;
}

HarnessReport check_chain_powerset(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "chain-powerset";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    int n = 2 + int(rng.index(3));  // 2..4 binary variables
    SpacePtr space = random_binary_space(n);
    AmplitudeTensor amp = random_amplitude(space, rng, true);
    ThetaField tf = theta_field(amp, p.cfg);

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[std::size_t(i)] = i;
    for (int rep_i = 0; rep_i < 2; ++rep_i) {
      AmplitudeTensor back = product_of_tables(tf, chain_factorize(tf, order, p.cfg));
      for (std::size_t f = 0; f < amp.entries().size(); ++f)
        if (std::abs(back.at(f) - amp.at(f)) > 1e-8) {
          fails.push_back("chain reconstruction residual " +
                          std::to_string(std::abs(back.at(f) - amp.at(f))));
          break;
        }
      for (int i = n - 1; i > 0; --i)
        std::swap(order[std::size_t(i)], order[rng.index(std::size_t(i) + 1)]);
    }

    AmplitudeTensor pow_back = lambda_product(tf, powerset_lambda(tf, p.cfg));
    for (std::size_t f = 0; f < amp.entries().size(); ++f)
      if (std::abs(pow_back.at(f) - amp.at(f)) > 1e-8) {
        fails.push_back("power-set reconstruction residual " +
                        std::to_string(std::abs(pow_back.at(f) - amp.at(f))));
        break;
      }

    std::vector<cplx> f_table(16);
    for (cplx& z : f_table) z = rng.complex_normal();
    std::vector<cplx> round = mobius_forward(mobius_invert(f_table, 4, p.cfg), 4, p.cfg);
    for (std::size_t i = 0; i < f_table.size(); ++i)
      if (std::abs(round[i] - f_table[i]) > 1e-12) {
        fails.push_back("Mobius round-trip residual " + std::to_string(std::abs(round[i] - f_table[i])));
        break;
      }
    return fails;
  }, rep.failures);
  return rep;
}

HarnessReport check_purify_schmidt(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "purify-schmidt";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);

    int d = 2 + int(rng.index(7));  // 2..8
    std::vector<std::string> states;
    for (int s = 0; s < d; ++s) states.push_back(std::to_string(s));
    SpacePtr space = make_space({Variable{"v", states}});
    DensityMatrix rho = random_density(space, {0}, rng);
    DensityMatrix back = purification_rebuild(purify(rho, p.cfg), rho, p.cfg);
    if (back.matrix().max_abs_diff(rho.matrix()) > 1e-9)
      fails.push_back("purification rebuild residual " +
                      std::to_string(back.matrix().max_abs_diff(rho.matrix())));

    int dx = 2 + int(rng.index(3)), dy = 2 + int(rng.index(3));
    std::vector<std::string> sx, sy;
    for (int s = 0; s < dx; ++s) sx.push_back(std::to_string(s));
    for (int s = 0; s < dy; ++s) sy.push_back(std::to_string(s));
    SpacePtr bspace = make_space({Variable{"x", sx}, Variable{"y", sy}});
    AmplitudeTensor amp = random_amplitude(bspace, rng);
    SchmidtResult sc = schmidt(amp, {0}, p.cfg);
    for (int x = 0; x < dx; ++x)
      for (int y = 0; y < dy; ++y) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < sc.coeffs.size(); ++j)
          acc += sc.x_given_j.at(x, int(j)) * sc.coeffs[j] * sc.y_given_j.at(y, int(j));
        cplx want = amp.at(static_cast<std::size_t>(x * dy + y));
        if (std::abs(acc - want) > 1e-9) {
          fails.push_back("Schmidt reconstruction residual " + std::to_string(std::abs(acc - want)));
          x = dx;
          break;
        }
      }
    return fails;
  }, rep.failures);

  // Bell fixture: exact singular values.
  const double s = 1.0 / std::sqrt(2.0);
  SpacePtr bell_space = random_binary_space(2);
  AmplitudeTensor bell(bell_space, {0, 1}, {s, 0.0, 0.0, s});
  SchmidtResult sc = schmidt(bell, {0}, p.cfg);
  if (std::abs(sc.coeffs[0] - s) > 1e-12 || std::abs(sc.coeffs[1] - s) > 1e-12)
    rep.failures.push_back(
        {0, p.seed, "Bell Schmidt coefficients deviate from 1/sqrt(2): " +
                        std::to_string(sc.coeffs[0]) + ", " + std::to_string(sc.coeffs[1])});
  return rep;
}

HarnessReport check_superop_algebra(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "superop-algebra";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t trial, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    int n = 2 + int(rng.index(2));  // 2..3 binary variables
    SpacePtr space = random_binary_space(n);
    IndexSet scope = space->all_indices();

    // entry-sum . diag == trace, exactly.
    int d = int(space->joint_states(scope));
    ComplexMatrix m(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m.at(r, c) = rng.complex_normal();
    IndexSet target;
    for (int v = 0; v < n; ++v)
      if (rng.uniform() < 0.5) target.push_back(v);
    if (target.empty()) target.push_back(int(rng.index(static_cast<std::size_t>(n))));
    ScopedMatrix sm{space, scope, m};
    ScopedMatrix lhs = superop(superop(sm, SuperOpKind::Diag, target), SuperOpKind::EntrySum, target);
    ScopedMatrix rhs = superop(sm, SuperOpKind::Trace, target);
    if (lhs.m.max_abs_diff(rhs.m) != 0.0)
      fails.push_back("entry-sum . diag != trace, max diff " +
                      std::to_string(lhs.m.max_abs_diff(rhs.m)));

    // Super-operator vs projector measurement paths.
    AmplitudeTensor amp = random_amplitude(space, rng);
    MeasurementPlan plan;
    for (int v = 0; v < n; ++v) {
      double u = rng.uniform();
      if (u < 0.4) plan.z_vis.push_back(v);
      else if (u < 0.7) plan.z_asum.push_back(v);
      else plan.z_psum.push_back(v);
    }
    if (plan.z_vis.empty()) {
      int v = plan.z_asum.empty() ? plan.z_psum[0] : plan.z_asum[0];
      plan.z_vis.push_back(v);
      plan.z_asum = set_minus(plan.z_asum, {v});
      plan.z_psum = set_minus(plan.z_psum, {v});
      plan.z_vis = sorted_unique(plan.z_vis);
    }
    try {
      ProbTensor d1 = measurement_distribution(amp, plan, p.cfg);
      ProbTensor d2 = measurement_distribution_projector(amp, plan, p.cfg);
      for (std::size_t i = 0; i < d1.entries().size(); ++i)
        if (std::abs(d1.at(i) - d2.at(i)) > 1e-9) {
          fails.push_back("measurement paths disagree by " +
                          std::to_string(std::abs(d1.at(i) - d2.at(i))));
          break;
        }
    } catch (const Error& e) {
      if (e.code() != Errc::ZeroDenominator) throw;  // coherent cancellation; no distribution
    }

    if (trial == 0) {
      // Dephasing facts: already-diagonal states are fixed points, one sample
      // is a valid state, and 1e5 samples land within the statistical bound.
      const double s = 1.0 / std::sqrt(2.0);
      SpacePtr bspace = random_binary_space(2);
      AmplitudeTensor bell(bspace, {0, 1}, {s, 0.0, 0.0, s});
      DensityMatrix mu = meta_density(bell, p.cfg);

      ScopedMatrix diag = superop(mu.scoped(), SuperOpKind::Diag, {0});
      DensityMatrix already =
          DensityMatrix::make(bspace, {0, 1},
                              superop(mu.scoped(), SuperOpKind::Diag, {0, 1}).m, p.cfg);
      DensityMatrix fixed_pt = random_phase_dephase(already, {0}, 50, seed, p.cfg);
      if (fixed_pt.matrix().max_abs_diff(already.matrix()) > 1e-12)
        fails.push_back("dephasing moved an already-diagonal state");

      random_phase_dephase(mu, {0}, 1, seed, p.cfg);  // single sample must validate

      DensityMatrix deph = random_phase_dephase(mu, {0}, 100000, seed, p.cfg);
      double worst = deph.matrix().max_abs_diff(diag.m);
      if (worst > 0.02)
        fails.push_back("dephasing residual " + std::to_string(worst) + " exceeds 0.02");
    }
    return fails;
  }, rep.failures);
  return rep;
}

HarnessReport check_rules_clean(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "rules";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    SpacePtr space = random_binary_space(4);
    RulesReport rp = check_rules(TauKind::P, random_positive_prob(space, rng), kTheoremTol, p.cfg);
    if (!rp.intersection_checked) fails.push_back("positive P model reported zeros");
    for (const RuleViolation& v : rp.violations)
      fails.push_back(std::string("tau^P violated ") + rule_name(v.rule) + " at " + v.instantiation);
    RulesReport ra = check_rules(TauKind::A, theta_field(random_amplitude(space, rng, true), p.cfg),
                                 kTheoremTol, p.cfg);
    if (!ra.intersection_checked) fails.push_back("nonzero A model reported zeros");
    for (const RuleViolation& v : ra.violations)
      fails.push_back(std::string("tau^A violated ") + rule_name(v.rule) + " at " + v.instantiation);
    return fails;
  }, rep.failures);
  return rep;
}

HarnessReport check_entangle_cert(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "entangle-cert";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    for (Fig3Shape shape : {Fig3Shape::Chain, Fig3Shape::CommonCause, Fig3Shape::Collider}) {
      Fig3Case c = fig3_case(shape);
      Dag g(c.space, c.arrows);
      AmplitudeTensor amp = build_amplitude_from_bnet(g, random_bnet_tables(g, rng), p.cfg);
      CertificateResult cert =
          entanglement_zero_certificate(g, amp, {c.x}, {c.y}, {}, p.cfg);
      bool want = shape != Fig3Shape::Collider;
      if (cert.certified_zero != want)
        fails.push_back(std::string("certificate mismatch on shape ") +
                        std::to_string(int(shape)));
      if (want && cert.upper_bound >= kTheoremTol)
        fails.push_back("certified pair has upper bound " + std::to_string(cert.upper_bound));
      if (want && (!cert.witness || *cert.witness != IndexSet{c.a}))
        fails.push_back("certificate witness is not the grounded middle node");
    }

    // Entry-summed middle node: not groundable, so no certificate.
    Fig3Case chain = fig3_case(Fig3Shape::Chain);
    Dag g(chain.space, chain.arrows);
    AmplitudeTensor amp = build_amplitude_from_bnet(g, random_bnet_tables(g, rng), p.cfg);
    CertificateResult cert =
        entanglement_zero_certificate(g, amp, {chain.x}, {chain.y}, {chain.a}, p.cfg);
    if (cert.certified_zero)
      fails.push_back("entry-summed chain must not be certified");
    return fails;
  }, rep.failures);
  return rep;
}

HarnessReport check_cert_consistency(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "cert-consistency";
  SpacePtr space = random_binary_space(4);
  std::vector<Dag> dags = enumerate_all_dags(space);
  rep.trials = dags.size();
  std::size_t checked = 0;
  for (std::size_t di = 0; di < dags.size(); ++di) {
    const Dag& g = dags[di];
    // All disjoint nonempty (J, K1, K2): certified(J, K1+K2) <=> both parts.
    for (std::size_t code = 0; code < 256; ++code) {  // 4 nodes x {J,K1,K2,out}
      IndexSet j, k1, k2;
      std::size_t c = code;
      for (int v = 0; v < 4; ++v) {
        switch (c % 4) {
          case 0: j.push_back(v); break;
          case 1: k1.push_back(v); break;
          case 2: k2.push_back(v); break;
          default: break;
        }
        c /= 4;
      }
      if (j.empty() || k1.empty() || k2.empty()) continue;
      ++checked;
      bool whole = d_glo_contains(g, j, set_union(k1, k2));
      bool parts = d_glo_contains(g, j, k1) && d_glo_contains(g, j, k2);
      if (whole != parts) {
        rep.failures.push_back(
            {di, p.seed, "decomposition consistency failed on DAG " + std::to_string(di) +
                             ": J=" + show_set(j) + " K1=" + show_set(k1) + " K2=" + show_set(k2)});
      }
    }
  }
  rep.summary = std::to_string(dags.size()) + " DAGs, " + std::to_string(checked) + " triples";
  return rep;
}

HarnessReport check_cmi_props(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "cmi-props";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    SpacePtr space = random_binary_space(4);
    DensityMatrix rho = random_density(space, space->all_indices(), rng);

    // Chain rule: S(x:y1,y2|e) = S(x:y1|y2,e) + S(x:y2|e).
    double lhs = quantum_cmi(rho, {0}, {1, 2}, {3}, p.cfg).value;
    double rhs = quantum_cmi(rho, {0}, {1}, {2, 3}, p.cfg).value +
                 quantum_cmi(rho, {0}, {2}, {3}, p.cfg).value;
    if (std::abs(lhs - rhs) > 1e-8)
      fails.push_back("CMI chain rule residual " + std::to_string(std::abs(lhs - rhs)));

    // Strong subadditivity on a random disjoint triple (clamp throws beyond
    // -cmi_clamp, which is the acceptance bound).
    for (const Independency& i : {Independency::make({0}, {1}, {2, 3}),
                                  Independency::make({0, 3}, {1}, {2}),
                                  Independency::make({2}, {3}, {})}) {
      try {
        quantum_cmi(rho, i.j_set, i.k_set, i.e_set, p.cfg);
      } catch (const Error& e) {
        fails.push_back(std::string("strong subadditivity violated: ") + e.what());
      }
    }
    return fails;
  }, rep.failures);
  return rep;
}

HarnessReport check_agreement(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "agreement";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    int n = 2 + int(rng.index(2));  // 2..3: every triple costs an eigendecomposition
    SpacePtr space = random_binary_space(n);
    bool factored = rng.uniform() < 0.5;
    Dag g = random_dag(space, rng);
    AmplitudeTensor amp = factored
        ? build_amplitude_from_bnet(g, random_bnet_tables(g, rng), p.cfg)
        : random_amplitude(space, rng, true);
    ThetaField tf = theta_field(amp, p.cfg);
    for (const Independency& i : enumerate_triples(n, p.cfg)) {
      if (!i.all_encompassing(n)) continue;
      try {
        all_encompassing_agreement(tf, i, kTheoremTol, p.cfg);
      } catch (const Error& e) {
        fails.push_back(std::string(e.what()) + " on " + show_indep(i));
      }
    }
    return fails;
  }, rep.failures);
  return rep;
}

HarnessReport check_cmi_rules_search(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "cmi-rules-search";
  rep.trials = std::size_t(p.trials);
  rep.informational = true;
  std::size_t cmi_viol = 0, cmip_viol = 0, instantiations = 0;
  std::mutex mu;
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    Rng rng(seed);
    SpacePtr space = random_binary_space(3);
    ThetaField tf = theta_field(random_amplitude(space, rng), p.cfg);
    RulesReport r1 = check_rules(TauKind::CMI, tf, kTheoremTol, p.cfg);
    RulesReport r2 = check_rules(TauKind::CMIP, tf, kTheoremTol, p.cfg);
    std::lock_guard<std::mutex> lock(mu);
    cmi_viol += r1.violations.size();
    cmip_viol += r2.violations.size();
    instantiations += r1.instantiations;
    return std::vector<std::string>{};
  }, rep.failures);
  rep.summary = "searched " + std::to_string(instantiations) +
                " instantiations per kind; tau^CMI violations: " + std::to_string(cmi_viol) +
                ", tau^CMI' violations: " + std::to_string(cmip_viol) +
                " (informational; the rules are not asserted for CMI kinds)";
  return rep;
}

HarnessReport check_counterexamples(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "counterexamples";
  rep.trials = 2;

  NetworkFile c1 = counterexample1_fixture(p.xi);
  AmplitudeTensor a1 = c1.joint_amplitude(p.cfg);
  ThetaField tf1 = theta_field(a1, p.cfg);
  Independency i12 = Independency::make({0}, {1}, {});
  TauReport cmip1 = tau_detailed(TauKind::CMIP, tf1, i12, p.cfg.cmi_tol, p.cfg);
  TauReport a1rep = tau_detailed(TauKind::A, tf1, i12, kTheoremTol, p.cfg);
  if (!(cmip1.value && cmip1.cmi < 1e-10))
    rep.failures.push_back({0, p.seed, "counterexample 1: tau^CMI' should hold, CMI = " +
                                           std::to_string(cmip1.cmi)});
  if (!(!a1rep.value && a1rep.max_residual > 0.1))
    rep.failures.push_back({0, p.seed, "counterexample 1: tau^A should fail with residual > 0.1, got " +
                                           std::to_string(a1rep.max_residual)});

  NetworkFile c2 = counterexample2_fixture(p.xi);
  AmplitudeTensor a2 = c2.joint_amplitude(p.cfg);
  ThetaField tf2 = theta_field(a2, p.cfg);
  TauReport a2rep = tau_detailed(TauKind::A, tf2, i12, kTheoremTol, p.cfg);
  TauReport cmip2 = tau_detailed(TauKind::CMIP, tf2, i12, p.cfg.cmi_tol, p.cfg);
  if (!(a2rep.value && a2rep.max_residual < 1e-10))
    rep.failures.push_back({1, p.seed, "counterexample 2: tau^A should hold within 1e-10, residual = " +
                                           std::to_string(a2rep.max_residual)});
  if (!(!cmip2.value && cmip2.cmi > 1e-3))
    rep.failures.push_back({1, p.seed, "counterexample 2: tau^CMI' should fail with CMI > 1e-3, got " +
                                           std::to_string(cmip2.cmi)});
  rep.summary = "CMI(counterexample 2) = " + std::to_string(cmip2.cmi);
  return rep;
}

HarnessReport check_fig3(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "fig3";
  const auto& rows = fig3_truth_table();
  rep.trials = rows.size() * std::size_t(p.trials);
  for (std::size_t row = 0; row < rows.size(); ++row) {
    const Fig3Row& r = rows[row];
    Fig3Case c = fig3_case(r.shape);
    Dag g(c.space, c.arrows);
    IndexSet e = r.grounded ? IndexSet{c.a} : IndexSet{};
    Independency i = Independency::make({c.x}, {c.y}, e);
    if (d_separated_dag(g, i) != r.expected) {
      rep.failures.push_back({row, p.seed, "graphical truth value wrong for row " + std::to_string(row + 1)});
      continue;
    }
    std::vector<HarnessFailure> row_failures;
    parallel_trials(std::size_t(p.trials), Rng::derive(p.seed, row), p.workers,
                    [&](std::size_t, std::uint64_t seed) {
      std::vector<std::string> fails;
      Rng rng(seed);
      auto tables = random_bnet_tables(g, rng);
      AmplitudeTensor amp = build_amplitude_from_bnet(g, tables, p.cfg);
      ThetaField tf = theta_field(amp, p.cfg);
      bool got = tau(TauKind::A, tf, i, kTheoremTol, p.cfg);
      if (got != r.expected)
        fails.push_back("row " + std::to_string(row + 1) + ": tau^A = " +
                        (got ? "T" : "F") + ", expected " + (r.expected ? "T" : "F") +
                        net_artifact(net_from_dag(g, tables)));
      return fails;
    }, row_failures);
    for (auto& f : row_failures) rep.failures.push_back(std::move(f));
  }
  return rep;
}

HarnessReport check_fp_cp(const HarnessParams& p) {
  HarnessReport rep;
  rep.check = "fp-cp";
  rep.trials = std::size_t(p.trials);
  parallel_trials(rep.trials, p.seed, p.workers, [&](std::size_t, std::uint64_t seed) {
    std::vector<std::string> fails;
    Rng rng(seed);
    int rows = 2 + int(rng.index(3)), cols = 2 + int(rng.index(3));
    ComplexMatrix f = random_unitary_column_table(rows, cols, rng);
    FpToCpResult r = fp_to_cp(f);
    ComplexMatrix back = r.c1 * r.c2 * r.c3;
    if (back.max_abs_diff(f) > 1e-12)
      fails.push_back("product residual " + std::to_string(back.max_abs_diff(f)));
    auto has_real_row = [](const ComplexMatrix& m) {
      for (int row = 0; row < m.rows(); ++row) {
        bool real = true;
        for (int col = 0; col < m.cols(); ++col)
          if (std::abs(m.at(row, col).imag()) > 1e-12) real = false;
        if (real) return true;
      }
      return false;
    };
    if (!has_real_row(r.c1)) fails.push_back("c1 has no all-real row");
    if (!has_real_row(r.c2)) fails.push_back("c2 has no all-real row");
    if (!has_real_row(r.c3)) fails.push_back("c3 has no all-real row");
    return fails;
  }, rep.failures);
  return rep;
}

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"dsep-soundness", check_dsep_soundness},
      {"dsep-soundness-classical", check_dsep_soundness_classical},
      {"markov-pairwise-equiv", check_markov_pairwise_equiv},
      {"dag-fact-iff-loc", check_dag_fact_iff_loc},
      {"chain-powerset", check_chain_powerset},
      {"purify-schmidt", check_purify_schmidt},
      {"superop-algebra", check_superop_algebra},
      {"rules", check_rules_clean},
      {"entangle-cert", check_entangle_cert},
      {"cert-consistency", check_cert_consistency},
      {"cmi-props", check_cmi_props},
      {"agreement", check_agreement},
      {"cmi-rules-search", check_cmi_rules_search},
      {"counterexamples", check_counterexamples},
      {"fig3", check_fig3},
      {"fp-cp", check_fp_cp},
  };
  return checks;
}

}  // namespace

std::vector<std::string> harness_checks() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

HarnessReport run_harness(const std::string& check, const HarnessParams& params) {
  for (const auto& [name, fn] : registry())
    if (name == check) return fn(params);
  fail(Errc::UnknownCheck, "no harness check named '" + check + "'");
}

}  // namespace qbn
