#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qbn/independence.hpp"
#include "qbn/network.hpp"
#include "qbn/rng.hpp"

namespace qbn {

// --- random model generators --------------------------------------------------

SpacePtr random_binary_space(int n);
SpacePtr make_space(std::vector<Variable> vars);

Dag random_dag(SpacePtr space, Rng& rng, double edge_prob = 0.5);
Ug random_ug(SpacePtr space, Rng& rng, double edge_prob = 0.5);

// Unit-norm Gaussian columns per node.
std::vector<ConditionalTable> random_bnet_tables(const Dag& g, Rng& rng);
std::map<IndexSet, std::vector<cplx>> random_affinities(const Ug& g, Rng& rng,
                                                        bool magnitude_floor = true);

AmplitudeTensor random_amplitude(SpacePtr space, Rng& rng, bool strictly_nonzero = false);
ProbTensor random_positive_prob(SpacePtr space, Rng& rng);
DensityMatrix random_density(SpacePtr space, const IndexSet& scope, Rng& rng);
ComplexMatrix random_unitary_column_table(int rows, int cols, Rng& rng);

// All DAGs on the node set (3^(n(n-1)/2) orientation patterns, acyclic only).
std::vector<Dag> enumerate_all_dags(SpacePtr space);

// --- canonical fixtures --------------------------------------------------------

NetworkFile diamond_bayesian_fixture();
NetworkFile diamond_markov_fixture();
NetworkFile counterexample1_fixture(double xi);
NetworkFile counterexample2_fixture(double xi);

enum class Fig3Shape { Chain, CommonCause, Collider, ColliderDescendant };
struct Fig3Case {
  Fig3Shape shape;
  SpacePtr space;
  std::vector<std::pair<int, int>> arrows;
  int x, y, a;  // query endpoints and the groundable middle node
};
Fig3Case fig3_case(Fig3Shape shape);

struct Fig3Row {
  Fig3Shape shape;
  bool grounded;  // condition on {a}?
  bool expected;  // the paper's truth column
};
const std::vector<Fig3Row>& fig3_truth_table();

// --- randomized theorem harness -----------------------------------------------

struct HarnessParams {
  int trials = 100;
  int max_nodes = 5;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: hardware concurrency
  double xi = 1.5707963267948966;  // counterexample fixture phase
  Config cfg;
};

struct HarnessFailure {
  std::size_t trial = 0;
  std::uint64_t trial_seed = 0;
  std::string detail;  // includes a serialized reproduction artifact when available
};

struct HarnessReport {
  std::string check;
  std::size_t trials = 0;
  std::vector<HarnessFailure> failures;
  bool informational = false;
  std::string summary;

  bool passed() const { return informational || failures.empty(); }
};

std::vector<std::string> harness_checks();
HarnessReport run_harness(const std::string& check, const HarnessParams& params);

// Fan trials out across workers with per-trial splitmix seeds; failures merge
// in trial order regardless of scheduling.
void parallel_trials(std::size_t trials, std::uint64_t master_seed, int workers,
                     const std::function<std::vector<std::string>(std::size_t, std::uint64_t)>& body,
                     std::vector<HarnessFailure>& failures);

}  // namespace qbn
