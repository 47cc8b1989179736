// Command-line front end: graphical separation queries, independence truth
// functions, factorization checks, measurements, entanglement certificates
// and the randomized theorem harness, over .qbn network files.
//
// Exit codes: 0 = query true / success, 1 = query false, 2 = error,
// 64 = usage error.

#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qbn/harness.hpp"
#include "qbn/independence.hpp"
#include "qbn/network.hpp"

namespace {

using nlohmann::ordered_json;
using namespace qbn;

constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitError = 2;
constexpr int kExitUsage = 64;

struct GlobalOpts {
  std::string format = "table";  // table | json
  double tol = 1e-8;
  double eps = 0.0;
  int limit = 8;
  std::string ref;  // comma list of state names; empty: all-first-states
  std::uint64_t seed = 0;
};

struct QueryOpts {
  std::string j, k, e;
};

IndexSet parse_name_list(const VariableSpace& space, const std::string& csv) {
  IndexSet out;
  if (csv.empty()) return out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(space.require_index(item));
  }
  return sorted_unique(std::move(out));
}

// "x=0,y=1" -> Assignment
Assignment parse_assignment(const VariableSpace& space, const std::string& text) {
  IndexSet scope;
  std::vector<std::pair<int, int>> pairs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto pos = item.find('=');
    if (pos == std::string::npos)
      fail(Errc::UsageError, "assignments look like var=state, got '" + item + "'");
    int var = space.require_index(item.substr(0, pos));
    std::string state = item.substr(pos + 1);
    const auto& states = space.var(var).states;
    auto it = std::find(states.begin(), states.end(), state);
    if (it == states.end())
      fail(Errc::UsageError, "variable '" + space.var(var).name + "' has no state '" + state + "'");
    pairs.emplace_back(var, int(it - states.begin()));
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> values;
  for (auto [var, st] : pairs) {
    scope.push_back(var);
    values.push_back(st);
  }
  return make_assignment(space, std::move(scope), std::move(values));
}

Config make_config(const GlobalOpts& g) {
  Config cfg;
  cfg.eps = g.eps;
  cfg.enumeration_limit = g.limit;
  return cfg;
}

ThetaField field_for(const NetworkFile& net, const GlobalOpts& g, const Config& cfg) {
  AmplitudeTensor amp = net.joint_amplitude(cfg);
  if (g.ref.empty()) return theta_field(amp, cfg);
  if (g.ref == "auto") {
    Assignment ref = scan_reference(amp, cfg);
    std::cerr << "note: reference scanned to";
    for (std::size_t i = 0; i < ref.scope.size(); ++i)
      std::cerr << " " << net.space->var(ref.scope[i]).name << "="
                << net.space->var(ref.scope[i]).states[std::size_t(ref.values[i])];
    std::cerr << "\n";
    return theta_field(amp, ref, ThetaField::ReferencePolicy::AllowZero, cfg);
  }
  Assignment ref = parse_assignment(*net.space, g.ref);
  if (ref.scope != amp.scope()) fail(Errc::UsageError, "--ref must assign every variable");
  return theta_field(amp, ref, ThetaField::ReferencePolicy::AllowZero, cfg);
}

std::string set_names(const VariableSpace& space, const IndexSet& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + space.var(s[i]).name;
  return out;
}

ordered_json indep_json(const VariableSpace& space, const Independency& i) {
  return {{"j", set_names(space, i.j_set)},
          {"k", set_names(space, i.k_set)},
          {"e", set_names(space, i.e_set)}};
}

void emit(const GlobalOpts& g, const ordered_json& body, const std::string& table_text) {
  if (g.format == "json") {
    ordered_json doc = {{"schema", "qbn-report-1"}};
    for (const auto& [k, v] : body.items()) doc[k] = v;
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << table_text;
  }
}

int bool_exit(bool v) { return v ? kExitTrue : kExitFalse; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum Bayesian/Markov network toolkit"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--format", g.format, "output format: table or json")
      ->check(CLI::IsMember({"table", "json"}));
  app.add_option("--tol", g.tol, "truth-function tolerance (default 1e-8)");
  app.add_option("--eps", g.eps, "zero-mass regularizer (default 0 = strict)");
  app.add_option("--limit", g.limit, "global enumeration node limit (default 8)");
  app.add_option("--ref", g.ref,
                 "reference state: var=state list, or 'auto' to scan for the first "
                 "nonzero amplitude (default: all first states)");
  app.add_option("--seed", g.seed, "random seed for stochastic operations");

  std::string net_path, net_path2;
  QueryOpts q;
  auto add_net = [&](CLI::App* cmd) {
    cmd->add_option("net", net_path, "network file (.qbn)")->required();
  };
  auto add_jke = [&](CLI::App* cmd, bool need_e) {
    cmd->add_option("--j", q.j, "comma list of variable names")->required();
    cmd->add_option("--k", q.k, "comma list of variable names")->required();
    auto* e = cmd->add_option("--e", q.e, "comma list of conditioning variables");
    (void)need_e;
    (void)e;
  };

  auto* cmd_dsep = app.add_subcommand("dsep", "DAG d-separation query");
  add_net(cmd_dsep);
  add_jke(cmd_dsep, false);

  auto* cmd_sep = app.add_subcommand("sep", "undirected separation query");
  add_net(cmd_sep);
  add_jke(cmd_sep, false);

  std::string tau_name = "A";
  auto* cmd_indep = app.add_subcommand("indep", "probabilistic independence query");
  add_net(cmd_indep);
  add_jke(cmd_indep, false);
  cmd_indep->add_option("--tau", tau_name, "truth function: P, A, CMI, CMIP");

  std::string iset_kind = "loc";
  auto* cmd_iset = app.add_subcommand("iset", "graphic or probabilistic I-set");
  add_net(cmd_iset);
  cmd_iset->add_option("--kind", iset_kind, "loc | pair | glo | P | A");

  std::string graph_spec;
  auto* cmd_factor = app.add_subcommand("factorcheck", "does the joint amplitude factor per a graph");
  add_net(cmd_factor);
  cmd_factor->add_option("--graph", graph_spec,
                         "second .qbn file providing the graph (default: the net's own)");

  std::string order_csv;
  auto* cmd_chain = app.add_subcommand("chain", "chain-rule factorization");
  add_net(cmd_chain);
  cmd_chain->add_option("--order", order_csv, "comma list of variable names (default: index order)");

  auto* cmd_power = app.add_subcommand("powerset", "power-set rule lambda table");
  add_net(cmd_power);

  std::string vars_csv;
  auto* cmd_purify = app.add_subcommand("purify", "traced purification of a reduced state");
  add_net(cmd_purify);
  cmd_purify->add_option("--vars", vars_csv, "variables kept before purification")->required();

  std::string left_csv;
  auto* cmd_schmidt = app.add_subcommand("schmidt", "Schmidt decomposition of the joint amplitude");
  add_net(cmd_schmidt);
  cmd_schmidt->add_option("--left", left_csv, "left group of the bipartition")->required();

  auto* cmd_entropy = app.add_subcommand("entropy", "von Neumann entropy of a reduced state");
  add_net(cmd_entropy);
  cmd_entropy->add_option("--vars", vars_csv, "variables kept")->required();

  bool cmi_classical = false, cmi_diag_e = false;
  auto* cmd_cmi = app.add_subcommand("cmi", "conditional mutual information");
  add_net(cmd_cmi);
  add_jke(cmd_cmi, false);
  cmd_cmi->add_flag("--classical", cmi_classical, "classical CMI of |A|^2");
  cmd_cmi->add_flag("--diag-e", cmi_diag_e, "diagonalize the conditioning variables first");

  std::string outcome_csv, pre_csv, vis_csv, asum_csv, psum_csv, expect_csv;
  auto* cmd_measure = app.add_subcommand("measure", "measurement probabilities of the meta state");
  add_net(cmd_measure);
  cmd_measure->add_option("--vis", vis_csv, "visible variables (default: from markers)");
  cmd_measure->add_option("--asum", asum_csv, "amplitude-summed variables");
  cmd_measure->add_option("--psum", psum_csv, "probability-summed variables");
  cmd_measure->add_option("--outcome", outcome_csv, "var=state list over the visible variables");
  cmd_measure->add_option("--pre", pre_csv, "pre-viewed var=state list (conditioning)");
  cmd_measure->add_option("--expect", expect_csv,
                          "outcome eigenvalues 'var=state|..:value;...' for an expected value");

  auto* cmd_cert = app.add_subcommand("entangle-cert", "entanglement-zero certificate");
  add_net(cmd_cert);
  add_jke(cmd_cert, false);

  auto* cmd_rules = app.add_subcommand("rules", "reduction/combination rule report");
  add_net(cmd_rules);
  cmd_rules->add_option("--tau", tau_name, "truth function: P, A, CMI, CMIP");

  std::string check_name;
  HarnessParams hp;
  auto* cmd_harness = app.add_subcommand("harness", "randomized theorem verification");
  cmd_harness->add_option("check", check_name, "check name; 'list' prints the registry")->required();
  cmd_harness->add_option("--nets,--trials", hp.trials, "number of random trials");
  cmd_harness->add_option("--max-nodes", hp.max_nodes, "largest random net size");
  cmd_harness->add_option("--workers", hp.workers, "worker threads (0 = hardware)");
  cmd_harness->add_option("--xi", hp.xi, "counterexample fixture phase (default pi/2)");

  std::string out_path;
  auto* cmd_rewrite = app.add_subcommand("rewrite-diag", "trade diag markers for traced twin nodes");
  add_net(cmd_rewrite);
  cmd_rewrite->add_option("-o,--out", out_path, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    Config cfg = make_config(g);

    auto load = [&]() { return parse_network_file(net_path, cfg); };
    auto indep_from = [&](const NetworkFile& net) {
      return Independency::make(parse_name_list(*net.space, q.j), parse_name_list(*net.space, q.k),
                                parse_name_list(*net.space, q.e));
    };

    if (*cmd_dsep) {
      NetworkFile net = load();
      Independency i = indep_from(net);
      bool sep = d_separated_dag(net.dag(), i);
      emit(g, {{"command", "dsep"}, {"independency", indep_json(*net.space, i)}, {"result", sep}},
           std::string(sep ? "true" : "false") + "\n");
      return bool_exit(sep);
    }

    if (*cmd_sep) {
      NetworkFile net = load();
      Independency i = indep_from(net);
      bool sep = separated_ug(net.ug(), i);
      emit(g, {{"command", "sep"}, {"independency", indep_json(*net.space, i)}, {"result", sep}},
           std::string(sep ? "true" : "false") + "\n");
      return bool_exit(sep);
    }

    if (*cmd_indep) {
      NetworkFile net = load();
      Independency i = indep_from(net);
      auto kind = tau_kind_from(tau_name);
      if (!kind) fail(Errc::UsageError, "unknown tau kind '" + tau_name + "'");
      TauReport rep;
      if (*kind == TauKind::P) {
        rep = tau_detailed(TauKind::P, amp_to_prob(net.joint_amplitude(cfg), cfg), i, g.tol, cfg);
      } else {
        rep = tau_detailed(*kind, field_for(net, g, cfg), i, g.tol, cfg);
      }
      std::ostringstream table;
      table << (rep.value ? "true" : "false");
      if (rep.indeterminate) table << " (indeterminate band)";
      if (*kind == TauKind::CMI || *kind == TauKind::CMIP)
        table << "  cmi=" << std::setprecision(12) << rep.cmi;
      else
        table << "  max_residual=" << std::setprecision(12) << rep.max_residual;
      if (rep.skipped_zero_mass)
        table << "  skipped_zero_mass=" << rep.skipped_zero_mass;
      table << "\n";
      emit(g, {{"command", "indep"},
               {"tau", tau_kind_name(*kind)},
               {"independency", indep_json(*net.space, i)},
               {"result", rep.value},
               {"indeterminate", rep.indeterminate},
               {"max_residual", rep.max_residual},
               {"cmi", rep.cmi},
               {"skipped_zero_mass", rep.skipped_zero_mass}},
           table.str());
      return bool_exit(rep.value);
    }

    if (*cmd_iset) {
      NetworkFile net = load();
      ISet iset;
      if (iset_kind == "P" || iset_kind == "A") {
        auto kind = *tau_kind_from(iset_kind);
        if (kind == TauKind::P)
          iset = prob_iset(TauKind::P, amp_to_prob(net.joint_amplitude(cfg), cfg), g.tol, cfg);
        else
          iset = prob_iset(TauKind::A, field_for(net, g, cfg), g.tol, cfg);
      } else {
        GraphIsetKind kind = iset_kind == "loc"    ? GraphIsetKind::Loc
                             : iset_kind == "pair" ? GraphIsetKind::Pair
                             : iset_kind == "glo"  ? GraphIsetKind::Glo
                                                   : throw Error(Errc::UsageError, "unknown I-set kind");
        iset = net.kind == NetworkFile::Kind::Bayesian ? graphic_iset(net.dag(), kind, cfg)
                                                       : graphic_iset(net.ug(), kind, cfg);
      }
      std::ostringstream table;
      ordered_json list = ordered_json::array();
      for (const Independency& i : iset) {
        table << "(" << set_names(*net.space, i.j_set) << " _|_ " << set_names(*net.space, i.k_set)
              << " | " << set_names(*net.space, i.e_set) << ")\n";
        list.push_back(indep_json(*net.space, i));
      }
      table << iset.size() << " independencies\n";
      emit(g, {{"command", "iset"}, {"kind", iset_kind}, {"members", list}}, table.str());
      return kExitTrue;
    }

    if (*cmd_factor) {
      NetworkFile net = load();
      ThetaField tf = field_for(net, g, cfg);
      bool ok;
      if (!graph_spec.empty()) {
        NetworkFile other = parse_network_file(graph_spec, cfg);
        if (!(*other.space == *net.space))
          fail(Errc::UsageError, "--graph file must share the variable space");
        ok = other.kind == NetworkFile::Kind::Bayesian
                 ? factors_according_dag(tf, Dag(net.space, other.edges), cfg)
                 : factors_according_ug(tf, Ug(net.space, other.edges), cfg);
      } else {
        ok = net.kind == NetworkFile::Kind::Bayesian ? factors_according_dag(tf, net.dag(), cfg)
                                                     : factors_according_ug(tf, net.ug(), cfg);
      }
      emit(g, {{"command", "factorcheck"}, {"result", ok}}, std::string(ok ? "true" : "false") + "\n");
      return bool_exit(ok);
    }

    if (*cmd_chain) {
      NetworkFile net = load();
      ThetaField tf = field_for(net, g, cfg);
      std::vector<int> order;
      if (order_csv.empty()) {
        for (int v : tf.scope()) order.push_back(v);
      } else {
        std::stringstream ss(order_csv);
        std::string item;
        while (std::getline(ss, item, ',')) order.push_back(net.space->require_index(item));
      }
      auto tables = chain_factorize(tf, order, cfg);
      AmplitudeTensor back = product_of_tables(tf, tables);
      double worst = 0.0;
      for (std::size_t i = 0; i < back.entries().size(); ++i)
        worst = std::max(worst, std::abs(back.at(i) - tf.base().at(i)));
      std::ostringstream table;
      ordered_json factors = ordered_json::array();
      std::size_t dof = 0;
      for (const auto& t : tables) {
        table << "A(" << net.space->var(t.var).name;
        if (!t.given.empty()) table << " | " << set_names(*net.space, t.given);
        table << ")  free slots: " << t.free_parameters() << "\n";
        factors.push_back({{"var", net.space->var(t.var).name},
                           {"given", set_names(*net.space, t.given)},
                           {"free_parameters", t.free_parameters()}});
        dof += t.free_parameters();
      }
      table << "total free slots: " << dof << ", reconstruction residual: "
            << std::setprecision(3) << worst << "\n";
      emit(g, {{"command", "chain"}, {"factors", factors}, {"reconstruction_residual", worst}},
           table.str());
      return kExitTrue;
    }

    if (*cmd_power) {
      NetworkFile net = load();
      ThetaField tf = field_for(net, g, cfg);
      LambdaTable lt = powerset_lambda(tf, cfg);
      AmplitudeTensor back = lambda_product(tf, lt);
      double worst = 0.0;
      for (std::size_t i = 0; i < back.entries().size(); ++i)
        worst = std::max(worst, std::abs(back.at(i) - tf.base().at(i)));
      std::ostringstream table;
      ordered_json subsets = ordered_json::array();
      for (const auto& [mask, values] : lt.lambda) {
        double mag = 0.0;
        for (const cplx& z : values) mag = std::max(mag, std::abs(std::exp(z) - cplx(1.0)));
        IndexSet sub;
        for (int b = 0; b < int(tf.scope().size()); ++b)
          if (mask & (1u << b)) sub.push_back(tf.scope()[std::size_t(b)]);
        table << "{" << set_names(*net.space, sub) << "}: max |e^lambda - 1| = "
              << std::setprecision(4) << mag << "\n";
        subsets.push_back({{"subset", set_names(*net.space, sub)}, {"max_exp_deviation", mag}});
      }
      table << "reconstruction residual: " << std::setprecision(3) << worst << "\n";
      emit(g, {{"command", "powerset"}, {"subsets", subsets}, {"reconstruction_residual", worst}},
           table.str());
      return kExitTrue;
    }

    if (*cmd_purify) {
      NetworkFile net = load();
      IndexSet keep = parse_name_list(*net.space, vars_csv);
      AmplitudeTensor amp = net.joint_amplitude(cfg);
      DensityMatrix mu = meta_density(amp, cfg);
      DensityMatrix rho = partial_trace(mu, set_minus(amp.scope(), keep), cfg);
      Purification pur = purify(rho, cfg);
      DensityMatrix back = purification_rebuild(pur, rho, cfg);
      double residual = back.matrix().max_abs_diff(rho.matrix());
      std::ostringstream table;
      table << "node amplitudes A(j):";
      ordered_json amps = ordered_json::array();
      for (double v : pur.node_amps) {
        table << " " << std::setprecision(10) << v;
        amps.push_back(v);
      }
      table << "\nreconstruction residual: " << std::setprecision(3) << residual << "\n";
      emit(g, {{"command", "purify"}, {"node_amplitudes", amps}, {"reconstruction_residual", residual}},
           table.str());
      return kExitTrue;
    }

    if (*cmd_schmidt) {
      NetworkFile net = load();
      AmplitudeTensor amp = net.joint_amplitude(cfg);
      SchmidtResult sc = schmidt(amp, parse_name_list(*net.space, left_csv), cfg);
      std::ostringstream table;
      table << "Schmidt coefficients:";
      ordered_json coeffs = ordered_json::array();
      for (double v : sc.coeffs) {
        table << " " << std::setprecision(10) << v;
        coeffs.push_back(v);
      }
      table << "\n";
      emit(g, {{"command", "schmidt"}, {"coefficients", coeffs}}, table.str());
      return kExitTrue;
    }

    if (*cmd_entropy) {
      NetworkFile net = load();
      IndexSet keep = parse_name_list(*net.space, vars_csv);
      AmplitudeTensor amp = net.joint_amplitude(cfg);
      DensityMatrix rho = partial_trace(meta_density(amp, cfg), set_minus(amp.scope(), keep), cfg);
      double s = von_neumann_entropy(rho, cfg);
      std::ostringstream table;
      table << std::setprecision(12) << s << " nats\n";
      emit(g, {{"command", "entropy"}, {"entropy_nats", s}}, table.str());
      return kExitTrue;
    }

    if (*cmd_cmi) {
      NetworkFile net = load();
      Independency i = indep_from(net);
      AmplitudeTensor amp = net.joint_amplitude(cfg);
      CmiValue v;
      if (cmi_classical) {
        v = classical_cmi(amp_to_prob(amp, cfg), i.j_set, i.k_set, i.e_set, cfg);
      } else {
        DensityMatrix mu = meta_density(amp, cfg);
        IndexSet jke = set_union(set_union(i.j_set, i.k_set), i.e_set);
        DensityMatrix red = partial_trace(mu, set_minus(amp.scope(), jke), cfg);
        if (cmi_diag_e && !i.e_set.empty()) {
          ScopedMatrix d = superop(red.scoped(), SuperOpKind::Diag, i.e_set);
          red = DensityMatrix::make(d.space, d.scope, std::move(d.m), cfg);
        }
        v = quantum_cmi(red, i.j_set, i.k_set, i.e_set, cfg);
      }
      std::ostringstream table;
      table << std::setprecision(12) << v.value << (v.clamped ? " (clamped from negative)" : "")
            << "\n";
      emit(g, {{"command", "cmi"}, {"value", v.value}, {"clamped", v.clamped}}, table.str());
      return kExitTrue;
    }

    if (*cmd_measure) {
      NetworkFile net = load();
      MeasurementPlan plan;
      if (vis_csv.empty() && asum_csv.empty() && psum_csv.empty()) {
        plan = net.plan();
      } else {
        plan.z_vis = parse_name_list(*net.space, vis_csv);
        plan.z_asum = parse_name_list(*net.space, asum_csv);
        IndexSet rest = set_minus(set_minus(net.space->all_indices(), plan.z_vis), plan.z_asum);
        plan.z_psum = psum_csv.empty() ? rest : parse_name_list(*net.space, psum_csv);
      }
      AmplitudeTensor amp = net.joint_amplitude(cfg);
      if (!pre_csv.empty()) {
        Assignment pre = parse_assignment(*net.space, pre_csv);
        plan.z_pre = pre.scope;
        plan.validate(*net.space, amp.scope());
        if (!expect_csv.empty()) fail(Errc::UsageError, "--expect is not combined with --pre output here");
        if (outcome_csv.empty()) fail(Errc::UsageError, "--pre needs --outcome for z_post");
        Assignment post = parse_assignment(*net.space, outcome_csv);
        double p = conditional_measurement_prob(amp, plan, post, pre, cfg);
        std::ostringstream table;
        table << std::setprecision(12) << p << "\n";
        emit(g, {{"command", "measure"}, {"conditional_probability", p}}, table.str());
        return kExitTrue;
      }
      plan.validate(*net.space, amp.scope());
      ProbTensor dist = measurement_distribution(amp, plan, cfg);
      if (!outcome_csv.empty()) {
        Assignment out = parse_assignment(*net.space, outcome_csv);
        double p = dist.at(out);
        std::ostringstream table;
        table << std::setprecision(12) << p << "\n";
        emit(g, {{"command", "measure"}, {"probability", p}}, table.str());
        return kExitTrue;
      }
      ScopeIndexer vis_idx(*net.space, plan.z_vis);
      std::ostringstream table;
      ordered_json rows = ordered_json::array();
      for (std::size_t o = 0; o < vis_idx.total(); ++o) {
        std::vector<int> digits = vis_idx.unflatten(o);
        std::string label;
        for (std::size_t i = 0; i < plan.z_vis.size(); ++i) {
          if (i) label += ",";
          label += net.space->var(plan.z_vis[i]).name + "=" +
                   net.space->var(plan.z_vis[i]).states[std::size_t(digits[i])];
        }
        table << label << "  " << std::setprecision(12) << dist.at(o) << "\n";
        rows.push_back({{"outcome", label}, {"probability", dist.at(o)}});
      }
      emit(g, {{"command", "measure"}, {"distribution", rows}}, table.str());
      return kExitTrue;
    }

    if (*cmd_cert) {
      NetworkFile net = load();
      IndexSet j = parse_name_list(*net.space, q.j), k = parse_name_list(*net.space, q.k);
      NetworkFile working = net;
      bool has_diag = false;
      for (const auto& [node, m] : net.markers)
        if (m.kind == MarkerKind::Diag) has_diag = true;
      if (has_diag) working = replace_diag_with_traced_node(net, cfg);
      AmplitudeTensor amp = working.joint_amplitude(cfg);
      CertificateResult cert;
      if (working.kind == NetworkFile::Kind::Bayesian)
        cert = entanglement_zero_certificate(working.dag(), amp, j, k,
                                             working.ungroundable_nodes(), cfg);
      else
        cert = entanglement_zero_certificate(working.ug(), amp, j, k,
                                             working.ungroundable_nodes(), cfg);
      std::ostringstream table;
      table << (cert.certified_zero ? "certified zero" : "not certified")
            << "  upper_bound=" << std::setprecision(12) << cert.upper_bound;
      if (cert.witness) table << "  witness={" << set_names(*working.space, *cert.witness) << "}";
      table << "\n";
      emit(g, {{"command", "entangle-cert"},
               {"certified_zero", cert.certified_zero},
               {"upper_bound", cert.upper_bound},
               {"witness", cert.witness ? set_names(*working.space, *cert.witness) : ""}},
           table.str());
      return bool_exit(cert.certified_zero);
    }

    if (*cmd_rules) {
      NetworkFile net = load();
      auto kind = tau_kind_from(tau_name);
      if (!kind) fail(Errc::UsageError, "unknown tau kind '" + tau_name + "'");
      RulesReport rep;
      if (*kind == TauKind::P)
        rep = check_rules(TauKind::P, amp_to_prob(net.joint_amplitude(cfg), cfg), g.tol, cfg);
      else
        rep = check_rules(*kind, field_for(net, g, cfg), g.tol, cfg);
      std::ostringstream table;
      table << rep.instantiations << " instantiations, " << rep.violations.size() << " violations";
      if (!rep.intersection_checked) table << " (intersection skipped: model has zeros)";
      if (rep.informational) table << " (informational for CMI kinds)";
      table << "\n";
      ordered_json viols = ordered_json::array();
      for (const auto& v : rep.violations) {
        table << "  " << rule_name(v.rule) << ": " << v.instantiation << "\n";
        viols.push_back({{"rule", rule_name(v.rule)}, {"at", v.instantiation}});
      }
      emit(g, {{"command", "rules"},
               {"tau", tau_kind_name(*kind)},
               {"instantiations", rep.instantiations},
               {"violations", viols},
               {"intersection_checked", rep.intersection_checked},
               {"informational", rep.informational}},
           table.str());
      if (rep.informational) return kExitTrue;
      return rep.violations.empty() ? kExitTrue : kExitFalse;
    }

    if (*cmd_harness) {
      if (check_name == "list") {
        for (const std::string& name : harness_checks()) std::cout << name << "\n";
        return kExitTrue;
      }
      hp.seed = g.seed;
      hp.cfg = cfg;
      HarnessReport rep = run_harness(check_name, hp);
      std::ostringstream table;
      table << rep.check << ": " << rep.trials << " trials, " << rep.failures.size()
            << " failures" << (rep.informational ? " (informational)" : "") << "\n";
      if (!rep.summary.empty()) table << rep.summary << "\n";
      ordered_json fails = ordered_json::array();
      for (const auto& f : rep.failures) {
        table << "  trial " << f.trial << " (seed " << f.trial_seed << "): " << f.detail << "\n";
        fails.push_back({{"trial", f.trial}, {"seed", f.trial_seed}, {"detail", f.detail}});
      }
      table << (rep.passed() ? "PASS" : "FAIL") << "\n";
      emit(g, {{"command", "harness"},
               {"check", rep.check},
               {"trials", rep.trials},
               {"failures", fails},
               {"informational", rep.informational},
               {"summary", rep.summary},
               {"passed", rep.passed()}},
           table.str());
      return rep.passed() ? kExitTrue : kExitFalse;
    }

    if (*cmd_rewrite) {
      NetworkFile net = load();
      NetworkFile out = replace_diag_with_traced_node(net, cfg);
      std::string text = serialize_network(out);
      if (out_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(out_path);
        if (!f) fail(Errc::ValidationError, "cannot write '" + out_path + "'");
        f << text;
      }
      return kExitTrue;
    }

    fail(Errc::UsageError, "no subcommand handled");
  } catch (const Error& e) {
    if (e.code() == Errc::UsageError) {
      std::cerr << "usage error: " << e.what() << "\n";
      return kExitUsage;
    }
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
