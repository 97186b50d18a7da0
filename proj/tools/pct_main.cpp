// pctcausal: validate trial causal graphs, estimate protocol effects from
// trial CSV data, run backdoor-adjusted interventional queries, and
// simulate trials from fully parameterized discrete models.
//
// Exit codes: 0 success, 1 analysis refusal or failed check, 2 input error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pct/adjustment.hpp"
#include "pct/convergence.hpp"
#include "pct/estimators.hpp"
#include "pct/graph.hpp"
#include "pct/report.hpp"
#include "pct/scm.hpp"
#include "pct/simulator.hpp"
#include "pct/trial_data.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRefused = 1;
constexpr int kInputError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pct::ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_graph_check(const std::string& path) {
  std::string text;
  std::vector<pct::NodeSpec> nodes;
  std::vector<pct::Edge> edges;
  try {
    text = read_file(path);
    std::tie(nodes, edges) = pct::parse_graph_json(text);
  } catch (const pct::ParseError& e) {
    std::cerr << "error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ", column " << e.column() << ")";
    std::cerr << "\n";
    return kInputError;
  }

  std::cout << "graph: " << path << "\n";
  std::cout << "nodes: " << nodes.size() << ", edges: " << edges.size() << "\n";

  bool ok = true;
  std::optional<pct::CausalDag> graph;
  try {
    graph = pct::CausalDag::create(nodes, edges);
    std::cout << "acyclic: yes\n";
  } catch (const pct::ValidationError& e) {
    std::cout << "acyclic: no (" << e.what() << ")\n";
    ok = false;
  }

  if (graph) {
    auto issues = pct::pct_role_issues(*graph);
    if (issues.empty()) {
      std::cout << "roles: ok\n";
    } else {
      ok = false;
      for (const auto& issue : issues) std::cout << "roles: " << issue << "\n";
    }

    if (issues.empty()) {
      auto xp = graph->unique_role_node(pct::NodeRole::TreatmentReceived);
      auto y = graph->unique_role_node(pct::NodeRole::Outcome);
      std::set<std::string> adherence;
      for (const auto& z :
           graph->nodes_with_role(pct::NodeRole::AdherenceCovariate)) {
        adherence.insert(z);
      }
      std::string set_text;
      for (const auto& z : adherence) {
        if (!set_text.empty()) set_text += ", ";
        set_text += z;
      }
      bool admissible = pct::is_backdoor_admissible(*graph, xp, y, adherence);
      std::cout << "backdoor (" << xp << " -> " << y << ") adjusting {"
                << set_text << "}: " << (admissible ? "admissible" : "NOT admissible");
      if (!admissible) {
        auto path_nodes = pct::find_open_backdoor_path(*graph, xp, y, adherence);
        if (!path_nodes.empty()) {
          std::cout << " (open path:";
          for (const auto& v : path_nodes) std::cout << " " << v;
          std::cout << ")";
        }
        ok = false;
      }
      std::cout << "\n";
    }
  }

  std::cout << "result: " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kOk : kRefused;
}

struct EstimateArgs {
  std::string data_path;
  std::string protocols = "itt,at,pp";
  std::string metrics = "prob,rr,or";
  bool all = false;
  std::string treatment, reference, event;
  bool paper_rounding = false;
  bool haldane = false;
  int precision = 2;
  std::int64_t horizon = -1;
  std::string format = "table";
};

int cmd_estimate(const EstimateArgs& args) {
  pct::TrialDataset dataset = [&] {
    return pct::load_dataset_csv(read_file(args.data_path));
  }();

  const auto& schema = dataset.schema();
  pct::ReportRequest request;

  request.protocols.clear();
  for (const auto& p : split_list(args.all ? "itt,at,pp" : args.protocols)) {
    if (p == "itt") request.protocols.push_back(pct::Protocol::ITT);
    else if (p == "at") request.protocols.push_back(pct::Protocol::AT);
    else if (p == "pp") request.protocols.push_back(pct::Protocol::PP);
    else throw pct::ValidationError("unknown protocol '" + p + "'");
  }
  request.metrics.clear();
  for (const auto& m : split_list(args.all ? "prob,rr,or" : args.metrics)) {
    if (m == "prob") request.metrics.push_back(pct::EstimateKind::Probability);
    else if (m == "rr") request.metrics.push_back(pct::EstimateKind::RiskRatio);
    else if (m == "or") request.metrics.push_back(pct::EstimateKind::OddsRatio);
    else if (m == "hr") request.metrics.push_back(pct::EstimateKind::HazardRatio);
    else throw pct::ValidationError("unknown metric '" + m + "'");
  }

  request.treatment_level = args.treatment;
  request.reference_level = args.reference;
  if (request.treatment_level.empty() || request.reference_level.empty()) {
    if (schema.arm_labels.size() != 2) {
      throw pct::ValidationError(
          "dataset has " + std::to_string(schema.arm_labels.size()) +
          " arms; pass --treatment and --reference");
    }
    if (request.treatment_level.empty()) request.treatment_level = schema.arm_labels[0];
    if (request.reference_level.empty()) request.reference_level = schema.arm_labels[1];
  }
  request.outcome_event = args.event;
  if (request.outcome_event.empty()) {
    if (schema.outcome_labels.size() != 2) {
      throw pct::ValidationError(
          "dataset has " + std::to_string(schema.outcome_labels.size()) +
          " outcome labels; pass --event");
    }
    request.outcome_event = schema.outcome_labels[1];
  }

  request.options.paper_rounding = args.paper_rounding;
  request.options.haldane_correction = args.haldane;
  request.precision = args.precision;
  if (args.horizon >= 0) {
    request.horizon = args.horizon;
  } else {
    // Default horizon: the largest observed event time.
    std::int64_t max_time = -1;
    for (const auto& r : dataset.records()) {
      if (r.event_time) max_time = std::max(max_time, *r.event_time);
    }
    if (max_time >= 0) request.horizon = max_time;
  }

  auto table = pct::build_report(dataset, request);
  if (args.format == "json") {
    std::cout << table.render_json();
  } else if (args.format == "table") {
    std::cout << "dataset: " << args.data_path << " ("
              << dataset.record_count() << " records)\n";
    std::cout << "arms: " << request.treatment_level << " (treatment) vs "
              << request.reference_level << " (reference); event: "
              << request.outcome_event << "\n";
    if (args.paper_rounding) {
      std::cout << "rounding: intermediates rounded to "
                << request.options.intermediate_places << " places\n";
    }
    std::cout << "\n" << table.render_text();
  } else {
    throw pct::ValidationError("unknown format '" + args.format + "'");
  }
  return table.all_failed() ? kRefused : kOk;
}

struct AdjustArgs {
  std::string data_path, graph_path;
  std::string do_text, adjust_text, event;
  int precision = 2;
};

int cmd_adjust(const AdjustArgs& args) {
  auto dataset = pct::load_dataset_csv(read_file(args.data_path));
  auto graph = pct::load_graph_json(read_file(args.graph_path));

  pct::AdjustmentQuery query;
  query.graph = graph;
  for (const auto& assignment : split_list(args.do_text)) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) {
      throw pct::ValidationError("bad --do assignment '" + assignment +
                                 "' (want node=level)");
    }
    query.interventions.emplace_back(assignment.substr(0, eq),
                                     assignment.substr(eq + 1));
  }
  if (query.interventions.empty()) {
    throw pct::ValidationError("--do needs at least one node=level");
  }
  for (const auto& z : split_list(args.adjust_text)) {
    query.adjustment_set.insert(z);
  }
  query.outcome = graph.unique_role_node(pct::NodeRole::Outcome);
  query.outcome_event = args.event;
  if (query.outcome_event.empty()) {
    throw pct::ValidationError("--event is required");
  }

  std::vector<std::string> vars;
  for (const auto& [node, level] : query.interventions) {
    (void)level;
    vars.push_back(node);
  }
  for (const auto& z : query.adjustment_set) vars.push_back(z);
  vars.push_back(query.outcome);

  auto analysable = pct::complete_cases(dataset);
  auto table = pct::dataset_table_for_graph(analysable, graph, vars);
  auto estimate = pct::backdoor_adjust(query, table);

  std::string do_text;
  for (const auto& [node, level] : query.interventions) {
    if (!do_text.empty()) do_text += ", ";
    do_text += node + "=" + level;
  }
  std::string adjust_text;
  for (const auto& z : query.adjustment_set) {
    if (!adjust_text.empty()) adjust_text += ", ";
    adjust_text += z;
  }
  std::cout << "P(" << query.outcome << "=" << query.outcome_event << " | do("
            << do_text << ")) = " << estimate.decimal(args.precision)
            << "  [exact " << pct::rational_string(estimate.value)
            << ", adjust={" << adjust_text << "}]\n";
  return kOk;
}

struct SimulateArgs {
  std::string params_path;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::string out_path, truth_path;
};

int cmd_simulate(const SimulateArgs& args) {
  auto params = pct::load_params_json(read_file(args.params_path));
  auto output = pct::simulate(params, args.n, args.seed);

  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) throw pct::ParseError("cannot write '" + args.out_path + "'");
    out << pct::dataset_to_csv(output.dataset);
  }
  if (!args.truth_path.empty()) {
    std::ofstream out(args.truth_path, std::ios::binary);
    if (!out) throw pct::ParseError("cannot write '" + args.truth_path + "'");
    out << pct::truth_to_json(output);
  }
  std::cout << "simulated " << output.n_after_selection << " of "
            << output.n_requested << " requested records (seed "
            << output.seed << ")\n";
  if (!args.out_path.empty()) std::cout << "dataset: " << args.out_path << "\n";
  if (!args.truth_path.empty()) std::cout << "truth: " << args.truth_path << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal analysis of pragmatic clinical trials"};
  app.require_subcommand(1);

  std::string graph_path;
  auto* check = app.add_subcommand("graph-check",
                                   "validate a causal graph file");
  check->add_option("graph", graph_path, "graph JSON file")->required();

  EstimateArgs est;
  auto* estimate = app.add_subcommand(
      "estimate", "protocol effect estimates from a trial CSV");
  estimate->add_option("data", est.data_path, "trial CSV file")->required();
  estimate->add_flag("--all", est.all, "all protocols and standard metrics");
  estimate->add_option("--protocols", est.protocols, "subset of itt,at,pp");
  estimate->add_option("--metrics", est.metrics, "subset of prob,rr,or,hr");
  estimate->add_option("--treatment", est.treatment, "treatment arm label");
  estimate->add_option("--reference", est.reference, "reference arm label");
  estimate->add_option("--event", est.event, "outcome label counted as the event");
  estimate->add_flag("--paper-rounding", est.paper_rounding,
                     "round intermediate probabilities to 2 places before ratios");
  estimate->add_flag("--haldane", est.haldane,
                     "Haldane-Anscombe +1/2 correction for odds ratios");
  estimate->add_option("--precision", est.precision, "decimal places (default 2)");
  estimate->add_option("--horizon", est.horizon,
                       "hazard time horizon (default: max observed time)");
  estimate->add_option("--format", est.format, "table or json");

  AdjustArgs adj;
  auto* adjust = app.add_subcommand(
      "adjust", "backdoor-adjusted interventional estimate");
  adjust->add_option("data", adj.data_path, "trial CSV file")->required();
  adjust->add_option("graph", adj.graph_path, "graph JSON file")->required();
  adjust->add_option("--do", adj.do_text, "node=level[,node=level]")->required();
  adjust->add_option("--adjust", adj.adjust_text,
                     "comma-separated adjustment set (may be empty)");
  adjust->add_option("--event", adj.event, "outcome label counted as the event")
      ->required();
  adjust->add_option("--precision", adj.precision, "decimal places (default 2)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate",
                                      "draw a trial from model parameters");
  simulate->add_option("params", sim.params_path, "parameter JSON file")
      ->required();
  simulate->add_option("--n", sim.n, "records to draw")->required();
  simulate->add_option("--seed", sim.seed, "generator seed")->required();
  simulate->add_option("--out", sim.out_path, "dataset CSV to write");
  simulate->add_option("--truth", sim.truth_path, "ground-truth JSON to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints usage or help
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (check->parsed()) return cmd_graph_check(graph_path);
    if (estimate->parsed()) return cmd_estimate(est);
    if (adjust->parsed()) return cmd_adjust(adj);
    if (simulate->parsed()) return cmd_simulate(sim);
  } catch (const pct::NotAdmissibleError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kRefused;
  } catch (const pct::PositivityViolationError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kRefused;
  } catch (const pct::ParseError& e) {
    std::cerr << "error: " << e.what();
    if (e.line() > 0) {
      std::cerr << " (line " << e.line() << ", column " << e.column() << ")";
    }
    std::cerr << "\n";
    return kInputError;
  } catch (const pct::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
