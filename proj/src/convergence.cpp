#include "pct/convergence.hpp"

#include <algorithm>

namespace pct {

namespace {

Rational abs_gap(const Rational& a, const Rational& b) {
  Rational d = a - b;
  return d < 0 ? Rational(-d) : d;
}

}  // namespace

Rational ConvergenceReport::max_pairwise_gap() const {
  return std::max({abs_gap(est_itt, est_at), abs_gap(est_itt, est_pp),
                   abs_gap(est_at, est_pp)});
}

Rational ConvergenceReport::max_oracle_gap() const {
  return std::max({abs_gap(est_itt, oracle_itt), abs_gap(est_at, oracle_at),
                   abs_gap(est_pp, oracle_pp)});
}

std::string ConvergenceReport::render(int places) const {
  std::string adjust_text;
  for (const auto& z : adjustment_set) {
    if (!adjust_text.empty()) adjust_text += ", ";
    adjust_text += z;
  }
  std::string out;
  out += "convergence report: arm=" + arm + " n=" + std::to_string(n) +
         " seed=" + std::to_string(seed) + " adjust={" + adjust_text + "}\n";
  auto line = [&](const std::string& label, const Rational& est,
                  const Rational& oracle) {
    out += "  " + label + ": estimate " + decimal_string(est, places) +
           " oracle " + decimal_string(oracle, places) + " gap " +
           decimal_string(abs_gap(est, oracle), places) + "\n";
  };
  line("do(X)    ", est_itt, oracle_itt);
  line("do(X')   ", est_at, oracle_at);
  line("do(X, X')", est_pp, oracle_pp);
  out += "  max pairwise gap " + decimal_string(max_pairwise_gap(), places) +
         "\n";
  return out;
}

ConvergenceReport convergence_report(
    const ScmParams& params, std::uint64_t n, std::uint64_t seed,
    const std::optional<std::string>& arm,
    const std::optional<std::set<std::string>>& adjust_override) {
  const auto& graph = params.graph();
  auto x = graph.unique_role_node(NodeRole::TreatmentPrescribed);
  auto xp = graph.unique_role_node(NodeRole::TreatmentReceived);
  auto y = graph.unique_role_node(NodeRole::Outcome);
  if (graph.has_edge(x, y)) {
    throw ValidationError(
        "convergence requires the treatment to act only through '" + xp +
        "' (direct " + x + " -> " + y + " edge present)");
  }

  ConvergenceReport report;
  report.arm = arm.value_or(params.arm_labels().front());
  report.n = n;
  report.seed = seed;
  if (adjust_override) {
    report.adjustment_set = *adjust_override;
  } else {
    for (const auto& z : graph.nodes_with_role(NodeRole::AdherenceCovariate)) {
      report.adjustment_set.insert(z);
    }
  }
  const std::string event = params.outcome_event();

  auto output = simulate(params, n, seed);
  auto analysable = complete_cases(output.dataset);

  std::vector<std::string> vars{x, xp};
  for (const auto& z : report.adjustment_set) vars.push_back(z);
  vars.push_back(y);
  auto table = dataset_table_for_graph(analysable, graph, vars);

  auto run = [&](std::vector<std::pair<std::string, std::string>> dos) {
    AdjustmentQuery q{graph, std::move(dos), y, event, report.adjustment_set};
    return backdoor_adjust(q, table).value;
  };
  report.est_itt = run({{x, report.arm}});
  report.est_at = run({{xp, report.arm}});
  report.est_pp = run({{x, report.arm}, {xp, report.arm}});

  report.oracle_itt = output.ground_truth.at("do_itt/" + report.arm);
  report.oracle_at = output.ground_truth.at("do_at/" + report.arm);
  report.oracle_pp = output.ground_truth.at("do_pp/" + report.arm);
  return report;
}

}  // namespace pct
