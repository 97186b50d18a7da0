#include "pct/adjustment.hpp"

#include <algorithm>
#include <map>

namespace pct {

JointDistribution::JointDistribution(Vars variables,
                                     std::vector<Rational> probabilities)
    : variables_(std::move(variables)), probabilities_(std::move(probabilities)) {
  std::size_t cells = 1;
  for (const auto& [name, levels] : variables_) {
    (void)name;
    cells *= levels.size();
  }
  if (cells != probabilities_.size()) {
    throw ValidationError("joint distribution size mismatch");
  }
  Rational total = 0;
  for (const auto& p : probabilities_) {
    if (p < 0) throw ValidationError("negative probability in joint");
    total += p;
  }
  if (total != 1) {
    throw ValidationError("joint distribution sums to " +
                          rational_string(total) + ", expected 1");
  }
}

std::vector<std::size_t> JointDistribution::decode(std::size_t flat) const {
  std::vector<std::size_t> levels(variables_.size());
  for (std::size_t i = variables_.size(); i-- > 0;) {
    levels[i] = flat % variables_[i].second.size();
    flat /= variables_[i].second.size();
  }
  return levels;
}

Rational JointDistribution::prob_matching(
    const std::vector<std::pair<std::string, std::string>>& where) const {
  std::vector<std::optional<std::size_t>> fixed(variables_.size());
  for (const auto& [variable, level] : where) {
    std::size_t d = variables_.size();
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i].first == variable) d = i;
    }
    if (d == variables_.size()) {
      throw ValidationError("joint has no variable '" + variable + "'");
    }
    const auto& levels = variables_[d].second;
    auto it = std::find(levels.begin(), levels.end(), level);
    if (it == levels.end()) {
      throw ValidationError("variable '" + variable + "' has no level '" +
                            level + "'");
    }
    std::size_t l = static_cast<std::size_t>(it - levels.begin());
    if (fixed[d] && *fixed[d] != l) return 0;
    fixed[d] = l;
  }
  Rational sum = 0;
  for (std::size_t flat = 0; flat < probabilities_.size(); ++flat) {
    if (probabilities_[flat] == 0) continue;
    auto levels = decode(flat);
    bool match = true;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (fixed[i] && levels[i] != *fixed[i]) {
        match = false;
        break;
      }
    }
    if (match) sum += probabilities_[flat];
  }
  return sum;
}

Rational JointDistribution::conditional(
    const std::string& target, const std::string& level,
    const std::vector<std::pair<std::string, std::string>>& where) const {
  Rational denom = prob_matching(where);
  if (denom == 0) {
    throw ValidationError("conditioning event has probability zero");
  }
  auto with_target = where;
  with_target.emplace_back(target, level);
  return prob_matching(with_target) / denom;
}

JointDistribution oracle_joint(
    const ScmParams& params,
    const std::vector<std::pair<std::string, std::string>>& interventions) {
  const auto& graph = params.graph();

  std::map<std::string, std::string> do_levels;
  for (const auto& [node, level] : interventions) {
    if (!graph.has_node(node)) {
      throw ValidationError("intervention on unknown node '" + node + "'");
    }
    const auto& levels = params.levels(node);
    if (std::find(levels.begin(), levels.end(), level) == levels.end()) {
      throw ValidationError("node '" + node + "' has no level '" + level + "'");
    }
    if (!do_levels.emplace(node, level).second) {
      throw ValidationError("node '" + node + "' intervened on twice");
    }
  }

  JointDistribution::Vars vars;
  for (const auto& node : graph.nodes()) {
    vars.emplace_back(node.name, params.levels(node.name));
  }

  std::size_t cells = 1;
  for (const auto& [name, levels] : vars) {
    (void)name;
    cells *= levels.size();
  }

  // Index helpers per node for parent lookups.
  std::map<std::string, std::size_t> var_index;
  for (std::size_t i = 0; i < vars.size(); ++i) var_index[vars[i].first] = i;

  std::vector<Rational> probs(cells, Rational(0));
  std::vector<std::size_t> idx(vars.size(), 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    // Decode.
    std::size_t rest = flat;
    for (std::size_t i = vars.size(); i-- > 0;) {
      idx[i] = rest % vars[i].second.size();
      rest /= vars[i].second.size();
    }
    Rational p = 1;
    for (std::size_t i = 0; i < vars.size() && p != 0; ++i) {
      const auto& node = vars[i].first;
      const auto& value = vars[i].second[idx[i]];
      auto doit = do_levels.find(node);
      if (doit != do_levels.end()) {
        if (value != doit->second) p = 0;
        continue;
      }
      const auto& mech = params.mechanism(node);
      std::vector<std::string> parent_values;
      parent_values.reserve(mech.parents.size());
      for (const auto& parent : mech.parents) {
        std::size_t pi = var_index.at(parent);
        parent_values.push_back(vars[pi].second[idx[pi]]);
      }
      const auto& row = params.mechanism_row(node, parent_values);
      p *= row[idx[i]];
    }
    probs[flat] = p;
  }
  return JointDistribution(std::move(vars), std::move(probs));
}

Rational oracle_interventional(
    const ScmParams& params,
    const std::vector<std::pair<std::string, std::string>>& interventions,
    const std::string& outcome_event) {
  auto outcome = params.graph().unique_role_node(NodeRole::Outcome);
  auto joint = oracle_joint(params, interventions);
  std::vector<std::pair<std::string, std::string>> where;
  where.emplace_back(outcome, outcome_event);
  return joint.prob_matching(where);
}

ContingencyTable population_table(const ScmParams& params) {
  auto joint = oracle_joint(params);

  BigInt common = 1;
  for (const auto& p : joint.probabilities()) {
    if (p == 0) continue;
    common = lcm(common, denominator(p));
  }

  ContingencyTable table(joint.variables());
  for (std::size_t flat = 0; flat < joint.probabilities().size(); ++flat) {
    const auto& p = joint.probabilities()[flat];
    if (p == 0) continue;
    table.at(joint.decode(flat)) = numerator(p) * (common / denominator(p));
  }
  return table;
}

namespace {

std::string describe_assignments(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::string out;
  for (const auto& [node, level] : pairs) {
    if (!out.empty()) out += ", ";
    out += node + "=" + level;
  }
  return out;
}

}  // namespace

EffectEstimate backdoor_adjust(const AdjustmentQuery& query,
                               const ContingencyTable& table) {
  if (query.interventions.empty()) {
    throw ValidationError("query needs at least one intervention");
  }
  std::vector<std::string> treatment_nodes;
  for (const auto& [node, level] : query.interventions) {
    (void)level;
    treatment_nodes.push_back(node);
  }
  for (const auto& [node, level] : query.interventions) {
    (void)level;
    if (node == query.outcome) {
      throw ValidationError("cannot intervene on the outcome");
    }
    if (query.adjustment_set.count(node)) {
      throw ValidationError("adjustment set contains intervened node '" +
                            node + "'");
    }
  }
  if (query.adjustment_set.count(query.outcome)) {
    throw ValidationError("adjustment set contains the outcome");
  }

  if (!is_backdoor_admissible(query.graph, treatment_nodes, query.outcome,
                              query.adjustment_set)) {
    std::string set_text;
    for (const auto& z : query.adjustment_set) {
      if (!set_text.empty()) set_text += ", ";
      set_text += z;
    }
    std::string message = "adjustment set {" + set_text +
                          "} is not backdoor-admissible for do(" +
                          describe_assignments(query.interventions) + ") -> " +
                          query.outcome;
    // Attach a witness path when one exists.
    for (const auto& t : treatment_nodes) {
      auto path = find_open_backdoor_path(query.graph, t, query.outcome,
                                          query.adjustment_set);
      if (!path.empty()) {
        std::string rendered;
        for (const auto& v : path) {
          if (!rendered.empty()) rendered += " - ";
          rendered += v;
        }
        message += "; open backdoor path: " + rendered;
        break;
      }
    }
    throw NotAdmissibleError(message);
  }

  // All involved variables must be table dimensions (checked up front for
  // clear errors).
  std::vector<std::pair<std::string, std::string>> do_pairs =
      query.interventions;
  for (const auto& [node, level] : do_pairs) {
    std::size_t d = table.dim_index(node);
    table.level_index(d, level);
  }
  table.dim_index(query.outcome);

  EffectEstimate e;
  e.kind = EstimateKind::Probability;
  e.estimand = Estimand::Interventional;

  BigInt total = table.total();
  if (total == 0) {
    throw PositivityViolationError("table has no observations");
  }

  if (query.adjustment_set.empty()) {
    BigInt den = table.count_matching(do_pairs);
    if (den == 0) {
      throw PositivityViolationError(
          "no observations at intervention levels " +
          describe_assignments(do_pairs));
    }
    auto with_event = do_pairs;
    with_event.emplace_back(query.outcome, query.outcome_event);
    BigInt num = table.count_matching(with_event);
    e.value = Rational(num, den);
    e.numerator_cells.push_back({with_event, num});
    e.denominator_cells.push_back({do_pairs, den});
    return e;
  }

  // Enumerate adjustment strata.
  std::vector<std::pair<std::string, std::vector<std::string>>> strata_axes;
  for (const auto& z : query.adjustment_set) {
    std::size_t d = table.dim_index(z);
    strata_axes.emplace_back(z, table.dims()[d].second);
  }
  std::vector<std::size_t> counter(strata_axes.size(), 0);
  Rational sum = 0;
  bool done = false;
  while (!done) {
    std::vector<std::pair<std::string, std::string>> stratum;
    for (std::size_t i = 0; i < strata_axes.size(); ++i) {
      stratum.emplace_back(strata_axes[i].first,
                           strata_axes[i].second[counter[i]]);
    }
    BigInt marginal = table.count_matching(stratum);
    if (marginal > 0) {
      auto with_do = stratum;
      with_do.insert(with_do.end(), do_pairs.begin(), do_pairs.end());
      BigInt in_stratum = table.count_matching(with_do);
      if (in_stratum == 0) {
        throw PositivityViolationError(
            "stratum " + describe_assignments(stratum) +
            " has no observations at intervention levels " +
            describe_assignments(do_pairs));
      }
      auto with_event = with_do;
      with_event.emplace_back(query.outcome, query.outcome_event);
      BigInt events = table.count_matching(with_event);
      sum += Rational(events, in_stratum) * Rational(marginal, total);

      e.numerator_cells.push_back({with_event, events});
      e.denominator_cells.push_back({with_do, in_stratum});
      e.denominator_cells.push_back({stratum, marginal});
    }
    // Advance the stratum counter.
    std::size_t i = strata_axes.size();
    done = true;
    while (i-- > 0) {
      if (++counter[i] < strata_axes[i].second.size()) {
        done = false;
        break;
      }
      counter[i] = 0;
    }
  }
  std::vector<std::pair<std::string, std::string>> whole;
  e.denominator_cells.push_back({whole, total});
  e.value = sum;
  return e;
}

ContingencyTable dataset_table_for_graph(const TrialDataset& d,
                                         const CausalDag& graph,
                                         const std::vector<std::string>& nodes) {
  std::vector<std::string> columns;
  for (const auto& node : nodes) {
    switch (graph.role(node)) {
      case NodeRole::TreatmentPrescribed: columns.push_back("x_prescribed"); break;
      case NodeRole::TreatmentReceived: columns.push_back("x_received"); break;
      case NodeRole::Outcome: columns.push_back("outcome"); break;
      default: columns.push_back(node); break;
    }
  }
  ContingencyTable raw = tabulate(d, columns);
  ContingencyTable::Dims dims = raw.dims();
  for (std::size_t i = 0; i < dims.size(); ++i) dims[i].first = nodes[i];
  ContingencyTable renamed(std::move(dims));
  for (std::size_t flat = 0; flat < raw.cell_count(); ++flat) {
    auto levels = raw.decode(flat);
    renamed.at(levels) = raw.at(levels);
  }
  return renamed;
}

}  // namespace pct
