#include "pct/simulator.hpp"

#include <nlohmann/json.hpp>

#include "pct/adjustment.hpp"
#include "pct/prng.hpp"

namespace pct {

namespace {

// Precomputed inverse-CDF thresholds for one categorical row: cumulative
// numerators over a common denominator. Drawing compares an exact uniform
// integer in [0, denominator) against the thresholds.
struct RowSampler {
  std::vector<BigInt> cumulative;
  BigInt denom = 1;

  static RowSampler build(const std::vector<Rational>& row) {
    RowSampler s;
    for (const auto& p : row) {
      if (p != 0) s.denom = lcm(s.denom, denominator(p));
    }
    BigInt cum = 0;
    for (const auto& p : row) {
      cum += numerator(p) * (s.denom / denominator(p));
      s.cumulative.push_back(cum);
    }
    return s;
  }

  std::size_t draw(Xoshiro256ss& rng) const {
    BigInt u = rng.below(denom);
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      if (u < cumulative[i]) return i;
    }
    return cumulative.size() - 1;  // unreachable for valid rows
  }
};

struct NodeSampler {
  std::string name;
  NodeRole role;
  std::vector<std::size_t> parent_slots;   // indices into the value vector
  std::vector<std::size_t> parent_widths;  // level counts, parent order
  std::vector<RowSampler> rows;
  const std::vector<std::string>* levels;
};

}  // namespace

std::map<std::string, Rational> ground_truth_map(const ScmParams& params) {
  const auto& graph = params.graph();
  auto x = graph.unique_role_node(NodeRole::TreatmentPrescribed);
  auto xp = graph.unique_role_node(NodeRole::TreatmentReceived);
  auto y = graph.unique_role_node(NodeRole::Outcome);
  const std::string event = params.outcome_event();

  auto selections = graph.nodes_with_role(NodeRole::Selection);
  auto censorings = graph.nodes_with_role(NodeRole::Censoring);

  std::map<std::string, Rational> truth;
  auto observational = oracle_joint(params);

  std::vector<std::pair<std::string, std::string>> base;
  for (const auto& s : selections) base.emplace_back(s, "1");

  for (const auto& arm : params.arm_labels()) {
    truth["do_itt/" + arm] = oracle_interventional(params, {{x, arm}}, event);
    truth["do_at/" + arm] = oracle_interventional(params, {{xp, arm}}, event);
    truth["do_pp/" + arm] =
        oracle_interventional(params, {{x, arm}, {xp, arm}}, event);

    auto conditional_or_skip = [&](const std::string& key,
                                   std::vector<std::pair<std::string, std::string>>
                                       where) {
      if (observational.prob_matching(where) == 0) return;
      truth[key] = observational.conditional(y, event, where);
    };

    auto itt = base;
    itt.emplace_back(x, arm);
    conditional_or_skip("p_itt/" + arm, itt);
    auto at = base;
    at.emplace_back(xp, arm);
    conditional_or_skip("p_at/" + arm, at);
    auto pp = base;
    pp.emplace_back(x, arm);
    pp.emplace_back(xp, arm);
    conditional_or_skip("p_pp/" + arm, pp);

    if (!censorings.empty()) {
      auto cc = base;
      for (const auto& c : censorings) cc.emplace_back(c, "1");
      auto itt_cc = cc;
      itt_cc.emplace_back(x, arm);
      conditional_or_skip("p_itt_cc/" + arm, itt_cc);
      auto at_cc = cc;
      at_cc.emplace_back(xp, arm);
      conditional_or_skip("p_at_cc/" + arm, at_cc);
      auto pp_cc = cc;
      pp_cc.emplace_back(x, arm);
      pp_cc.emplace_back(xp, arm);
      conditional_or_skip("p_pp_cc/" + arm, pp_cc);
    }
  }
  return truth;
}

SimulationOutput simulate(const ScmParams& params, std::uint64_t n,
                          std::uint64_t seed) {
  const auto& graph = params.graph();
  auto x_name = graph.unique_role_node(NodeRole::TreatmentPrescribed);
  auto xp_name = graph.unique_role_node(NodeRole::TreatmentReceived);
  auto y_name = graph.unique_role_node(NodeRole::Outcome);
  const std::string event = params.outcome_event();

  auto selections = graph.nodes_with_role(NodeRole::Selection);
  auto censorings = graph.nodes_with_role(NodeRole::Censoring);
  if (selections.size() > 1 || censorings.size() > 1) {
    throw ValidationError("at most one selection and one censoring node");
  }

  // Samplers in topological order.
  auto order = graph.topological_order();
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < order.size(); ++i) slot[order[i]] = i;

  std::vector<NodeSampler> samplers;
  for (const auto& name : order) {
    NodeSampler s;
    s.name = name;
    s.role = graph.role(name);
    s.levels = &params.levels(name);
    const auto& mech = params.mechanism(name);
    for (const auto& parent : mech.parents) {
      s.parent_slots.push_back(slot.at(parent));
      s.parent_widths.push_back(params.levels(parent).size());
    }
    for (const auto& row : mech.rows) s.rows.push_back(RowSampler::build(row));
    samplers.push_back(std::move(s));
  }

  // Event-time samplers per arm: distribution of T | event by horizon,
  // plus the horizon for administrative censoring.
  std::map<std::string, RowSampler> time_samplers;
  std::int64_t horizon = 0;
  if (params.hazard()) {
    horizon = params.hazard()->horizon;
    for (const auto& [arm, hazards] : params.hazard()->per_arm) {
      std::vector<Rational> mass;  // P(T = t, event by horizon), t = 1..H
      Rational survive = 1;
      for (const auto& h : hazards) {
        mass.push_back(survive * h);
        survive *= (1 - h);
      }
      Rational incidence = 1 - survive;
      for (auto& m : mass) m /= incidence;  // condition on the event
      time_samplers.emplace(arm, RowSampler::build(mass));
    }
  }

  // Dataset schema: covariate columns in graph declaration order.
  DatasetSchema schema;
  schema.arm_labels = params.arm_labels();
  schema.outcome_labels = params.outcome_labels();
  std::vector<std::string> covariate_nodes;
  for (const auto& node : graph.nodes()) {
    if (node.role == NodeRole::Covariate ||
        node.role == NodeRole::AdherenceCovariate) {
      covariate_nodes.push_back(node.name);
      schema.covariates.emplace_back(node.name, params.levels(node.name));
    }
  }

  Xoshiro256ss rng(seed);
  std::vector<TrialRecord> records;
  std::vector<std::size_t> values(order.size());
  std::uint64_t retained = 0;

  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < samplers.size(); ++k) {
      const auto& s = samplers[k];
      std::size_t row = 0;
      for (std::size_t pi = 0; pi < s.parent_slots.size(); ++pi) {
        row = row * s.parent_widths[pi] + values[s.parent_slots[pi]];
      }
      values[k] = s.rows[row].draw(rng);
    }

    bool selected = true;
    bool completed = true;
    for (const auto& sel : selections) {
      if ((*samplers[slot.at(sel)].levels)[values[slot.at(sel)]] == "0") {
        selected = false;
      }
    }
    if (!selected) continue;
    for (const auto& cen : censorings) {
      if ((*samplers[slot.at(cen)].levels)[values[slot.at(cen)]] == "0") {
        completed = false;
      }
    }

    TrialRecord r;
    ++retained;
    r.patient_id = "p" + std::to_string(retained);
    r.x_prescribed = (*samplers[slot.at(x_name)].levels)[values[slot.at(x_name)]];
    r.x_received = (*samplers[slot.at(xp_name)].levels)[values[slot.at(xp_name)]];
    r.completed = completed;
    std::string y_value =
        (*samplers[slot.at(y_name)].levels)[values[slot.at(y_name)]];
    if (completed) {
      r.outcome = y_value;
      if (params.hazard()) {
        if (y_value == event) {
          const auto& ts = time_samplers.at(r.x_received);
          r.event_time = static_cast<std::int64_t>(ts.draw(rng)) + 1;
        } else {
          r.event_time = horizon;
        }
      }
    }
    for (const auto& cov : covariate_nodes) {
      r.covariates.push_back(
          (*samplers[slot.at(cov)].levels)[values[slot.at(cov)]]);
    }
    records.push_back(std::move(r));
  }

  SimulationOutput out;
  out.dataset =
      TrialDataset::create(std::move(schema), std::move(records), false);
  out.ground_truth = ground_truth_map(params);
  out.seed = seed;
  out.n_requested = n;
  out.n_after_selection = retained;
  return out;
}

ScmParams fit_params_from_table(const ContingencyTable& table,
                                const CausalDag& graph) {
  std::map<std::string, std::vector<std::string>> levels;
  for (const auto& node : graph.nodes()) {
    std::size_t d = table.dim_index(node.name);  // throws if missing
    levels[node.name] = table.dims()[d].second;
  }

  std::map<std::string, Mechanism> mechanisms;
  for (const auto& node : graph.nodes()) {
    Mechanism m;
    m.parents = graph.parents(node.name);
    const auto& own_levels = levels.at(node.name);

    // Row-major enumeration of parent configurations.
    std::vector<std::size_t> counter(m.parents.size(), 0);
    bool done = false;
    while (!done) {
      std::vector<std::pair<std::string, std::string>> config;
      for (std::size_t i = 0; i < m.parents.size(); ++i) {
        config.emplace_back(m.parents[i], levels.at(m.parents[i])[counter[i]]);
      }
      BigInt denom = table.count_matching(config);
      if (denom == 0) {
        std::string text;
        for (const auto& [node_name, level] : config) {
          if (!text.empty()) text += ", ";
          text += node_name + "=" + level;
        }
        if (text.empty()) text = "(empty table)";
        throw ValidationError("unobserved parent configuration for '" +
                              node.name + "': " + text);
      }
      std::vector<Rational> row;
      for (const auto& level : own_levels) {
        auto with_value = config;
        with_value.emplace_back(node.name, level);
        row.emplace_back(table.count_matching(with_value), denom);
      }
      m.rows.push_back(std::move(row));

      std::size_t i = m.parents.size();
      done = true;
      while (i-- > 0) {
        if (++counter[i] < levels.at(m.parents[i]).size()) {
          done = false;
          break;
        }
        counter[i] = 0;
      }
    }
    mechanisms[node.name] = std::move(m);
  }
  return ScmParams::create(graph, std::move(mechanisms), std::move(levels));
}

std::string truth_to_json(const SimulationOutput& output) {
  nlohmann::ordered_json doc;
  doc["seed"] = output.seed;
  doc["n_requested"] = output.n_requested;
  doc["n_after_selection"] = output.n_after_selection;
  doc["ground_truth"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : output.ground_truth) {
    doc["ground_truth"][key] = rational_string(value);
  }
  return doc.dump(2) + "\n";
}

}  // namespace pct
