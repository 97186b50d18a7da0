#include "pct/scm.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

namespace pct {

namespace {

std::size_t level_position(const std::vector<std::string>& levels,
                           const std::string& value, const std::string& node) {
  auto it = std::find(levels.begin(), levels.end(), value);
  if (it == levels.end()) {
    throw ValidationError("node '" + node + "' has no level '" + value + "'");
  }
  return static_cast<std::size_t>(it - levels.begin());
}

}  // namespace

ScmParams ScmParams::create(
    CausalDag graph, std::map<std::string, Mechanism> mechanisms,
    std::map<std::string, std::vector<std::string>> levels,
    std::optional<HazardSpec> hazard,
    std::optional<std::string> outcome_event) {
  ScmParams p;
  p.graph_ = std::move(graph);
  p.mechanisms_ = std::move(mechanisms);
  p.levels_ = std::move(levels);
  p.hazard_ = std::move(hazard);
  p.outcome_event_ = std::move(outcome_event);

  for (const auto& node : p.graph_.nodes()) {
    auto lit = p.levels_.find(node.name);
    if (lit == p.levels_.end() || lit->second.empty()) {
      throw ValidationError("node '" + node.name + "' has no declared levels");
    }
    std::set<std::string> unique(lit->second.begin(), lit->second.end());
    if (unique.size() != lit->second.size()) {
      throw ValidationError("node '" + node.name + "' has duplicate levels");
    }
    if ((node.role == NodeRole::Selection || node.role == NodeRole::Censoring) &&
        lit->second != std::vector<std::string>{"0", "1"}) {
      throw ValidationError("node '" + node.name +
                            "' must have levels [\"0\", \"1\"]");
    }
    if (p.mechanisms_.find(node.name) == p.mechanisms_.end()) {
      throw ValidationError("node '" + node.name + "' has no mechanism");
    }
  }
  for (const auto& [name, m] : p.mechanisms_) {
    (void)m;
    if (!p.graph_.has_node(name)) {
      throw ValidationError("mechanism for unknown node '" + name + "'");
    }
  }
  for (const auto& [name, levels_list] : p.levels_) {
    (void)levels_list;
    if (!p.graph_.has_node(name)) {
      throw ValidationError("levels for unknown node '" + name + "'");
    }
  }

  for (const auto& node : p.graph_.nodes()) {
    const auto& m = p.mechanisms_.at(node.name);
    auto declared = m.parents;
    auto actual = p.graph_.parents(node.name);
    std::set<std::string> ds(declared.begin(), declared.end());
    std::set<std::string> as(actual.begin(), actual.end());
    if (ds.size() != declared.size()) {
      throw ValidationError("mechanism for '" + node.name +
                            "' lists a parent twice");
    }
    if (ds != as) {
      throw ValidationError("mechanism parents for '" + node.name +
                            "' do not match the graph");
    }
    std::size_t rows = 1;
    for (const auto& parent : declared) rows *= p.levels_.at(parent).size();
    if (m.rows.size() != rows) {
      throw ValidationError("mechanism for '" + node.name + "' needs " +
                            std::to_string(rows) + " rows, has " +
                            std::to_string(m.rows.size()));
    }
    const std::size_t width = p.levels_.at(node.name).size();
    for (const auto& row : m.rows) {
      if (row.size() != width) {
        throw ValidationError("mechanism row for '" + node.name +
                              "' has wrong width");
      }
      Rational sum = 0;
      for (const auto& v : row) {
        if (v < 0 || v > 1) {
          throw ValidationError("mechanism probability out of [0,1] for '" +
                                node.name + "'");
        }
        sum += v;
      }
      if (sum != 1) {
        throw ValidationError("mechanism row for '" + node.name +
                              "' sums to " + rational_string(sum) +
                              ", expected 1");
      }
    }
  }

  // Treatment nodes must agree on levels when both roles are present.
  auto xs = p.graph_.nodes_with_role(NodeRole::TreatmentPrescribed);
  auto xps = p.graph_.nodes_with_role(NodeRole::TreatmentReceived);
  if (xs.size() == 1 && xps.size() == 1 &&
      p.levels_.at(xs[0]) != p.levels_.at(xps[0])) {
    throw ValidationError("prescribed and received treatments must share arm labels");
  }

  if (p.outcome_event_) {
    auto ys = p.graph_.nodes_with_role(NodeRole::Outcome);
    if (ys.size() != 1) {
      throw ValidationError("outcome_event given but no unique outcome node");
    }
    level_position(p.levels_.at(ys[0]), *p.outcome_event_, ys[0]);
  }

  if (p.hazard_) {
    if (p.hazard_->horizon < 1) {
      throw ValidationError("hazard horizon must be >= 1");
    }
    const auto& arms = p.arm_labels();
    for (const auto& arm : arms) {
      auto it = p.hazard_->per_arm.find(arm);
      if (it == p.hazard_->per_arm.end()) {
        throw ValidationError("hazard spec missing arm '" + arm + "'");
      }
      if (it->second.size() != static_cast<std::size_t>(p.hazard_->horizon)) {
        throw ValidationError("hazard list for arm '" + arm + "' must have " +
                              std::to_string(p.hazard_->horizon) + " entries");
      }
      Rational survive = 1;
      for (const auto& h : it->second) {
        if (h < 0 || h > 1) {
          throw ValidationError("hazard out of [0,1] for arm '" + arm + "'");
        }
        survive *= (1 - h);
      }
      if (survive == 1) {
        throw ValidationError("arm '" + arm +
                              "' has zero cumulative event probability");
      }
    }
    for (const auto& [arm, list] : p.hazard_->per_arm) {
      (void)list;
      if (std::find(arms.begin(), arms.end(), arm) == arms.end()) {
        throw ValidationError("hazard spec names unknown arm '" + arm + "'");
      }
    }
  }
  return p;
}

const Mechanism& ScmParams::mechanism(const std::string& node) const {
  auto it = mechanisms_.find(node);
  if (it == mechanisms_.end()) {
    throw ValidationError("no mechanism for node '" + node + "'");
  }
  return it->second;
}

const std::vector<std::string>& ScmParams::levels(const std::string& node) const {
  auto it = levels_.find(node);
  if (it == levels_.end()) {
    throw ValidationError("no levels for node '" + node + "'");
  }
  return it->second;
}

const std::vector<Rational>& ScmParams::mechanism_row(
    const std::string& node,
    const std::vector<std::string>& parent_values) const {
  const auto& m = mechanism(node);
  if (parent_values.size() != m.parents.size()) {
    throw ValidationError("wrong number of parent values for '" + node + "'");
  }
  std::size_t row = 0;
  for (std::size_t i = 0; i < m.parents.size(); ++i) {
    const auto& plevels = levels(m.parents[i]);
    row = row * plevels.size() +
          level_position(plevels, parent_values[i], m.parents[i]);
  }
  return m.rows[row];
}

const std::vector<std::string>& ScmParams::arm_labels() const {
  return levels(graph_.unique_role_node(NodeRole::TreatmentPrescribed));
}

const std::vector<std::string>& ScmParams::outcome_labels() const {
  return levels(graph_.unique_role_node(NodeRole::Outcome));
}

std::string ScmParams::outcome_event() const {
  if (outcome_event_) return *outcome_event_;
  return outcome_labels().back();
}

Rational ScmParams::randomization_prob() const {
  auto x = graph_.unique_role_node(NodeRole::TreatmentPrescribed);
  if (!graph_.parents(x).empty()) {
    throw ValidationError("treatment node '" + x +
                          "' is not parentless; no randomization probability");
  }
  return mechanism_row(x, {})[0];
}

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) {
  throw ParseError(message);
}

void expect_keys(const Json& object, const std::set<std::string>& allowed,
                 const std::string& what) {
  for (const auto& [key, value] : object.items()) {
    (void)value;
    if (!allowed.count(key)) {
      fail("unknown field '" + key + "' in " + what);
    }
  }
}

// Recursively walks the nested per-parent maps and flattens them into
// row-major rows.
void collect_rows(const Json& node_json, const std::string& node,
                  const std::vector<std::string>& parents, std::size_t depth,
                  const std::map<std::string, std::vector<std::string>>& levels,
                  const std::vector<std::string>& own_levels,
                  std::vector<std::vector<Rational>>& rows) {
  if (depth == parents.size()) {
    if (!node_json.is_object()) {
      fail("mechanism for '" + node + "' must map levels to probabilities");
    }
    std::vector<Rational> row(own_levels.size());
    std::size_t seen = 0;
    for (const auto& [level, prob] : node_json.items()) {
      auto it = std::find(own_levels.begin(), own_levels.end(), level);
      if (it == own_levels.end()) {
        fail("mechanism for '" + node + "' names unknown level '" + level + "'");
      }
      if (!prob.is_string()) {
        fail("probabilities must be strings ('1/2' or '0.5') for '" + node + "'");
      }
      row[it - own_levels.begin()] = parse_rational(prob.get<std::string>());
      ++seen;
    }
    if (seen != own_levels.size()) {
      fail("mechanism for '" + node + "' must give a probability for every level");
    }
    rows.push_back(std::move(row));
    return;
  }
  const auto& parent = parents[depth];
  auto lit = levels.find(parent);
  if (lit == levels.end()) fail("no levels for parent '" + parent + "'");
  if (!node_json.is_object()) {
    fail("mechanism for '" + node + "' must nest a map per parent level");
  }
  for (const auto& level : lit->second) {
    if (!node_json.contains(level)) {
      fail("mechanism for '" + node + "' is missing parent level '" + level +
           "' of '" + parent + "'");
    }
  }
  if (node_json.size() != lit->second.size()) {
    fail("mechanism for '" + node + "' has extra entries under parent '" +
         parent + "'");
  }
  for (const auto& level : lit->second) {
    collect_rows(node_json[level], node, parents, depth + 1, levels,
                 own_levels, rows);
  }
}

Json rows_to_json(const ScmParams& params, const std::string& node) {
  const auto& m = params.mechanism(node);
  const auto& own_levels = params.levels(node);

  // Rebuild the nested maps from the flat row-major order.
  std::function<Json(std::size_t, std::size_t&)> build =
      [&](std::size_t depth, std::size_t& row) -> Json {
    Json out = Json::object();
    if (depth == m.parents.size()) {
      for (std::size_t i = 0; i < own_levels.size(); ++i) {
        out[own_levels[i]] = rational_string(m.rows[row][i]);
      }
      ++row;
      return out;
    }
    for (const auto& level : params.levels(m.parents[depth])) {
      out[level] = build(depth + 1, row);
    }
    return out;
  };
  std::size_t row = 0;
  return build(0, row);
}

}  // namespace

ScmParams load_params_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("invalid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) fail("parameter document must be an object");
  expect_keys(doc, {"graph", "levels", "mechanisms", "outcome_event", "hazard"},
              "parameter document");
  if (!doc.contains("graph")) fail("parameter document needs 'graph'");
  if (!doc.contains("levels") || !doc["levels"].is_object()) {
    fail("parameter document needs a 'levels' object");
  }
  if (!doc.contains("mechanisms") || !doc["mechanisms"].is_object()) {
    fail("parameter document needs a 'mechanisms' object");
  }

  CausalDag graph = load_graph_json(doc["graph"].dump());

  std::map<std::string, std::vector<std::string>> levels;
  for (const auto& [node, list] : doc["levels"].items()) {
    if (!list.is_array()) fail("levels for '" + node + "' must be an array");
    std::vector<std::string> out;
    for (const auto& l : list) {
      if (!l.is_string()) fail("levels for '" + node + "' must be strings");
      out.push_back(l.get<std::string>());
    }
    levels[node] = std::move(out);
  }

  std::map<std::string, Mechanism> mechanisms;
  for (const auto& [node, spec] : doc["mechanisms"].items()) {
    if (!spec.is_object()) fail("mechanism for '" + node + "' must be an object");
    expect_keys(spec, {"parents", "p"}, "mechanism for '" + node + "'");
    Mechanism m;
    if (spec.contains("parents")) {
      if (!spec["parents"].is_array()) {
        fail("parents of '" + node + "' must be an array");
      }
      for (const auto& parent : spec["parents"]) {
        if (!parent.is_string()) fail("parents of '" + node + "' must be strings");
        m.parents.push_back(parent.get<std::string>());
      }
    }
    if (!spec.contains("p")) fail("mechanism for '" + node + "' needs 'p'");
    auto lit = levels.find(node);
    if (lit == levels.end()) fail("no levels declared for node '" + node + "'");
    collect_rows(spec["p"], node, m.parents, 0, levels, lit->second, m.rows);
    mechanisms[node] = std::move(m);
  }

  std::optional<std::string> outcome_event;
  if (doc.contains("outcome_event")) {
    if (!doc["outcome_event"].is_string()) fail("outcome_event must be a string");
    outcome_event = doc["outcome_event"].get<std::string>();
  }

  std::optional<HazardSpec> hazard;
  if (doc.contains("hazard")) {
    const auto& h = doc["hazard"];
    if (!h.is_object()) fail("hazard must be an object");
    expect_keys(h, {"horizon", "per_arm"}, "hazard");
    if (!h.contains("horizon") || !h["horizon"].is_number_integer()) {
      fail("hazard needs an integer 'horizon'");
    }
    if (!h.contains("per_arm") || !h["per_arm"].is_object()) {
      fail("hazard needs a 'per_arm' object");
    }
    HazardSpec out;
    out.horizon = h["horizon"].get<std::int64_t>();
    for (const auto& [arm, value] : h["per_arm"].items()) {
      std::vector<Rational> list;
      if (value.is_string()) {
        list.assign(static_cast<std::size_t>(std::max<std::int64_t>(out.horizon, 0)),
                    parse_rational(value.get<std::string>()));
      } else if (value.is_array()) {
        for (const auto& v : value) {
          if (!v.is_string()) fail("hazard entries must be strings");
          list.push_back(parse_rational(v.get<std::string>()));
        }
      } else {
        fail("hazard for arm '" + arm + "' must be a string or array");
      }
      out.per_arm[arm] = std::move(list);
    }
    hazard = std::move(out);
  }

  return ScmParams::create(std::move(graph), std::move(mechanisms),
                           std::move(levels), std::move(hazard),
                           std::move(outcome_event));
}

std::string params_to_json(const ScmParams& params) {
  Json doc;
  doc["graph"] = Json::parse(graph_to_json(params.graph()));
  doc["levels"] = Json::object();
  for (const auto& node : params.graph().nodes()) {
    doc["levels"][node.name] = params.levels(node.name);
  }
  doc["mechanisms"] = Json::object();
  for (const auto& node : params.graph().nodes()) {
    Json m = Json::object();
    const auto& mech = params.mechanism(node.name);
    if (!mech.parents.empty()) m["parents"] = mech.parents;
    m["p"] = rows_to_json(params, node.name);
    doc["mechanisms"][node.name] = std::move(m);
  }
  const auto ys = params.graph().nodes_with_role(NodeRole::Outcome);
  if (ys.size() == 1) doc["outcome_event"] = params.outcome_event();
  if (params.hazard()) {
    Json h;
    h["horizon"] = params.hazard()->horizon;
    h["per_arm"] = Json::object();
    for (const auto& [arm, list] : params.hazard()->per_arm) {
      Json arr = Json::array();
      for (const auto& v : list) arr.push_back(rational_string(v));
      h["per_arm"][arm] = std::move(arr);
    }
    doc["hazard"] = std::move(h);
  }
  return doc.dump(2) + "\n";
}

}  // namespace pct
