#include "pct/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace pct {

namespace {

const std::vector<std::pair<NodeRole, std::string>> kRoleNames = {
    {NodeRole::TreatmentPrescribed, "treatment_prescribed"},
    {NodeRole::TreatmentReceived, "treatment_received"},
    {NodeRole::Outcome, "outcome"},
    {NodeRole::Covariate, "covariate"},
    {NodeRole::AdherenceCovariate, "adherence_covariate"},
    {NodeRole::Selection, "selection"},
    {NodeRole::Censoring, "censoring"},
};

}  // namespace

const std::string& role_name(NodeRole role) {
  for (const auto& [r, n] : kRoleNames) {
    if (r == role) return n;
  }
  throw ValidationError("unknown node role");
}

std::optional<NodeRole> role_from_name(const std::string& name) {
  for (const auto& [r, n] : kRoleNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

bool is_acyclic(const std::vector<NodeSpec>& nodes,
                const std::vector<Edge>& edges) {
  std::unordered_map<std::string, int> index;
  for (const auto& n : nodes) index.emplace(n.name, static_cast<int>(index.size()));

  std::vector<std::vector<int>> children(nodes.size());
  std::vector<int> indegree(nodes.size(), 0);
  for (const auto& [from, to] : edges) {
    auto f = index.find(from);
    auto t = index.find(to);
    if (f == index.end() || t == index.end()) {
      throw ValidationError("edge endpoint '" +
                            (f == index.end() ? from : to) +
                            "' is not a declared node");
    }
    children[f->second].push_back(t->second);
    ++indegree[t->second];
  }

  // Kahn's algorithm.
  std::deque<int> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
  }
  std::size_t emitted = 0;
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop_front();
    ++emitted;
    for (int c : children[v]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  return emitted == nodes.size();
}

namespace {

// One cycle through `start`, as "a -> b -> ... -> a", for error messages.
std::string describe_cycle(const std::vector<std::vector<int>>& children,
                           const std::vector<NodeSpec>& nodes) {
  const int n = static_cast<int>(nodes.size());
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
  std::vector<int> stack;

  std::string found;
  auto dfs = [&](auto&& self, int v) -> bool {
    state[v] = 1;
    stack.push_back(v);
    for (int c : children[v]) {
      if (state[c] == 1) {
        auto it = std::find(stack.begin(), stack.end(), c);
        std::string msg;
        for (auto j = it; j != stack.end(); ++j) {
          msg += nodes[*j].name + " -> ";
        }
        msg += nodes[c].name;
        found = msg;
        return true;
      }
      if (state[c] == 0 && self(self, c)) return true;
    }
    state[v] = 2;
    stack.pop_back();
    return false;
  };
  for (int v = 0; v < n; ++v) {
    if (state[v] == 0 && dfs(dfs, v)) return found;
  }
  return "";
}

}  // namespace

CausalDag CausalDag::create(std::vector<NodeSpec> nodes,
                            std::vector<Edge> edges) {
  std::unordered_map<std::string, int> index;
  for (const auto& n : nodes) {
    if (n.name.empty()) throw ValidationError("node name must be non-empty");
    if (!index.emplace(n.name, static_cast<int>(index.size())).second) {
      throw ValidationError("duplicate node name '" + n.name + "'");
    }
  }

  std::set<std::pair<int, int>> seen;
  std::vector<std::vector<int>> parents(nodes.size()), children(nodes.size());
  for (const auto& [from, to] : edges) {
    auto f = index.find(from);
    auto t = index.find(to);
    if (f == index.end() || t == index.end()) {
      throw ValidationError("edge endpoint '" +
                            (f == index.end() ? from : to) +
                            "' is not a declared node");
    }
    if (f->second == t->second) {
      throw ValidationError("self-loop on node '" + from + "'");
    }
    if (!seen.emplace(f->second, t->second).second) {
      throw ValidationError("duplicate edge " + from + " -> " + to);
    }
    children[f->second].push_back(t->second);
    parents[t->second].push_back(f->second);
  }

  if (!pct::is_acyclic(nodes, edges)) {
    throw ValidationError("graph has a cycle: " +
                          describe_cycle(children, nodes));
  }

  CausalDag g;
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  g.parents_ = std::move(parents);
  g.children_ = std::move(children);
  return g;
}

int CausalDag::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

bool CausalDag::has_node(const std::string& name) const {
  return index_of(name) >= 0;
}

NodeRole CausalDag::role(const std::string& name) const {
  int i = index_of(name);
  if (i < 0) throw ValidationError("unknown node '" + name + "'");
  return nodes_[i].role;
}

bool CausalDag::has_edge(const std::string& from, const std::string& to) const {
  int f = index_of(from), t = index_of(to);
  if (f < 0 || t < 0) return false;
  return std::find(children_[f].begin(), children_[f].end(), t) !=
         children_[f].end();
}

std::vector<std::string> CausalDag::parents(const std::string& name) const {
  int i = index_of(name);
  if (i < 0) throw ValidationError("unknown node '" + name + "'");
  std::vector<std::string> out;
  for (int p : parents_[i]) out.push_back(nodes_[p].name);
  return out;
}

std::vector<std::string> CausalDag::children(const std::string& name) const {
  int i = index_of(name);
  if (i < 0) throw ValidationError("unknown node '" + name + "'");
  std::vector<std::string> out;
  for (int c : children_[i]) out.push_back(nodes_[c].name);
  return out;
}

std::vector<std::string> CausalDag::topological_order() const {
  std::vector<int> indegree(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    indegree[i] = static_cast<int>(parents_[i].size());
  }
  std::deque<int> ready;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop_front();
    order.push_back(nodes_[v].name);
    for (int c : children_[v]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  return order;
}

namespace {

std::set<std::string> closure(const CausalDag& g,
                              const std::set<std::string>& of,
                              bool follow_parents) {
  std::set<std::string> out;
  std::deque<std::string> frontier(of.begin(), of.end());
  while (!frontier.empty()) {
    std::string v = frontier.front();
    frontier.pop_front();
    auto next = follow_parents ? g.parents(v) : g.children(v);
    for (const auto& w : next) {
      if (out.insert(w).second) frontier.push_back(w);
    }
  }
  for (const auto& v : of) out.erase(v);
  return out;
}

}  // namespace

std::set<std::string> CausalDag::ancestors(
    const std::set<std::string>& of) const {
  return closure(*this, of, true);
}

std::set<std::string> CausalDag::descendants(
    const std::set<std::string>& of) const {
  return closure(*this, of, false);
}

std::vector<std::string> CausalDag::nodes_with_role(NodeRole role) const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (n.role == role) out.push_back(n.name);
  }
  return out;
}

std::string CausalDag::unique_role_node(NodeRole role) const {
  auto matches = nodes_with_role(role);
  if (matches.size() != 1) {
    throw ValidationError("expected exactly one node with role '" +
                          role_name(role) + "', found " +
                          std::to_string(matches.size()));
  }
  return matches.front();
}

CausalDag build_pct_template(bool with_selection, bool with_censoring) {
  std::vector<NodeSpec> nodes = {
      {"X", NodeRole::TreatmentPrescribed},
      {"X'", NodeRole::TreatmentReceived},
      {"Y", NodeRole::Outcome},
      {"Z", NodeRole::Covariate},
      {"Z'", NodeRole::AdherenceCovariate},
  };
  std::vector<Edge> edges = {
      {"X", "X'"}, {"X'", "Y"}, {"Z'", "X'"}, {"Z'", "Y"}, {"Z", "Y"},
  };
  if (with_selection) {
    nodes.push_back({"S", NodeRole::Selection});
    edges.push_back({"Z", "S"});
  }
  if (with_censoring) {
    nodes.push_back({"C", NodeRole::Censoring});
    edges.push_back({"X'", "C"});
    edges.push_back({"Z'", "C"});
  }
  return CausalDag::create(std::move(nodes), std::move(edges));
}

std::vector<std::string> pct_role_issues(const CausalDag& g) {
  std::vector<std::string> issues;
  auto require_one = [&](NodeRole role) {
    auto found = g.nodes_with_role(role);
    if (found.size() != 1) {
      issues.push_back("expected exactly one '" + role_name(role) +
                       "' node, found " + std::to_string(found.size()));
    }
  };
  require_one(NodeRole::TreatmentPrescribed);
  require_one(NodeRole::TreatmentReceived);
  require_one(NodeRole::Outcome);
  return issues;
}

bool d_separated(const CausalDag& g, const std::set<std::string>& set_a,
                 const std::set<std::string>& set_b,
                 const std::set<std::string>& given) {
  auto check_known = [&](const std::set<std::string>& s, const char* what) {
    for (const auto& name : s) {
      if (!g.has_node(name)) {
        throw ValidationError(std::string("unknown node '") + name + "' in " +
                              what);
      }
    }
  };
  check_known(set_a, "first set");
  check_known(set_b, "second set");
  check_known(given, "conditioning set");
  auto disjoint = [](const std::set<std::string>& x,
                     const std::set<std::string>& y) {
    for (const auto& v : x) {
      if (y.count(v)) return false;
    }
    return true;
  };
  if (!disjoint(set_a, set_b) || !disjoint(set_a, given) ||
      !disjoint(set_b, given)) {
    throw ValidationError("d-separation sets must be pairwise disjoint");
  }
  if (set_a.empty() || set_b.empty()) return true;

  // Nodes that are in `given` or have a descendant in `given`; these
  // activate colliders.
  std::set<std::string> anc_given = g.ancestors(given);
  for (const auto& v : given) anc_given.insert(v);

  // Reachability over (node, arrived-through-incoming-edge?) states.
  // arrived_in = true means the last edge pointed into the node.
  const int n = static_cast<int>(g.node_count());
  std::vector<std::array<bool, 2>> visited(n, {false, false});
  std::deque<std::pair<int, bool>> frontier;

  std::vector<bool> in_given(n, false), in_b(n, false), activates(n, false);
  for (int i = 0; i < n; ++i) {
    const auto& name = g.nodes()[i].name;
    in_given[i] = given.count(name) > 0;
    in_b[i] = set_b.count(name) > 0;
    activates[i] = anc_given.count(name) > 0;
  }

  for (const auto& a : set_a) {
    int i = g.index_of(a);
    frontier.emplace_back(i, false);
  }

  while (!frontier.empty()) {
    auto [v, arrived_in] = frontier.front();
    frontier.pop_front();
    if (visited[v][arrived_in]) continue;
    visited[v][arrived_in] = true;
    if (in_b[v]) return false;

    if (!arrived_in) {
      // Came up out of a child (or starting node): may pass through v
      // in any direction unless v is conditioned on.
      if (!in_given[v]) {
        for (int p : g.parents_[v]) frontier.emplace_back(p, false);
        for (int c : g.children_[v]) frontier.emplace_back(c, true);
      }
    } else {
      // Came in through an incoming edge: chains continue to children
      // unless conditioned; colliders continue to parents when v (or a
      // descendant) is conditioned on.
      if (!in_given[v]) {
        for (int c : g.children_[v]) frontier.emplace_back(c, true);
      }
      if (activates[v]) {
        for (int p : g.parents_[v]) frontier.emplace_back(p, false);
      }
    }
  }
  return true;
}

namespace {

CausalDag without_outgoing_edges(const CausalDag& g, const std::string& node) {
  std::vector<Edge> kept;
  for (const auto& e : g.edges()) {
    if (e.first != node) kept.push_back(e);
  }
  return CausalDag::create(g.nodes(), std::move(kept));
}

void validate_backdoor_args(const CausalDag& g,
                            const std::vector<std::string>& treatments,
                            const std::string& outcome,
                            const std::set<std::string>& adjust) {
  if (treatments.empty()) throw ValidationError("no treatment node given");
  for (const auto& t : treatments) {
    if (!g.has_node(t)) throw ValidationError("unknown node '" + t + "'");
    if (t == outcome) {
      throw ValidationError("treatment and outcome must differ");
    }
    if (adjust.count(t)) {
      throw ValidationError("adjustment set must exclude treatment '" + t +
                            "'");
    }
  }
  if (!g.has_node(outcome)) {
    throw ValidationError("unknown node '" + outcome + "'");
  }
  if (adjust.count(outcome)) {
    throw ValidationError("adjustment set must exclude the outcome");
  }
  for (const auto& z : adjust) {
    if (!g.has_node(z)) throw ValidationError("unknown node '" + z + "'");
  }
}

}  // namespace

bool is_backdoor_admissible(const CausalDag& g,
                            const std::vector<std::string>& treatments,
                            const std::string& outcome,
                            const std::set<std::string>& adjust) {
  validate_backdoor_args(g, treatments, outcome, adjust);

  std::set<std::string> treatment_set(treatments.begin(), treatments.end());
  auto downstream = g.descendants(treatment_set);
  for (const auto& z : adjust) {
    if (downstream.count(z)) return false;
  }
  for (const auto& t : treatments) {
    CausalDag restricted = without_outgoing_edges(g, t);
    if (!d_separated(restricted, {t}, {outcome}, adjust)) return false;
  }
  return true;
}

bool is_backdoor_admissible(const CausalDag& g, const std::string& treatment,
                            const std::string& outcome,
                            const std::set<std::string>& adjust) {
  return is_backdoor_admissible(g, std::vector<std::string>{treatment},
                                outcome, adjust);
}

std::vector<std::string> find_open_backdoor_path(
    const CausalDag& g, const std::string& treatment,
    const std::string& outcome, const std::set<std::string>& adjust) {
  validate_backdoor_args(g, {treatment}, outcome, adjust);

  std::set<std::string> anc_given = g.ancestors(adjust);
  for (const auto& v : adjust) anc_given.insert(v);

  // DFS over simple paths that start with an edge into the treatment,
  // tracking whether the previous step entered its node (for collider
  // classification). Graphs are small; paths are enumerated directly.
  std::vector<std::string> path{treatment};
  std::set<std::string> on_path{treatment};
  std::vector<std::string> found;

  auto step = [&](auto&& self, const std::string& v, bool arrived_in) -> bool {
    if (v == outcome) {
      found = path;
      return true;
    }
    // Try extending through v; v's blocking status depends on its role
    // in the triple (prev, v, next).
    for (const auto& c : g.children(v)) {
      // v -> c : v is a chain/fork midpoint; open iff v not conditioned.
      if (adjust.count(v) || on_path.count(c)) continue;
      path.push_back(c);
      on_path.insert(c);
      if (self(self, c, true)) return true;
      path.pop_back();
      on_path.erase(c);
    }
    for (const auto& p : g.parents(v)) {
      // v <- p : if we arrived through an incoming edge, v is a collider
      // and must be activated; otherwise v is a chain midpoint.
      bool open = arrived_in ? anc_given.count(v) > 0 : adjust.count(v) == 0;
      if (!open || on_path.count(p)) continue;
      path.push_back(p);
      on_path.insert(p);
      if (self(self, p, false)) return true;
      path.pop_back();
      on_path.erase(p);
    }
    return false;
  };

  for (const auto& p : g.parents(treatment)) {
    path.push_back(p);
    on_path.insert(p);
    if (step(step, p, false)) return found;
    path.pop_back();
    on_path.erase(p);
  }
  return {};
}

std::pair<std::vector<NodeSpec>, std::vector<Edge>> parse_graph_json(
    const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Translate the byte offset into line/column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("invalid JSON: " + std::string(e.what()), line, col);
  }

  if (!doc.is_object()) throw ParseError("graph document must be an object");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "nodes" && key != "edges") {
      throw ParseError("unknown graph field '" + key + "'");
    }
  }
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw ParseError("graph document needs a 'nodes' array");
  }
  if (!doc.contains("edges") || !doc["edges"].is_array()) {
    throw ParseError("graph document needs an 'edges' array");
  }

  std::vector<NodeSpec> nodes;
  for (const auto& item : doc["nodes"]) {
    if (!item.is_object()) throw ParseError("node entries must be objects");
    for (const auto& [key, value] : item.items()) {
      (void)value;
      if (key != "name" && key != "role") {
        throw ParseError("unknown node field '" + key + "'");
      }
    }
    if (!item.contains("name") || !item["name"].is_string() ||
        !item.contains("role") || !item["role"].is_string()) {
      throw ParseError("node entries need string 'name' and 'role'");
    }
    auto role = role_from_name(item["role"].get<std::string>());
    if (!role) {
      throw ParseError("unknown role '" + item["role"].get<std::string>() +
                       "'");
    }
    nodes.push_back({item["name"].get<std::string>(), *role});
  }

  std::vector<Edge> edges;
  for (const auto& item : doc["edges"]) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() ||
        !item[1].is_string()) {
      throw ParseError("edge entries must be [from, to] string pairs");
    }
    edges.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
  }
  return {std::move(nodes), std::move(edges)};
}

CausalDag load_graph_json(const std::string& text) {
  auto [nodes, edges] = parse_graph_json(text);
  return CausalDag::create(std::move(nodes), std::move(edges));
}

std::string graph_to_json(const CausalDag& g) {
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes()) {
    doc["nodes"].push_back({{"name", n.name}, {"role", role_name(n.role)}});
  }
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& [from, to] : g.edges()) {
    doc["edges"].push_back({from, to});
  }
  return doc.dump(2) + "\n";
}

}  // namespace pct
