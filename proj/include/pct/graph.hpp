#ifndef PCT_GRAPH_HPP
#define PCT_GRAPH_HPP

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pct/errors.hpp"

namespace pct {

// Node roles of a pragmatic-trial causal graph. X is the prescribed
// (randomized) treatment, X' the treatment actually received, Y the
// outcome. Plain covariates influence the outcome only; adherence
// covariates additionally influence X'. Selection models eligibility
// screening, censoring models loss to follow-up.
enum class NodeRole {
  TreatmentPrescribed,
  TreatmentReceived,
  Outcome,
  Covariate,
  AdherenceCovariate,
  Selection,
  Censoring,
};

const std::string& role_name(NodeRole role);
std::optional<NodeRole> role_from_name(const std::string& name);

struct NodeSpec {
  std::string name;
  NodeRole role;
};

using Edge = std::pair<std::string, std::string>;

// True iff the directed graph over `nodes` with `edges` has no cycle.
// Unknown edge endpoints are a ValidationError.
bool is_acyclic(const std::vector<NodeSpec>& nodes,
                const std::vector<Edge>& edges);

// Immutable directed acyclic graph with named, role-tagged nodes.
// Construction validates: unique non-empty names, declared endpoints,
// no self-loops, no duplicate edges, no directed cycles. All member
// functions are const; instances are safe to share across threads.
class CausalDag {
 public:
  // An empty graph; usually built through create().
  CausalDag() = default;

  static CausalDag create(std::vector<NodeSpec> nodes, std::vector<Edge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_node(const std::string& name) const;
  NodeRole role(const std::string& name) const;
  bool has_edge(const std::string& from, const std::string& to) const;

  std::vector<std::string> parents(const std::string& name) const;
  std::vector<std::string> children(const std::string& name) const;

  // Nodes in a topological order (parents before children), stable with
  // respect to declaration order.
  std::vector<std::string> topological_order() const;

  // Proper ancestors/descendants of any node in `of` (inputs excluded).
  std::set<std::string> ancestors(const std::set<std::string>& of) const;
  std::set<std::string> descendants(const std::set<std::string>& of) const;

  std::vector<std::string> nodes_with_role(NodeRole role) const;
  // The unique node with `role`; throws ValidationError if absent or
  // duplicated.
  std::string unique_role_node(NodeRole role) const;

  // Always true for a constructed graph; cyclic inputs are rejected by
  // create(). The free is_acyclic() answers the question for raw input.
  bool is_acyclic() const { return true; }

 private:
  int index_of(const std::string& name) const;  // -1 if unknown

  std::vector<NodeSpec> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;

  friend bool d_separated(const CausalDag&, const std::set<std::string>&,
                          const std::set<std::string>&,
                          const std::set<std::string>&);
};

// Canonical pragmatic-trial template: nodes X, X', Y, Z, Z' with edges
// X->X', X'->Y, Z'->X', Z'->Y, Z->Y. With selection, adds S with parent Z;
// with censoring, adds C with parents X' and Z'.
CausalDag build_pct_template(bool with_selection, bool with_censoring);

// Issues (empty = none) with the pragmatic-trial role invariants:
// exactly one TreatmentPrescribed, one TreatmentReceived, one Outcome.
std::vector<std::string> pct_role_issues(const CausalDag& g);

// Standard d-separation: true iff every path between set_a and set_b is
// blocked given `given`. The three sets must be disjoint and name
// existing nodes.
bool d_separated(const CausalDag& g, const std::set<std::string>& set_a,
                 const std::set<std::string>& set_b,
                 const std::set<std::string>& given);

// Backdoor criterion for a single treatment: (i) no node of `adjust` is a
// descendant of `treatment`, and (ii) `adjust` blocks every path from
// treatment to outcome that enters the treatment through an incoming edge.
bool is_backdoor_admissible(const CausalDag& g, const std::string& treatment,
                            const std::string& outcome,
                            const std::set<std::string>& adjust);

// Set version for joint interventions: the descendant condition is taken
// over all treatments and condition (ii) must hold for each treatment.
bool is_backdoor_admissible(const CausalDag& g,
                            const std::vector<std::string>& treatments,
                            const std::string& outcome,
                            const std::set<std::string>& adjust);

// A witness for a failed backdoor check: one open path from `treatment`
// to `outcome` that starts with an edge into the treatment, given
// `adjust`. Empty if every such path is blocked.
std::vector<std::string> find_open_backdoor_path(
    const CausalDag& g, const std::string& treatment,
    const std::string& outcome, const std::set<std::string>& adjust);

// JSON graph file format:
//   {"nodes": [{"name": "X", "role": "treatment_prescribed"}, ...],
//    "edges": [["X", "X'"], ...]}
// Unknown fields are rejected. parse_graph_json reports malformed JSON as
// ParseError with line/column; semantic problems surface later from
// CausalDag::create as ValidationError.
std::pair<std::vector<NodeSpec>, std::vector<Edge>> parse_graph_json(
    const std::string& text);
CausalDag load_graph_json(const std::string& text);
std::string graph_to_json(const CausalDag& g);

}  // namespace pct

#endif  // PCT_GRAPH_HPP
