#ifndef PCT_SCM_HPP
#define PCT_SCM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pct/graph.hpp"
#include "pct/rational.hpp"

namespace pct {

// Conditional probability table for one node. Rows are indexed row-major
// by the levels of `parents` (in that order); each row is a distribution
// over the node's own levels and must sum to exactly 1.
struct Mechanism {
  std::vector<std::string> parents;
  std::vector<std::vector<Rational>> rows;
};

// Optional per-arm, per-period event probabilities used to draw discrete
// event times (keyed by received-arm level). A single value is expanded
// to a constant hazard over all periods 1..horizon.
struct HazardSpec {
  std::int64_t horizon = 0;
  std::map<std::string, std::vector<Rational>> per_arm;
};

// Fully parameterized discrete structural model: a causal graph plus one
// stochastic mechanism per node. Immutable after creation.
class ScmParams {
 public:
  static ScmParams create(CausalDag graph,
                          std::map<std::string, Mechanism> mechanisms,
                          std::map<std::string, std::vector<std::string>> levels,
                          std::optional<HazardSpec> hazard = std::nullopt,
                          std::optional<std::string> outcome_event = std::nullopt);

  const CausalDag& graph() const { return graph_; }
  const Mechanism& mechanism(const std::string& node) const;
  const std::vector<std::string>& levels(const std::string& node) const;
  const std::map<std::string, std::vector<std::string>>& all_levels() const {
    return levels_;
  }
  const std::optional<HazardSpec>& hazard() const { return hazard_; }

  // Distribution of `node` given its parents' values.
  const std::vector<Rational>& mechanism_row(
      const std::string& node,
      const std::vector<std::string>& parent_values) const;

  // Role-derived conveniences; these require the corresponding role to be
  // present exactly once.
  const std::vector<std::string>& arm_labels() const;
  const std::vector<std::string>& outcome_labels() const;
  // Designated event level: explicit if given, otherwise the last outcome
  // label.
  std::string outcome_event() const;
  // P(X = arm_labels()[0]) for the parentless randomized treatment.
  Rational randomization_prob() const;

 private:
  ScmParams() = default;

  CausalDag graph_;
  std::map<std::string, Mechanism> mechanisms_;
  std::map<std::string, std::vector<std::string>> levels_;
  std::optional<HazardSpec> hazard_;
  std::optional<std::string> outcome_event_;
};

// JSON parameter file:
//   {"graph": {...},                      // graph file schema
//    "levels": {"X": ["A","B"], ...},     // per-node levels
//    "mechanisms": {
//       "X": {"p": {"A": "1/2", "B": "1/2"}},
//       "X'": {"parents": ["X","Z'"],
//              "p": {"A": {"low": {"A": "97/100", "B": "3/100"}, ...}, ...}}},
//    "outcome_event": "died",             // optional
//    "hazard": {"horizon": 50,            // optional
//               "per_arm": {"A": "1/5", "B": ["1/10", ...]}}}
// Probabilities are exact decimal strings or "p/q" strings. Mechanism
// tables nest one map level per parent, in the declared parent order.
// Unknown fields are rejected.
ScmParams load_params_json(const std::string& text);
std::string params_to_json(const ScmParams& params);

}  // namespace pct

#endif  // PCT_SCM_HPP
