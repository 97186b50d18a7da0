#ifndef PCT_ADJUSTMENT_HPP
#define PCT_ADJUSTMENT_HPP

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pct/estimators.hpp"
#include "pct/graph.hpp"
#include "pct/scm.hpp"
#include "pct/trial_data.hpp"

namespace pct {

// Exact discrete joint distribution over named variables (row-major over
// the level lists).
class JointDistribution {
 public:
  using Vars = std::vector<std::pair<std::string, std::vector<std::string>>>;

  JointDistribution(Vars variables, std::vector<Rational> probabilities);

  const Vars& variables() const { return variables_; }
  const std::vector<Rational>& probabilities() const { return probabilities_; }

  // P(all pairs in `where` hold).
  Rational prob_matching(
      const std::vector<std::pair<std::string, std::string>>& where) const;

  // P(target=level | where); ValidationError if P(where) == 0.
  Rational conditional(
      const std::string& target, const std::string& level,
      const std::vector<std::pair<std::string, std::string>>& where) const;

  std::vector<std::size_t> decode(std::size_t flat) const;

 private:
  Vars variables_;
  std::vector<Rational> probabilities_;
};

// The joint distribution entailed by `params`, optionally under
// interventions: intervened nodes have their mechanisms replaced by point
// masses at the given levels (truncated factorization).
JointDistribution oracle_joint(
    const ScmParams& params,
    const std::vector<std::pair<std::string, std::string>>& interventions = {});

// Exact P(outcome-node = outcome_event | do(interventions)) for the
// unique Outcome-role node.
Rational oracle_interventional(
    const ScmParams& params,
    const std::vector<std::pair<std::string, std::string>>& interventions,
    const std::string& outcome_event);

// The exact population contingency table over all nodes: integer counts
// proportional to the joint distribution (common-denominator numerators).
ContingencyTable population_table(const ScmParams& params);

// An interventional query answered from observed counts by backdoor
// adjustment.
struct AdjustmentQuery {
  CausalDag graph;
  // one entry for a single intervention, two for a joint intervention
  std::vector<std::pair<std::string, std::string>> interventions;
  std::string outcome;
  std::string outcome_event;
  std::set<std::string> adjustment_set;
};

// Plug-in sum_z P(Y=event | do-levels, z) P(z) over the adjustment
// strata, in exact rationals. Refuses (NotAdmissibleError) if the
// adjustment set fails the backdoor criterion; positivity failures are
// PositivityViolationError, never silently dropped strata. The table's
// dimensions must be named after graph nodes and cover the interventions,
// outcome, and adjustment set.
EffectEstimate backdoor_adjust(const AdjustmentQuery& query,
                               const ContingencyTable& table);

// Tabulates a dataset with dimensions named after graph nodes: the
// prescribed/received treatment and outcome columns are mapped through
// their roles; covariate nodes map to the dataset columns of the same
// name.
ContingencyTable dataset_table_for_graph(const TrialDataset& d,
                                         const CausalDag& graph,
                                         const std::vector<std::string>& nodes);

}  // namespace pct

#endif  // PCT_ADJUSTMENT_HPP
