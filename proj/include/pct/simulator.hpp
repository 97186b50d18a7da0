#ifndef PCT_SIMULATOR_HPP
#define PCT_SIMULATOR_HPP

#include <cstdint>
#include <map>
#include <string>

#include "pct/scm.hpp"
#include "pct/trial_data.hpp"

namespace pct {

// A simulated trial plus the exact interventional/observational truths of
// the generating parameters. ground_truth keys, per arm label a:
//   do_itt/a  P(Y=event | do(X=a))
//   do_at/a   P(Y=event | do(X'=a))
//   do_pp/a   P(Y=event | do(X=a, X'=a))
//   p_itt/a, p_at/a, p_pp/a        observational conditionals (given S=1
//                                  when a selection node is present)
//   p_itt_cc/a, p_at_cc/a, p_pp_cc/a   the complete-case versions
//                                  (additionally given C=1; only when a
//                                  censoring node is present)
// Interventional truths are over the full source population; selection is
// simulated, never corrected for.
struct SimulationOutput {
  TrialDataset dataset;
  std::map<std::string, Rational> ground_truth;
  std::uint64_t seed = 0;
  std::uint64_t n_requested = 0;
  std::uint64_t n_after_selection = 0;
};

// Ancestral sampling of n records in topological order with the pinned
// xoshiro256** generator; identical (params, n, seed) give byte-identical
// datasets on every platform. Rows sampled with S=0 are excluded (counted
// in n_requested - n_after_selection); rows with C=0 keep x_received but
// get completed=false and a missing outcome. When a hazard spec is
// present, completed records draw an event time: events get a time
// distributed per the received arm's per-period hazards conditioned on
// occurring by the horizon, non-events are censored at the horizon.
SimulationOutput simulate(const ScmParams& params, std::uint64_t n,
                          std::uint64_t seed);

// The ground-truth map alone (as stored in SimulationOutput).
std::map<std::string, Rational> ground_truth_map(const ScmParams& params);

// Empirical conditional frequencies as mechanisms. The table's dimensions
// must be named after graph nodes and cover all of them; every parent
// configuration must be observed.
ScmParams fit_params_from_table(const ContingencyTable& table,
                                const CausalDag& graph);

// JSON rendering of a simulation's ground truth ({"seed": ...,
// "n_requested": ..., "n_after_selection": ..., "ground_truth": {...}}
// with exact "p/q" strings).
std::string truth_to_json(const SimulationOutput& output);

}  // namespace pct

#endif  // PCT_SIMULATOR_HPP
