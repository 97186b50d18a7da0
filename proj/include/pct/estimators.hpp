#ifndef PCT_ESTIMATORS_HPP
#define PCT_ESTIMATORS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pct/rational.hpp"
#include "pct/trial_data.hpp"

namespace pct {

// Analysis protocols: by prescribed arm, by received arm, or restricted
// to records whose prescribed and received arms match.
enum class Protocol { ITT, AT, PP };

enum class Estimand { Conditional, Interventional };

enum class EstimateKind { Probability, RiskRatio, OddsRatio, HazardRatio };

const std::string& protocol_name(Protocol p);

struct ProtocolSpec {
  Protocol protocol;
  std::string treatment_level;
  std::string reference_level;
  std::string outcome_event;
};

// A table cell that contributed to an estimate.
struct CountedCell {
  std::vector<std::pair<std::string, std::string>> coords;
  BigInt count;
};

// An estimate together with the exact cells it was computed from. For
// ratios, `parts` holds the per-arm component estimates.
struct EffectEstimate {
  Rational value;
  EstimateKind kind = EstimateKind::Probability;
  Estimand estimand = Estimand::Conditional;
  std::optional<ProtocolSpec> protocol;
  std::vector<CountedCell> numerator_cells;
  std::vector<CountedCell> denominator_cells;
  std::vector<EffectEstimate> parts;
  // Set when intermediate probabilities were rounded to this many decimal
  // places before forming a ratio (the published-table convention).
  std::optional<int> intermediate_rounding;

  std::string decimal(int places = 2) const;
};

struct EstimatorOptions {
  // Round each arm's event probability to `intermediate_places` decimals
  // before dividing, reproducing hand-computed published tables.
  bool paper_rounding = false;
  int intermediate_places = 2;
  // Haldane-Anscombe +1/2 continuity correction (odds ratio only).
  bool haldane_correction = false;
};

// P(outcome = event | arm), conditioning per protocol: ITT on
// x_prescribed, AT on x_received, PP on both matching. The table must
// carry the conditioning dimensions and `outcome`; extra dimensions are
// marginalized. Exact rational arithmetic throughout.
EffectEstimate event_probability(const ContingencyTable& t,
                                 const ProtocolSpec& spec);
// Same, for an explicit arm level (the one-argument form uses
// spec.treatment_level).
EffectEstimate event_probability(const ContingencyTable& t,
                                 const ProtocolSpec& spec,
                                 const std::string& arm);

EffectEstimate risk_ratio(const ContingencyTable& t, const ProtocolSpec& spec,
                          const EstimatorOptions& options = {});

EffectEstimate odds_ratio(const ContingencyTable& t, const ProtocolSpec& spec,
                          const EstimatorOptions& options = {});

// Discrete-time Mantel-Haenszel hazard ratio over periods 0..time_horizon:
//   sum_t d_a(t) n_b(t) / N(t)  over  sum_t d_b(t) n_a(t) / N(t)
// with d = events and n = at-risk counts per period. Records whose
// outcome is not the event are treated as censored at their event_time;
// times beyond the horizon are administratively censored at the horizon.
// Requires complete records with event times and at least one event per
// arm. Consistent for the common ratio under proportional hazards.
EffectEstimate hazard_ratio(const TrialDataset& d, const ProtocolSpec& spec,
                            std::int64_t time_horizon);

}  // namespace pct

#endif  // PCT_ESTIMATORS_HPP
