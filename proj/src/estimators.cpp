#include "pct/estimators.hpp"

#include <algorithm>
#include <map>

#include "pct/errors.hpp"

namespace pct {

const std::string& protocol_name(Protocol p) {
  static const std::string itt = "ITT", at = "AT", pp = "PP";
  switch (p) {
    case Protocol::ITT: return itt;
    case Protocol::AT: return at;
    case Protocol::PP: return pp;
  }
  throw ValidationError("unknown protocol");
}

std::string EffectEstimate::decimal(int places) const {
  return decimal_string(value, places);
}

namespace {

std::vector<std::pair<std::string, std::string>> conditioning(
    const ProtocolSpec& spec, const std::string& arm) {
  switch (spec.protocol) {
    case Protocol::ITT: return {{"x_prescribed", arm}};
    case Protocol::AT: return {{"x_received", arm}};
    case Protocol::PP:
      return {{"x_prescribed", arm}, {"x_received", arm}};
  }
  throw ValidationError("unknown protocol");
}

std::string describe(const std::vector<std::pair<std::string, std::string>>& conds) {
  std::string out;
  for (const auto& [variable, level] : conds) {
    if (!out.empty()) out += ", ";
    out += variable + "=" + level;
  }
  return out;
}

void check_spec(const ProtocolSpec& spec) {
  if (spec.treatment_level == spec.reference_level) {
    throw ValidationError("treatment and reference levels must differ");
  }
  if (spec.outcome_event.empty()) {
    throw ValidationError("outcome event label must be set");
  }
}

}  // namespace

EffectEstimate event_probability(const ContingencyTable& t,
                                 const ProtocolSpec& spec,
                                 const std::string& arm) {
  auto conds = conditioning(spec, arm);
  BigInt den = t.count_matching(conds);
  if (den == 0) {
    throw DegenerateStratumError("empty stratum: " + describe(conds));
  }
  auto with_event = conds;
  with_event.emplace_back("outcome", spec.outcome_event);
  BigInt num = t.count_matching(with_event);

  EffectEstimate e;
  e.value = Rational(num, den);
  e.kind = EstimateKind::Probability;
  e.estimand = Estimand::Conditional;
  e.protocol = spec;
  e.numerator_cells.push_back({with_event, num});
  e.denominator_cells.push_back({conds, den});
  return e;
}

EffectEstimate event_probability(const ContingencyTable& t,
                                 const ProtocolSpec& spec) {
  check_spec(spec);
  return event_probability(t, spec, spec.treatment_level);
}

namespace {

struct ArmPair {
  EffectEstimate treat;
  EffectEstimate ref;
  Rational p_treat;
  Rational p_ref;
};

ArmPair arm_probabilities(const ContingencyTable& t, const ProtocolSpec& spec,
                          const EstimatorOptions& options) {
  check_spec(spec);
  ArmPair pair{event_probability(t, spec, spec.treatment_level),
               event_probability(t, spec, spec.reference_level), 0, 0};
  pair.p_treat = pair.treat.value;
  pair.p_ref = pair.ref.value;
  if (options.paper_rounding) {
    pair.p_treat = round_rational(pair.p_treat, options.intermediate_places);
    pair.p_ref = round_rational(pair.p_ref, options.intermediate_places);
  }
  return pair;
}

}  // namespace

EffectEstimate risk_ratio(const ContingencyTable& t, const ProtocolSpec& spec,
                          const EstimatorOptions& options) {
  auto arms = arm_probabilities(t, spec, options);
  if (arms.p_ref == 0) {
    throw ZeroReferenceRiskError("reference arm '" + spec.reference_level +
                                 "' has zero event probability");
  }
  EffectEstimate e;
  e.value = arms.p_treat / arms.p_ref;
  e.kind = EstimateKind::RiskRatio;
  e.estimand = Estimand::Conditional;
  e.protocol = spec;
  e.numerator_cells = arms.treat.numerator_cells;
  e.denominator_cells = arms.ref.numerator_cells;
  e.parts = {arms.treat, arms.ref};
  if (options.paper_rounding) e.intermediate_rounding = options.intermediate_places;
  return e;
}

EffectEstimate odds_ratio(const ContingencyTable& t, const ProtocolSpec& spec,
                          const EstimatorOptions& options) {
  check_spec(spec);
  EffectEstimate e;
  e.kind = EstimateKind::OddsRatio;
  e.estimand = Estimand::Conditional;
  e.protocol = spec;

  if (options.haldane_correction) {
    // +1/2 to each cell of the 2x2 (event / non-event per arm).
    auto corrected_odds = [&](const std::string& arm) -> Rational {
      auto conds = conditioning(spec, arm);
      BigInt den = t.count_matching(conds);
      auto with_event = conds;
      with_event.emplace_back("outcome", spec.outcome_event);
      BigInt num = t.count_matching(with_event);
      Rational events = Rational(num) + Rational(1, 2);
      Rational non_events = Rational(den - num) + Rational(1, 2);
      EffectEstimate part;
      part.value = events / (events + non_events);
      part.kind = EstimateKind::Probability;
      part.protocol = spec;
      part.numerator_cells.push_back({with_event, num});
      part.denominator_cells.push_back({conds, den});
      e.parts.push_back(part);
      return events / non_events;
    };
    Rational odds_t = corrected_odds(spec.treatment_level);
    Rational odds_r = corrected_odds(spec.reference_level);
    e.value = odds_t / odds_r;
    e.numerator_cells = e.parts[0].numerator_cells;
    e.denominator_cells = e.parts[1].numerator_cells;
    return e;
  }

  auto arms = arm_probabilities(t, spec, options);
  for (const auto& [arm, p] :
       {std::pair{spec.treatment_level, arms.p_treat},
        std::pair{spec.reference_level, arms.p_ref}}) {
    if (p == 0 || p == 1) {
      throw UndefinedOddsError("arm '" + arm + "' has event probability " +
                               decimal_string(p, 0) +
                               "; odds ratio is undefined");
    }
  }
  e.value = (arms.p_treat / (1 - arms.p_treat)) /
            (arms.p_ref / (1 - arms.p_ref));
  e.numerator_cells = arms.treat.numerator_cells;
  e.denominator_cells = arms.ref.numerator_cells;
  e.parts = {arms.treat, arms.ref};
  if (options.paper_rounding) e.intermediate_rounding = options.intermediate_places;
  return e;
}

EffectEstimate hazard_ratio(const TrialDataset& d, const ProtocolSpec& spec,
                            std::int64_t time_horizon) {
  check_spec(spec);
  if (time_horizon < 0) throw ValidationError("time horizon must be >= 0");

  // Per-arm tallies keyed by observation time: (events, total leaving).
  struct Tally {
    std::map<std::int64_t, std::pair<BigInt, BigInt>> by_time;
    BigInt total = 0;
    BigInt events = 0;
  };
  Tally arm_a, arm_b;  // treatment, reference

  std::size_t row = 0;
  for (const auto& r : d.records()) {
    ++row;
    if (!r.completed || r.outcome.empty()) continue;

    std::string arm;
    switch (spec.protocol) {
      case Protocol::ITT: arm = r.x_prescribed; break;
      case Protocol::AT: arm = r.x_received; break;
      case Protocol::PP:
        if (r.x_received.empty() || r.x_prescribed != r.x_received) continue;
        arm = r.x_prescribed;
        break;
    }
    if (arm.empty()) continue;
    Tally* tally = nullptr;
    if (arm == spec.treatment_level) tally = &arm_a;
    else if (arm == spec.reference_level) tally = &arm_b;
    else continue;

    if (!r.event_time) {
      throw ValidationError("record " + std::to_string(row) +
                            " has an outcome but no event_time; cannot "
                            "compute hazards");
    }
    std::int64_t time = *r.event_time;
    bool event = r.outcome == spec.outcome_event;
    if (time > time_horizon) {
      time = time_horizon;  // administrative censoring at the horizon
      event = false;
    }
    auto& cell = tally->by_time[time];
    if (event) {
      cell.first += r.count;
      tally->events += r.count;
    }
    cell.second += r.count;
    tally->total += r.count;
  }

  for (const auto& [tally, label] :
       {std::pair{&arm_a, spec.treatment_level},
        std::pair{&arm_b, spec.reference_level}}) {
    if (tally->events == 0) {
      throw NoEventsError("arm '" + label + "' has no events by t=" +
                          std::to_string(time_horizon));
    }
  }

  // Walk distinct times in order, maintaining at-risk counts (everyone
  // still under observation at t, events at t included).
  std::vector<std::int64_t> times;
  for (const auto& [t, cell] : arm_a.by_time) { (void)cell; times.push_back(t); }
  for (const auto& [t, cell] : arm_b.by_time) { (void)cell; times.push_back(t); }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  EffectEstimate e;
  e.kind = EstimateKind::HazardRatio;
  e.estimand = Estimand::Conditional;
  e.protocol = spec;

  BigInt n_a = arm_a.total, n_b = arm_b.total;
  Rational num = 0, den = 0;
  for (std::int64_t t : times) {
    BigInt d_a = 0, leave_a = 0, d_b = 0, leave_b = 0;
    if (auto it = arm_a.by_time.find(t); it != arm_a.by_time.end()) {
      d_a = it->second.first;
      leave_a = it->second.second;
    }
    if (auto it = arm_b.by_time.find(t); it != arm_b.by_time.end()) {
      d_b = it->second.first;
      leave_b = it->second.second;
    }
    BigInt n_total = n_a + n_b;
    if (d_a + d_b > 0) {
      num += Rational(d_a * n_b, n_total);
      den += Rational(d_b * n_a, n_total);
      auto coords = [&](const std::string& arm) {
        return std::vector<std::pair<std::string, std::string>>{
            {"arm", arm}, {"t", std::to_string(t)}};
      };
      e.numerator_cells.push_back({coords(spec.treatment_level), d_a});
      e.numerator_cells.push_back({coords(spec.reference_level), d_b});
      e.denominator_cells.push_back({coords(spec.treatment_level), n_a});
      e.denominator_cells.push_back({coords(spec.reference_level), n_b});
    }
    n_a -= leave_a;
    n_b -= leave_b;
  }
  if (den == 0) {
    // Events in the reference arm only ever coincide with an empty
    // treatment risk set (or vice versa); no comparable periods remain.
    throw NoEventsError("no overlapping risk sets with events");
  }
  e.value = num / den;
  return e;
}

}  // namespace pct
