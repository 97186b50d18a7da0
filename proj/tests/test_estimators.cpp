#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "pct/estimators.hpp"
#include "pct/trial_data.hpp"

using namespace pct;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(PCT_FIXTURES_DIR) + "/" + name,
                   std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TrialDataset table1() {
  return load_dataset_csv(read_fixture("mccoy_table1.csv"));
}

ContingencyTable cube(const TrialDataset& d) {
  return tabulate(d, {"x_prescribed", "x_received", "outcome"});
}

ProtocolSpec spec_for(Protocol p) {
  return {p, "A", "B", "death"};
}

// A table with arbitrary counts over (x_prescribed, x_received, outcome),
// for property tests.
ContingencyTable random_table(std::mt19937& rng, bool positive = false) {
  ContingencyTable t({{"x_prescribed", {"A", "B"}},
                      {"x_received", {"A", "B"}},
                      {"outcome", {"no_death", "death"}}});
  std::uniform_int_distribution<int> count(positive ? 1 : 0, 40);
  for (std::size_t flat = 0; flat < t.cell_count(); ++flat) {
    t.at(t.decode(flat)) = count(rng);
  }
  return t;
}

}  // namespace

TEST_CASE("event probabilities reproduce the worked example") {
  auto t = cube(table1());
  CHECK(event_probability(t, spec_for(Protocol::ITT)).value == Rational(30, 100));
  CHECK(event_probability(t, spec_for(Protocol::AT)).value == Rational(15, 85));
  CHECK(event_probability(t, spec_for(Protocol::PP)).value == Rational(15, 85));
  CHECK(event_probability(t, spec_for(Protocol::ITT), "B").value ==
        Rational(30, 100));
  CHECK(event_probability(t, spec_for(Protocol::AT), "B").value ==
        Rational(45, 115));
  CHECK(event_probability(t, spec_for(Protocol::PP), "B").value ==
        Rational(30, 100));
  CHECK(event_probability(t, spec_for(Protocol::AT)).decimal(2) == "0.18");
}

TEST_CASE("estimates record the cells they came from") {
  auto t = cube(table1());
  auto e = event_probability(t, spec_for(Protocol::AT));
  REQUIRE(e.numerator_cells.size() == 1);
  REQUIRE(e.denominator_cells.size() == 1);
  CHECK(e.numerator_cells[0].count == 15);
  CHECK(e.denominator_cells[0].count == 85);
  CHECK(e.value == Rational(e.numerator_cells[0].count,
                            e.denominator_cells[0].count));
  CHECK(e.estimand == Estimand::Conditional);
  REQUIRE(e.protocol.has_value());
  CHECK(e.protocol->protocol == Protocol::AT);
}

TEST_CASE("risk ratios, exact and with published-table rounding") {
  auto t = cube(table1());
  CHECK(risk_ratio(t, spec_for(Protocol::ITT)).value == 1);
  CHECK(risk_ratio(t, spec_for(Protocol::AT)).value ==
        Rational(15, 85) / Rational(45, 115));
  CHECK(risk_ratio(t, spec_for(Protocol::AT)).value == Rational(23, 51));
  CHECK(risk_ratio(t, spec_for(Protocol::PP)).value == Rational(10, 17));
  CHECK(risk_ratio(t, spec_for(Protocol::AT)).decimal(2) == "0.45");
  CHECK(risk_ratio(t, spec_for(Protocol::PP)).decimal(2) == "0.59");

  EstimatorOptions paper;
  paper.paper_rounding = true;
  CHECK(risk_ratio(t, spec_for(Protocol::ITT), paper).decimal(2) == "1.00");
  CHECK(risk_ratio(t, spec_for(Protocol::AT), paper).value ==
        Rational(18, 100) / Rational(39, 100));
  CHECK(risk_ratio(t, spec_for(Protocol::AT), paper).decimal(2) == "0.46");
  CHECK(risk_ratio(t, spec_for(Protocol::PP), paper).decimal(2) == "0.60");
}

TEST_CASE("odds ratios, exact and with published-table rounding") {
  auto t = cube(table1());
  CHECK(odds_ratio(t, spec_for(Protocol::ITT)).value == 1);
  CHECK(odds_ratio(t, spec_for(Protocol::AT)).value == Rational(1, 3));
  CHECK(odds_ratio(t, spec_for(Protocol::PP)).value == Rational(1, 2));
  CHECK(odds_ratio(t, spec_for(Protocol::AT)).decimal(2) == "0.33");
  CHECK(odds_ratio(t, spec_for(Protocol::PP)).decimal(2) == "0.50");

  EstimatorOptions paper;
  paper.paper_rounding = true;
  CHECK(odds_ratio(t, spec_for(Protocol::ITT), paper).decimal(2) == "1.00");
  CHECK(odds_ratio(t, spec_for(Protocol::AT), paper).decimal(2) == "0.34");
  CHECK(odds_ratio(t, spec_for(Protocol::PP), paper).decimal(2) == "0.51");
}

TEST_CASE("degenerate strata and undefined ratios are refusals") {
  ContingencyTable t({{"x_prescribed", {"A", "B"}},
                      {"x_received", {"A", "B"}},
                      {"outcome", {"no_death", "death"}}});
  t.at({0, 0, 1}) = 10;  // only arm A events
  CHECK_THROWS_AS(event_probability(t, spec_for(Protocol::ITT), "B"),
                  DegenerateStratumError);
  CHECK_THROWS_AS(risk_ratio(t, spec_for(Protocol::ITT)),
                  DegenerateStratumError);

  t.at({1, 1, 0}) = 10;  // arm B present, all non-events
  CHECK_THROWS_AS(risk_ratio(t, spec_for(Protocol::ITT)),
                  ZeroReferenceRiskError);
  CHECK_THROWS_AS(odds_ratio(t, spec_for(Protocol::ITT)), UndefinedOddsError);

  // Haldane correction makes the odds ratio finite again.
  EstimatorOptions haldane;
  haldane.haldane_correction = true;
  // odds_A = 10.5/0.5 = 21, odds_B = 0.5/10.5 = 1/21.
  auto corrected = odds_ratio(t, spec_for(Protocol::ITT), haldane);
  CHECK(corrected.value == 441);
}

TEST_CASE("scale invariance: multiplying all counts changes nothing") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    auto t = random_table(rng, true);
    for (BigInt k : {BigInt(2), BigInt(10), BigInt(1000)}) {
      ContingencyTable scaled(t.dims());
      for (std::size_t flat = 0; flat < t.cell_count(); ++flat) {
        scaled.at(t.decode(flat)) = t.at(t.decode(flat)) * k;
      }
      for (auto protocol : {Protocol::ITT, Protocol::AT, Protocol::PP}) {
        auto spec = spec_for(protocol);
        spec.outcome_event = "death";
        CHECK(event_probability(t, spec).value ==
              event_probability(scaled, spec).value);
        CHECK(risk_ratio(t, spec).value == risk_ratio(scaled, spec).value);
        CHECK(odds_ratio(t, spec).value == odds_ratio(scaled, spec).value);
      }
    }
  }
}

TEST_CASE("swapping arms inverts both ratios exactly") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = random_table(rng, true);
    auto spec = spec_for(Protocol::AT);
    auto swapped = spec;
    std::swap(swapped.treatment_level, swapped.reference_level);
    CHECK(risk_ratio(t, spec).value * risk_ratio(t, swapped).value == 1);
    CHECK(odds_ratio(t, spec).value * odds_ratio(t, swapped).value == 1);
  }
}

TEST_CASE("odds ratios are at least as extreme as risk ratios") {
  std::mt19937 rng(777);
  int informative = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto t = random_table(rng, true);
    auto spec = spec_for(Protocol::ITT);
    auto rr = risk_ratio(t, spec).value;
    auto orr = odds_ratio(t, spec).value;
    auto pa = event_probability(t, spec, "A").value;
    auto pb = event_probability(t, spec, "B").value;
    if (pa == pb) {
      CHECK(rr == 1);
      CHECK(orr == 1);
    } else {
      // |log OR| >= |log RR|: with both probabilities in (0,1), OR and RR
      // sit on the same side of 1 and OR is farther out.
      ++informative;
      if (rr > 1) {
        CHECK(orr >= rr);
      } else {
        CHECK(orr <= rr);
      }
    }
  }
  CHECK(informative > 30);
}

TEST_CASE("the bracketed ratio definition reduces to the probability ratio") {
  // Written as published: each arm's bracket is
  //   P(no|arm) over [P(no|arm) + P(death|arm)]
  // whose denominator is 1, so the ratio collapses to P(no|a)/P(no|b).
  std::mt19937 rng(31415);
  for (int trial = 0; trial < 60; ++trial) {
    auto t = random_table(rng, true);
    for (auto protocol : {Protocol::ITT, Protocol::AT, Protocol::PP}) {
      // Treat "no_death" as the event to mirror the published orientation.
      ProtocolSpec spec{protocol, "A", "B", "no_death"};
      auto p_no_a = event_probability(t, spec, "A").value;
      auto p_no_b = event_probability(t, spec, "B").value;
      ProtocolSpec death{protocol, "A", "B", "death"};
      auto p_death_a = event_probability(t, death, "A").value;
      auto p_death_b = event_probability(t, death, "B").value;
      Rational literal = (p_no_a / (p_no_a + p_death_a)) /
                         (p_no_b / (p_no_b + p_death_b));
      CHECK(literal == risk_ratio(t, spec).value);
      CHECK(p_no_a + p_death_a == 1);
      CHECK(p_no_b + p_death_b == 1);
    }
  }
}

TEST_CASE("identical event-time multisets give a hazard ratio of one") {
  auto d = table1();
  ProtocolSpec spec{Protocol::ITT, "A", "B", "death"};
  auto hr = hazard_ratio(d, spec, 52);
  CHECK(hr.value == 1);
  CHECK(hr.kind == EstimateKind::HazardRatio);
}

TEST_CASE("hazard ratio input validation") {
  ProtocolSpec spec{Protocol::ITT, "A", "B", "bad"};

  DatasetSchema schema;
  schema.arm_labels = {"A", "B"};
  schema.outcome_labels = {"ok", "bad"};
  std::vector<TrialRecord> records;
  auto add = [&](const std::string& id, const std::string& arm,
                 const std::string& outcome, std::int64_t t) {
    TrialRecord r;
    r.patient_id = id;
    r.x_prescribed = arm;
    r.x_received = arm;
    r.outcome = outcome;
    r.event_time = t;
    records.push_back(r);
  };
  add("p1", "A", "bad", 2);
  add("p2", "A", "ok", 10);
  add("p3", "B", "ok", 10);
  add("p4", "B", "ok", 10);
  auto no_b_events = TrialDataset::create(schema, records, false);
  CHECK_THROWS_AS(hazard_ratio(no_b_events, spec, 10), NoEventsError);

  add("p5", "B", "bad", 4);
  auto ok = TrialDataset::create(schema, records, false);
  CHECK(hazard_ratio(ok, spec, 10).value > 0);

  // A record with an outcome but no time is unusable for hazards.
  TrialRecord r;
  r.patient_id = "p6";
  r.x_prescribed = "A";
  r.x_received = "A";
  r.outcome = "ok";
  records.push_back(r);
  auto missing_time = TrialDataset::create(schema, records, false);
  CHECK_THROWS_AS(hazard_ratio(missing_time, spec, 10), ValidationError);

  // Events beyond the horizon are administratively censored, so arm B
  // loses its only event under a short horizon.
  CHECK_THROWS_AS(hazard_ratio(ok, spec, 3), NoEventsError);
}

TEST_CASE("equal hazards in both arms give a ratio near one") {
  // Both arms share a constant per-period hazard of 3/20; the
  // Mantel-Haenszel log ratio should sit within 3 standard errors of 0,
  // with SE approximated by sqrt(1/events_a + 1/events_b).
  std::mt19937 rng(2718);
  std::bernoulli_distribution arm_coin(0.5);
  std::bernoulli_distribution event_coin(0.15);
  const std::int64_t horizon = 30;

  DatasetSchema schema;
  schema.arm_labels = {"A", "B"};
  schema.outcome_labels = {"none", "event"};
  std::vector<TrialRecord> records;
  double events_a = 0, events_b = 0;
  for (int i = 0; i < 40000; ++i) {
    TrialRecord r;
    r.patient_id = "p" + std::to_string(i + 1);
    r.x_prescribed = arm_coin(rng) ? "A" : "B";
    r.x_received = r.x_prescribed;
    std::int64_t t = 0;
    bool event = false;
    while (t < horizon) {
      ++t;
      if (event_coin(rng)) {
        event = true;
        break;
      }
    }
    r.outcome = event ? "event" : "none";
    r.event_time = event ? t : horizon;
    (event && r.x_prescribed == "A" ? events_a : events_b) += 1;
    records.push_back(std::move(r));
  }
  auto d = TrialDataset::create(schema, std::move(records), false);
  auto hr = hazard_ratio(d, {Protocol::ITT, "A", "B", "event"}, horizon);
  double log_hr = std::log(to_double(hr.value));
  double se = std::sqrt(1.0 / events_a + 1.0 / events_b);
  CHECK(std::abs(log_hr) < 3.0 * se);
}

TEST_CASE("hazard ratio is reproducible from its recorded cells") {
  auto d = table1();
  ProtocolSpec spec{Protocol::AT, "A", "B", "death"};
  auto hr = hazard_ratio(d, spec, 52);

  // Rebuild the Mantel-Haenszel sums from the per-period cells.
  std::map<std::int64_t, std::map<std::string, std::pair<BigInt, BigInt>>> rows;
  for (std::size_t i = 0; i < hr.numerator_cells.size(); ++i) {
    const auto& events = hr.numerator_cells[i];
    const auto& at_risk = hr.denominator_cells[i];
    REQUIRE(events.coords[0].first == "arm");
    std::int64_t t = std::stoll(events.coords[1].second);
    rows[t][events.coords[0].second] = {events.count, at_risk.count};
  }
  Rational num = 0, den = 0;
  for (const auto& [t, arms] : rows) {
    (void)t;
    const auto& [d_a, n_a] = arms.at("A");
    const auto& [d_b, n_b] = arms.at("B");
    num += Rational(d_a * n_b, n_a + n_b);
    den += Rational(d_b * n_a, n_a + n_b);
  }
  CHECK(hr.value == num / den);
}
