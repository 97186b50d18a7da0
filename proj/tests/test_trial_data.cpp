#include <doctest.h>

#include <fstream>
#include <sstream>

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

const char* kSmallCsv =
    "patient_id,x_prescribed,x_received,outcome,event_time,completed,age\n"
    "p1,A,A,ok,,1,young\n"
    "p2,A,B,bad,3,1,old\n"
    "p3,B,B,,,0,young\n";

}  // namespace

TEST_CASE("per-patient CSV loads with inferred schema") {
  auto d = load_dataset_csv(kSmallCsv);
  CHECK(d.record_count() == 3);
  CHECK_FALSE(d.aggregate());
  CHECK(d.schema().arm_labels == std::vector<std::string>{"A", "B"});
  CHECK(d.schema().outcome_labels == std::vector<std::string>{"ok", "bad"});
  REQUIRE(d.schema().covariates.size() == 1);
  CHECK(d.schema().covariates[0].first == "age");
  CHECK(d.records()[1].event_time == 3);
  CHECK_FALSE(d.records()[2].completed);
  CHECK(is_missing(d.records()[2].outcome));
}

TEST_CASE("the table-1 fixture expands to 200 patients") {
  auto d = load_dataset_csv(read_fixture("mccoy_table1.csv"));
  CHECK(d.aggregate());
  CHECK(d.record_count() == 200);

  auto cube = tabulate(d, {"x_prescribed", "x_received", "outcome"});
  // Row-major over (A,B) x (A,B) x (no_death,death).
  std::vector<std::uint64_t> expected{70, 15, 0, 15, 0, 0, 70, 30};
  for (std::size_t flat = 0; flat < cube.cell_count(); ++flat) {
    CHECK(cube.at(cube.decode(flat)) == expected[flat]);
  }
  CHECK(cube.total() == 200);

  auto arms = tabulate(d, {"x_prescribed"});
  CHECK(arms.at({0}) == 100);
  CHECK(arms.at({1}) == 100);
}

TEST_CASE("empty body with a valid header loads zero records") {
  auto d = load_dataset_csv(
      "patient_id,x_prescribed,x_received,outcome,event_time,completed\n");
  CHECK(d.record_count() == 0);
  CHECK(tabulate(d, {}).total() == 0);
}

TEST_CASE("load errors name the offending line") {
  auto expect_error_line = [](const std::string& text, std::size_t line) {
    try {
      load_dataset_csv(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  // Undeclared arm against a declared schema.
  DatasetSchema schema;
  schema.arm_labels = {"A", "B"};
  schema.outcome_labels = {"ok", "bad"};
  try {
    load_dataset_csv(
        "patient_id,x_prescribed,x_received,outcome,event_time,completed\n"
        "p1,C,A,ok,,1\n",
        schema);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("'C'") != std::string::npos);
  }

  // Bad header.
  expect_error_line("patient,x\np1,A\n", 1);
  // Wrong field count.
  expect_error_line(
      "patient_id,x_prescribed,x_received,outcome,event_time,completed\n"
      "p1,A,A,ok,,1\n"
      "p2,A,A\n",
      3);
  // completed=1 with missing outcome.
  expect_error_line(
      "patient_id,x_prescribed,x_received,outcome,event_time,completed\n"
      "p1,A,A,,,1\n",
      2);
  // Duplicate patient id (detected after the rows parse).
  CHECK_THROWS_AS(load_dataset_csv(
                      "patient_id,x_prescribed,x_received,outcome,event_time,"
                      "completed\n"
                      "p1,A,A,ok,,1\np1,B,B,ok,,1\n"),
                  ParseError);
  // event_time without an outcome.
  expect_error_line(
      "patient_id,x_prescribed,x_received,outcome,event_time,completed\n"
      "p1,A,A,,4,0\n",
      2);
  // Zero aggregate count.
  expect_error_line(
      "x_prescribed,x_received,outcome,event_time,completed,count\n"
      "A,A,ok,,1,0\n",
      2);
}

TEST_CASE("complete_cases keeps completed records and is idempotent") {
  auto d = load_dataset_csv(kSmallCsv);
  auto cc = complete_cases(d);
  CHECK(cc.record_count() == 2);
  auto cc2 = complete_cases(cc);
  CHECK(cc2.record_count() == 2);
  CHECK(dataset_to_csv(cc) == dataset_to_csv(cc2));

  auto table1 = load_dataset_csv(read_fixture("mccoy_table1.csv"));
  CHECK(complete_cases(table1).record_count() == 200);  // nobody censored

  auto empty = load_dataset_csv(
      "patient_id,x_prescribed,x_received,outcome,event_time,completed\n");
  CHECK(complete_cases(empty).record_count() == 0);
}

TEST_CASE("tabulate validates its arguments") {
  auto d = load_dataset_csv(kSmallCsv);
  CHECK_THROWS_AS(tabulate(d, {"weight"}), ValidationError);
  // p3 has no outcome.
  CHECK_THROWS_AS(tabulate(d, {"outcome"}), ValidationError);
  CHECK_NOTHROW(tabulate(complete_cases(d), {"outcome"}));
  // x_received is fine here (all rows carry it).
  CHECK(tabulate(d, {"x_received"}).total() == 3);
}

TEST_CASE("tabulate with no variables counts records") {
  auto d = load_dataset_csv(read_fixture("mccoy_table1.csv"));
  auto t = tabulate(d, {});
  CHECK(t.cell_count() == 1);
  CHECK(t.total() == 200);
}

TEST_CASE("axis order permutes cells without changing the multiset") {
  auto d = load_dataset_csv(read_fixture("mccoy_table1.csv"));
  auto ab = tabulate(d, {"x_prescribed", "outcome"});
  auto ba = tabulate(d, {"outcome", "x_prescribed"});
  for (std::size_t i = 0; i < ab.dims()[0].second.size(); ++i) {
    for (std::size_t j = 0; j < ab.dims()[1].second.size(); ++j) {
      CHECK(ab.at({i, j}) == ba.at({j, i}));
    }
  }
}

TEST_CASE("marginalizing a two-way table matches the one-way table") {
  auto d = load_dataset_csv(read_fixture("mccoy_table1.csv"));
  auto two = tabulate(d, {"x_prescribed", "outcome"});
  auto one = tabulate(d, {"x_prescribed"});
  for (std::size_t i = 0; i < two.dims()[0].second.size(); ++i) {
    BigInt sum = 0;
    for (std::size_t j = 0; j < two.dims()[1].second.size(); ++j) {
      sum += two.at({i, j});
    }
    CHECK(sum == one.at({i}));
  }
}

TEST_CASE("count_matching marginalizes and rejects unknown names") {
  auto d = load_dataset_csv(read_fixture("mccoy_table1.csv"));
  auto cube = tabulate(d, {"x_prescribed", "x_received", "outcome"});
  CHECK(cube.count_matching({{"x_prescribed", "A"}}) == 100);
  CHECK(cube.count_matching({{"x_received", "A"}}) == 85);
  CHECK(cube.count_matching({{"x_received", "B"}, {"outcome", "death"}}) == 45);
  CHECK(cube.count_matching({}) == 200);
  CHECK_THROWS_AS(cube.count_matching({{"nope", "A"}}), ValidationError);
  CHECK_THROWS_AS(cube.count_matching({{"outcome", "nope"}}), ValidationError);
}

TEST_CASE("CSV writing round-trips a dataset") {
  auto d = load_dataset_csv(kSmallCsv);
  auto text = dataset_to_csv(d);
  auto again = load_dataset_csv(text);
  CHECK(dataset_to_csv(again) == text);
  CHECK(again.record_count() == d.record_count());
}

TEST_CASE("missing x_received on a completed row needs a declared level") {
  const char* text =
      "patient_id,x_prescribed,x_received,outcome,event_time,completed\n"
      "p1,A,,ok,,1\n";
  CHECK_THROWS_AS(load_dataset_csv(text), ParseError);

  DatasetSchema schema;
  schema.arm_labels = {"A", "B", ""};  // explicit missing level
  schema.outcome_labels = {"ok"};
  CHECK_NOTHROW(load_dataset_csv(text, schema));
}
