#include <doctest.h>

#include <random>

#include "pct/graph.hpp"
#include "support/oracles.hpp"

using namespace pct;
using namespace pct_tests;

namespace {

CausalDag two_node(const std::string& a, const std::string& b,
                   std::vector<Edge> edges) {
  return CausalDag::create(
      {{a, NodeRole::Covariate}, {b, NodeRole::Covariate}}, std::move(edges));
}

}  // namespace

TEST_CASE("construction validates structure") {
  CHECK_NOTHROW(two_node("A", "B", {{"A", "B"}}));
  CHECK_THROWS_AS(two_node("A", "B", {{"A", "B"}, {"B", "A"}}), ValidationError);
  CHECK_THROWS_AS(two_node("A", "B", {{"A", "A"}}), ValidationError);
  CHECK_THROWS_AS(two_node("A", "B", {{"A", "B"}, {"A", "B"}}), ValidationError);
  CHECK_THROWS_AS(two_node("A", "B", {{"A", "C"}}), ValidationError);
  CHECK_THROWS_AS(CausalDag::create({{"A", NodeRole::Covariate},
                                     {"A", NodeRole::Outcome}},
                                    {}),
                  ValidationError);
  CHECK_THROWS_AS(CausalDag::create({{"", NodeRole::Covariate}}, {}),
                  ValidationError);
}

TEST_CASE("cycle errors name a cycle") {
  try {
    CausalDag::create({{"X", NodeRole::Covariate},
                       {"X'", NodeRole::Covariate}},
                      {{"X", "X'"}, {"X'", "X"}});
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    std::string what = e.what();
    CHECK(what.find("cycle") != std::string::npos);
    CHECK(what.find("X'") != std::string::npos);
  }
}

TEST_CASE("is_acyclic on raw node/edge lists") {
  std::vector<NodeSpec> ab = {{"A", NodeRole::Covariate},
                              {"B", NodeRole::Covariate}};
  CHECK(is_acyclic(ab, {{"A", "B"}}));
  CHECK_FALSE(is_acyclic(ab, {{"A", "B"}, {"B", "A"}}));
  CHECK(is_acyclic({}, {}));  // empty graph is vacuously acyclic
  CHECK(build_pct_template(false, false).is_acyclic());
}

TEST_CASE("template has the canonical shape") {
  auto g = build_pct_template(false, false);
  CHECK(g.node_count() == 5);
  CHECK(g.edge_count() == 5);
  CHECK(g.has_edge("X", "X'"));
  CHECK(g.has_edge("X'", "Y"));
  CHECK(g.has_edge("Z'", "X'"));
  CHECK(g.has_edge("Z'", "Y"));
  CHECK(g.has_edge("Z", "Y"));
  CHECK(g.parents("X").empty());              // randomization
  CHECK_FALSE(g.has_edge("Z", "X'"));
  CHECK(pct_role_issues(g).empty());

  auto with_s = build_pct_template(true, false);
  CHECK(with_s.node_count() == 6);
  CHECK(with_s.has_edge("Z", "S"));
  CHECK(with_s.role("S") == NodeRole::Selection);

  auto with_c = build_pct_template(false, true);
  CHECK(with_c.node_count() == 6);
  CHECK(with_c.has_edge("X'", "C"));
  CHECK(with_c.has_edge("Z'", "C"));
  CHECK(with_c.role("C") == NodeRole::Censoring);

  auto full = build_pct_template(true, true);
  CHECK(full.node_count() == 7);
  CHECK(pct_role_issues(full).empty());
}

TEST_CASE("d-separation on the template") {
  auto g = build_pct_template(false, false);
  // X and Z' meet only at the collider X'.
  CHECK(d_separated(g, {"X"}, {"Z'"}, {}));
  CHECK_FALSE(d_separated(g, {"X"}, {"Z'"}, {"X'"}));
  CHECK_FALSE(d_separated(g, {"X"}, {"Y"}, {}));  // directed path
  // Conditioning on Y (a descendant of the collider's child) also opens it.
  CHECK_FALSE(d_separated(g, {"X"}, {"Z'"}, {"Y"}));
  CHECK(d_separated(g, {"Z"}, {"X"}, {}));
}

TEST_CASE("complete-case filtering is a collider hazard in the template") {
  auto g = build_pct_template(false, true);
  // X is marginally independent of Z'; conditioning on C (a descendant of
  // the collider X') opens the X -> X' <- Z' path.
  CHECK(d_separated(g, {"X"}, {"Z'"}, {}));
  CHECK_FALSE(d_separated(g, {"X"}, {"Z'"}, {"C"}));
}

TEST_CASE("d-separation rejects bad arguments") {
  auto g = build_pct_template(false, false);
  CHECK_THROWS_AS(d_separated(g, {"Q"}, {"Y"}, {}), ValidationError);
  CHECK_THROWS_AS(d_separated(g, {"X"}, {"X"}, {}), ValidationError);
  CHECK_THROWS_AS(d_separated(g, {"X"}, {"Y"}, {"X"}), ValidationError);
}

TEST_CASE("d-separation agrees with the path-enumeration oracle") {
  std::mt19937 rng(20240817);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    int n = 3 + static_cast<int>(rng() % 6);  // up to 8 nodes
    auto g = random_dag(rng, n, 0.35);
    auto names = g.topological_order();
    for (int rep = 0; rep < 12; ++rep) {
      std::vector<std::string> shuffled = names;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::set<std::string> a{shuffled[0]};
      std::set<std::string> b{shuffled[1]};
      std::set<std::string> given;
      for (std::size_t i = 2; i < shuffled.size(); ++i) {
        if (rng() % 3 == 0) given.insert(shuffled[i]);
      }
      bool expected = d_separated_oracle(g, a, b, given);
      CHECK_MESSAGE(d_separated(g, a, b, given) == expected,
                    "disagreement on a random graph");
      ++checked;
    }
  }
  CHECK(checked == 720);
}

TEST_CASE("d-separation is symmetric in its two sets") {
  std::mt19937 rng(7171);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 4 + static_cast<int>(rng() % 5);
    auto g = random_dag(rng, n, 0.4);
    auto names = g.topological_order();
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<std::string> shuffled = names;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::set<std::string> a{shuffled[0]};
      std::set<std::string> b{shuffled[1]};
      if (shuffled.size() > 4 && rng() % 2) {
        a.insert(shuffled[2]);
        b.insert(shuffled[3]);
      }
      std::set<std::string> given;
      for (std::size_t i = 4; i < shuffled.size(); ++i) {
        if (rng() % 3 == 0) given.insert(shuffled[i]);
      }
      CHECK(d_separated(g, a, b, given) == d_separated(g, b, a, given));
    }
  }
}

TEST_CASE("backdoor admissibility on the template") {
  auto g = build_pct_template(false, false);
  CHECK(is_backdoor_admissible(g, "X'", "Y", {"Z'"}));
  CHECK_FALSE(is_backdoor_admissible(g, "X'", "Y", {}));
  CHECK(is_backdoor_admissible(g, "X", "Y", {}));  // X parentless
  // Descendants of the treatment are never admissible.
  CHECK_FALSE(is_backdoor_admissible(g, "X", "Y", {"X'"}));
  // Joint intervention on X and X'.
  CHECK(is_backdoor_admissible(g, std::vector<std::string>{"X", "X'"}, "Y",
                               {"Z'"}));
  CHECK_FALSE(is_backdoor_admissible(g, std::vector<std::string>{"X", "X'"},
                                     "Y", {}));
  CHECK_THROWS_AS(is_backdoor_admissible(g, "X", "X", {}), ValidationError);
  CHECK_THROWS_AS(is_backdoor_admissible(g, "Q", "Y", {}), ValidationError);
}

TEST_CASE("dropping the confounding edge makes the empty set admissible") {
  // Template minus Z'->Y: no open backdoor remains, with or without Z'.
  auto g = CausalDag::create({{"X", NodeRole::TreatmentPrescribed},
                              {"X'", NodeRole::TreatmentReceived},
                              {"Y", NodeRole::Outcome},
                              {"Z", NodeRole::Covariate},
                              {"Z'", NodeRole::AdherenceCovariate}},
                             {{"X", "X'"}, {"X'", "Y"}, {"Z'", "X'"},
                              {"Z", "Y"}});
  CHECK(is_backdoor_admissible(g, "X'", "Y", {"Z'"}));
  CHECK(is_backdoor_admissible(g, "X'", "Y", {}));
}

TEST_CASE("backdoor admissibility agrees with the enumeration oracle") {
  std::mt19937 rng(555);
  int agreements = 0;
  for (int trial = 0; trial < 80; ++trial) {
    int n = 4 + static_cast<int>(rng() % 4);
    auto g = random_dag(rng, n, 0.4);
    auto names = g.topological_order();
    std::shuffle(names.begin(), names.end(), rng);
    const std::string& treatment = names[0];
    const std::string& outcome = names[1];
    std::set<std::string> adjust;
    for (std::size_t i = 2; i < names.size(); ++i) {
      if (rng() % 2 == 0) adjust.insert(names[i]);
    }
    bool expected = backdoor_admissible_oracle(g, treatment, outcome, adjust);
    CHECK(is_backdoor_admissible(g, treatment, outcome, adjust) == expected);
    ++agreements;
  }
  CHECK(agreements == 80);
}

TEST_CASE("find_open_backdoor_path returns a usable witness") {
  auto g = build_pct_template(false, false);
  auto path = find_open_backdoor_path(g, "X'", "Y", {});
  REQUIRE(path.size() == 3);
  CHECK(path[0] == "X'");
  CHECK(path[1] == "Z'");
  CHECK(path[2] == "Y");
  CHECK(find_open_backdoor_path(g, "X'", "Y", {"Z'"}).empty());
  CHECK(find_open_backdoor_path(g, "X", "Y", {}).empty());
}

TEST_CASE("graph JSON round trip and strictness") {
  auto g = build_pct_template(true, true);
  auto text = graph_to_json(g);
  auto back = load_graph_json(text);
  CHECK(back.node_count() == g.node_count());
  CHECK(back.edges() == g.edges());
  CHECK(back.role("S") == NodeRole::Selection);

  CHECK_THROWS_AS(load_graph_json("{"), ParseError);
  CHECK_THROWS_AS(load_graph_json(R"({"nodes": [], "edges": [], "extra": 1})"),
                  ParseError);
  CHECK_THROWS_AS(
      load_graph_json(R"({"nodes": [{"name": "A", "role": "covariate",
                         "weight": 2}], "edges": []})"),
      ParseError);
  CHECK_THROWS_AS(
      load_graph_json(R"({"nodes": [{"name": "A", "role": "boss"}],
                          "edges": []})"),
      ParseError);
  CHECK_THROWS_AS(load_graph_json(R"({"nodes": [], "edges": [["A"]]})"),
                  ParseError);

  // Parse errors carry a line/column.
  try {
    load_graph_json("{\n  \"nodes\": [,]\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("node names are case-sensitive exact strings") {
  auto g = build_pct_template(false, false);
  CHECK(g.has_node("X"));
  CHECK_FALSE(g.has_node("x"));
  CHECK_FALSE(g.has_node("X "));
}
