#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "liqdem/io.hpp"

#include "support/oracles.hpp"
#include "support/topologies.hpp"

using namespace liqdem;
using Catch::Matchers::WithinAbs;

namespace {
const std::string fixture_dir = LIQDEM_FIXTURE_DIR;

graph_document parse_fixture(const std::string& name) {
  return load_graph_file(fixture_dir + "/" + name);
}

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const error& e) {
    return e.code();
  }
  return "";
}
}  // namespace

TEST_CASE("minimal document parses") {
  const graph_document doc = parse_graph(R"({
    "agents": ["a", "b"],
    "delegations": [{"from": "a", "to": "b"}]
  })");
  CHECK(doc.agents == std::vector<std::string>{"a", "b"});
  REQUIRE(doc.delegations.size() == 1);
  CHECK(doc.delegations[0].scope == delegation_scope::global());
  CHECK_FALSE(doc.default_probability.has_value());
}

TEST_CASE("documents are validated with machine-readable codes") {
  CHECK(code_of([] { parse_graph(R"({"agents": ["a", "a"]})"); }) == "duplicate-agent");
  CHECK(code_of([] {
          parse_graph(R"({"agents": ["a"], "delegations": [{"from": "a", "to": "x"}]})");
        }) == "unknown-agent");
  CHECK(code_of([] {
          parse_graph(R"({"agents": ["a", "b"], "delegations": [{"from": "a", "to": "a"}]})");
        }) == "self-delegation");
  CHECK(code_of([] {
          parse_graph(R"({
            "agents": ["a", "b", "c"],
            "areas": {"i": "A"},
            "delegations": [
              {"from": "a", "to": "b", "scope": {"issue": "i"}},
              {"from": "a", "to": "c", "scope": {"issue": "i"}}
            ]})");
        }) == "duplicate-scope");
  CHECK(code_of([] {
          parse_graph(R"({
            "agents": ["a", "b"],
            "delegations": [{"from": "a", "to": "b", "scope": {"issue": "i"}}]})");
        }) == "unknown-issue");
  CHECK(code_of([] {
          parse_graph(R"({"agents": ["a"], "probabilities": {"a": 1.5}})");
        }) == "probability-out-of-range");
  CHECK(code_of([] { parse_graph(R"({"agents": ["a"], "default_probability": -0.25})"); }) ==
        "probability-out-of-range");
  CHECK(code_of([] { parse_graph(R"({"agents": ["a"], "turnout": 1})"); }) == "bad-schema");
  CHECK(code_of([] {
          parse_graph(R"({"agents": ["a", "b"],
                          "delegations": [{"from": "a", "to": "b", "scope": "everything"}]})");
        }) == "bad-scope");
}

TEST_CASE("json syntax errors carry a position") {
  try {
    parse_graph("{\n  \"agents\": [\"a\",\n}");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.code() == "parse-error");
    CHECK(e.line() == 3);
  }
}

TEST_CASE("parse-serialize-parse is the identity") {
  const graph_document fixtures[] = {
      parse_fixture("figure1.json"),   parse_fixture("figure2.json"),
      parse_fixture("figure3.json"),   parse_fixture("single_agent.json"),
      parse_fixture("overlay_demo.json"), parse_fixture("star6.json"),
  };
  for (const graph_document& doc : fixtures) {
    CHECK(parse_graph(serialize_graph(doc)) == doc);
  }

  std::mt19937_64 rng(0x10f001);
  for (int round = 0; round < 50; ++round) {
    graph_document doc;
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) doc.agents.push_back("ag" + std::to_string(i));
    doc.areas = {{"i1", "A"}, {"i2", "B"}};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (rng() % 2) continue;
      const std::size_t scope_pick = rng() % 3;
      delegation_scope scope = scope_pick == 0   ? delegation_scope::global()
                               : scope_pick == 1 ? delegation_scope::for_area("A")
                                                 : delegation_scope::for_issue("i2");
      doc.delegations.push_back({doc.agents[i], doc.agents[i + 1], scope});
    }
    if (rng() % 2) doc.default_probability = 0.5;
    if (rng() % 2) doc.probabilities["ag0"] = 0.125;
    CHECK(parse_graph(serialize_graph(doc)) == doc);
  }
}

TEST_CASE("edge lists parse with comments and agent declarations") {
  const graph_document doc = parse_edge_list(
      "# a small chain\n"
      "x, y\n"
      "y,z # trailing comment\n"
      "\n"
      "loner\n");
  CHECK(doc.agents == std::vector<std::string>{"x", "y", "z", "loner"});
  REQUIRE(doc.delegations.size() == 2);
  CHECK(doc.delegations[1] == document_delegation{"y", "z", delegation_scope::global()});

  try {
    parse_edge_list("a,b\nc,d,e\n");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 2);
  }
  CHECK(code_of([] { parse_edge_list("a,\n"); }) == "parse-error");
  CHECK(code_of([] { parse_edge_list("a,a\n"); }) == "self-delegation");
}

TEST_CASE("fixture and programmatic reference topologies agree") {
  const compiled_graph fig2 = compile_document(parse_fixture("figure2.json"));
  CHECK(consolidated_profile(fig2, std::nullopt) == testing::figure2_profile());
  CHECK(fig2.names.name(agent_id{0}) == "n00");
  CHECK(fig2.names.name(agent_id{23}) == "n23");

  const compiled_graph fig3 = compile_document(parse_fixture("figure3.json"));
  CHECK(consolidated_profile(fig3, std::nullopt) == testing::figure3_profile());

  const compiled_graph chain_json = compile_document(parse_fixture("chain3.json"));
  const compiled_graph chain_edges = compile_document(parse_fixture("chain3.edges"));
  CHECK(consolidated_profile(chain_json, std::nullopt) ==
        consolidated_profile(chain_edges, std::nullopt));
}

TEST_CASE("consolidation through documents follows scope precedence") {
  const compiled_graph demo = compile_document(parse_fixture("overlay_demo.json"));
  const agent_id alice = demo.names.require("alice");

  const delegation_profile i1 = consolidated_profile(demo, "i1");
  CHECK(i1.successor(alice) == demo.names.require("dave"));
  const delegation_profile i2 = consolidated_profile(demo, "i2");
  CHECK(i2.successor(alice) == demo.names.require("carol"));
  const delegation_profile i3 = consolidated_profile(demo, "i3");
  CHECK(i3.successor(alice) == demo.names.require("bob"));

  CHECK(code_of([&] { consolidated_profile(demo, std::nullopt); }) == "missing-issue");
  CHECK(code_of([&] { consolidated_profile(demo, "i9"); }) == "unknown-issue");
}

TEST_CASE("probability resolution prefers the most specific source") {
  const graph_document doc = parse_graph(R"({
    "agents": ["a", "b", "c", "d"],
    "delegations": [
      {"from": "a", "to": "d"},
      {"from": "b", "to": "d"},
      {"from": "c", "to": "d"}
    ],
    "probabilities": {"b": 0.25},
    "default_probability": 0.75
  })");
  const compiled_graph g = compile_document(doc);
  const delegation_profile profile = consolidated_profile(g, std::nullopt);

  const std::vector<double> with_flag =
      resolve_vote_probabilities(doc, g.names, profile, {{"a", 0.125}}, 0.5);
  CHECK(with_flag[g.names.require("a").value] == 0.125);  // override file wins
  CHECK(with_flag[g.names.require("b").value] == 0.25);   // document probability next
  CHECK(with_flag[g.names.require("c").value] == 0.5);    // then the uniform flag
  CHECK(with_flag[g.names.require("d").value] == 1.0);    // endpoint

  const std::vector<double> no_flag =
      resolve_vote_probabilities(doc, g.names, profile, {}, std::nullopt);
  CHECK(no_flag[g.names.require("c").value] == 0.75);  // document default last

  graph_document bare = doc;
  bare.probabilities.clear();
  bare.default_probability.reset();
  CHECK(code_of([&] {
          resolve_vote_probabilities(bare, g.names, profile, {}, std::nullopt);
        }) == "missing-probability");
  CHECK(code_of([&] {
          resolve_vote_probabilities(doc, g.names, profile, {{"zz", 0.5}}, std::nullopt);
        }) == "unknown-agent");
  CHECK(code_of([&] {
          resolve_vote_probabilities(doc, g.names, profile, {{"a", 7.0}}, std::nullopt);
        }) == "probability-out-of-range");
}

TEST_CASE("number formatting") {
  CHECK(format_number(100.0) == "100");
  CHECK(format_number(1.25) == "1.25");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(5001.0) == "5001");
  CHECK(format_number(3.484375) == "3.484375");
  CHECK(format_human(1.9375) == "1.938");
  CHECK(format_human(1.96875) == "1.969");
  CHECK(format_human(3.484375) == "3.484");
  CHECK(format_human(7.0) == "7");
  CHECK(format_human(1.5) == "1.5");
  CHECK(format_human(1.75) == "1.75");
  CHECK(format_fixed(2.0, 3) == "2.000");
}

TEST_CASE("csv escaping") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("with,comma") == "\"with,comma\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("reports carry all columns and the potential column checks out") {
  const graph_document doc = parse_fixture("figure2.json");
  const compiled_graph g = compile_document(doc);
  const delegation_profile profile = consolidated_profile(g, std::nullopt);
  const suspendible_profile sp(
      profile, resolve_vote_probabilities(doc, g.names, profile, {}, 0.5));
  const report_document report =
      build_report(g.names, sp, "uniform p=0.5", std::nullopt, 0, 1e-10);

  REQUIRE(report.rows.size() == 24);
  const std::vector<double> naive = testing::naive_potential_weight(profile);
  for (std::uint32_t i = 0; i < 24; ++i) {
    CHECK(report.rows[i].agent == g.names.name(agent_id{i}));
    CHECK(report.rows[i].potential == naive[i]);
    CHECK_FALSE(report.rows[i].mc_estimate.has_value());
  }
  CHECK_THAT(report.rows[23].expected, WithinAbs(3.484375, 1e-12));
  CHECK_THAT(report.rows[23].stationary_scaled, WithinAbs(15.0, 1e-12));

  const std::string csv = report_to_csv(report);
  CHECK(csv.find("# agents=24\n") != std::string::npos);
  CHECK(csv.find("agent,potential,expected,stationary_scaled\n") != std::string::npos);
  CHECK(csv.find("n23,15,3.484375,15\n") != std::string::npos);

  const std::string table = report_to_table(report);
  CHECK(table.find("3.484") != std::string::npos);
  CHECK(table.find("1.938") != std::string::npos);

  const auto parsed = nlohmann::json::parse(report_to_json(report));
  CHECK(parsed["metadata"]["agents"] == 24);
  CHECK(parsed["rows"][23]["expected"].get<double>() == report.rows[23].expected);
}

TEST_CASE("reports can include Monte Carlo columns") {
  const graph_document doc = parse_fixture("star6.json");
  const compiled_graph g = compile_document(doc);
  const delegation_profile profile = consolidated_profile(g, std::nullopt);
  const suspendible_profile sp(
      profile, resolve_vote_probabilities(doc, g.names, profile, {}, 0.5));
  const report_document report = build_report(g.names, sp, "uniform p=0.5", 2000, 9, 1e-10);

  REQUIRE(report.rows.size() == 7);
  const report_row& hub = report.rows[0];
  REQUIRE(hub.agent == "hub");
  REQUIRE(hub.mc_estimate.has_value());
  CHECK(std::abs(*hub.mc_estimate - 4.0) <= 4.0 * *hub.mc_std_error);
  const std::string csv = report_to_csv(report);
  CHECK(csv.find("mc_estimate,mc_std_error") != std::string::npos);
  CHECK(csv.find("# seed=9\n") != std::string::npos);
}

TEST_CASE("probability files parse strictly") {
  CHECK(parse_probability_file(R"({"a": 0.5})") == std::map<std::string, double>{{"a", 0.5}});
  CHECK(code_of([] { parse_probability_file(R"(["a"])"); }) == "bad-schema");
  CHECK(code_of([] { parse_probability_file(R"({"a": "x"})"); }) == "bad-schema");
  CHECK(code_of([] { parse_probability_file("{nope"); }) == "parse-error");
}

TEST_CASE("missing files raise io errors") {
  CHECK(code_of([] { load_graph_file("/nonexistent/now.json"); }) == "io-error");
}
