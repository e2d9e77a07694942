#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "liqdem/cli.hpp"

using namespace liqdem;
using Catch::Matchers::WithinAbs;

namespace {
const std::string fixture_dir = LIQDEM_FIXTURE_DIR;

struct cli_run {
  int code = 0;
  std::string out;
  std::string err;
};

cli_run run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, std::move(out).str(), std::move(err).str()};
}

std::string fixture(const std::string& name) { return fixture_dir + "/" + name; }

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}
}  // namespace

TEST_CASE("analyze renders the reference report") {
  const cli_run r = run_cli({"analyze", fixture("figure2.json"), "--p", "0.5", "--format", "json"});
  REQUIRE(r.code == cli::exit_success);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["metadata"]["agents"] == 24);
  CHECK(j["metadata"]["probability_model"] == "uniform p=0.5");
  REQUIRE(j["rows"].size() == 24);
  CHECK(j["rows"][0]["agent"] == "n00");
  CHECK(j["rows"][0]["potential"].get<double>() == 7.0);
  CHECK(j["rows"][0]["expected"].get<double>() == 4.0);
  CHECK(j["rows"][23]["agent"] == "n23");
  CHECK(j["rows"][23]["potential"].get<double>() == 15.0);
  CHECK_THAT(j["rows"][23]["expected"].get<double>(), WithinAbs(3.484375, 1e-12));
  CHECK_THAT(j["rows"][23]["stationary_scaled"].get<double>(), WithinAbs(15.0, 1e-12));
}

TEST_CASE("analyze of a single agent") {
  const cli_run r = run_cli({"analyze", fixture("single_agent.json"), "--format", "csv"});
  REQUIRE(r.code == cli::exit_success);
  CHECK(r.out.find("solo,1,1,1\n") != std::string::npos);
}

TEST_CASE("analyze requires an issue for scoped documents") {
  const cli_run missing = run_cli({"analyze", fixture("overlay_demo.json"), "--p", "0.5"});
  CHECK(missing.code == cli::exit_validation);
  CHECK(missing.err.find("missing-issue") != std::string::npos);

  const cli_run with_issue = run_cli(
      {"analyze", fixture("overlay_demo.json"), "--issue", "i2", "--format", "json"});
  REQUIRE(with_issue.code == cli::exit_success);
  const auto j = nlohmann::json::parse(with_issue.out);
  // alice -> carol for issues in the env area; carol collects alice and bob
  CHECK(j["rows"][2]["agent"] == "carol");
  CHECK(j["rows"][2]["potential"].get<double>() == 3.0);
}

TEST_CASE("oracle agrees on reference fixtures") {
  const cli_run star = run_cli(
      {"oracle", fixture("star6.json"), "--target", "hub", "--p", "0.5", "--format", "json"});
  REQUIRE(star.code == cli::exit_success);
  const auto j = nlohmann::json::parse(star.out);
  CHECK(j["expected_weight"].get<double>() == 4.0);
  CHECK(j["enumerated_weight"].get<double>() == 4.0);
  CHECK(j["abs_diff"].get<double>() <= 1e-12);

  const cli_run chain = run_cli(
      {"oracle", fixture("chain3.json"), "--target", "end", "--p", "0.5", "--format", "json"});
  REQUIRE(chain.code == cli::exit_success);
  const auto jc = nlohmann::json::parse(chain.out);
  CHECK_THAT(jc["expected_weight"].get<double>(), WithinAbs(1.875, 1e-12));
  CHECK_THAT(jc["enumerated_weight"].get<double>(), WithinAbs(1.875, 1e-12));

  for (const std::string target : {"a", "b", "c"}) {
    const cli_run cyc = run_cli(
        {"oracle", fixture("figure1.json"), "--target", target, "--p", "0.5", "--format", "json"});
    REQUIRE(cyc.code == cli::exit_success);
    CHECK(nlohmann::json::parse(cyc.out)["abs_diff"].get<double>() <= 1e-12);
  }
}

TEST_CASE("oracle guard exits with the resource code") {
  std::string edges;
  for (int i = 0; i < 26; ++i) edges += "s" + std::to_string(i) + ",hub\n";
  const std::string path = write_temp("liqdem_star26.edges", edges);
  const cli_run r = run_cli({"oracle", path, "--target", "hub", "--p", "0.5"});
  CHECK(r.code == cli::exit_guard);
  CHECK(r.err.find("too-large") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("sample output is byte-identical across runs") {
  const std::vector<std::string> args{"sample",    fixture("figure2.json"),
                                      "--target",  "n23",
                                      "--p",       "0.5",
                                      "--samples", "20000",
                                      "--seed",    "42",
                                      "--format",  "json"};
  const cli_run r1 = run_cli(args);
  const cli_run r2 = run_cli(args);
  REQUIRE(r1.code == cli::exit_success);
  CHECK(r1.out == r2.out);

  const auto j = nlohmann::json::parse(r1.out);
  CHECK(j["samples"] == 20000);
  CHECK(j["seed"] == 42);
  const double estimate = j["estimate"].get<double>();
  const double std_error = j["std_error"].get<double>();
  CHECK(std::abs(estimate - 3.484375) <= 4.0 * std_error);
}

TEST_CASE("sample with certain voters is exact") {
  const cli_run r = run_cli({"sample", fixture("chain3.json"), "--target", "end", "--p", "1",
                             "--samples", "50", "--format", "json"});
  REQUIRE(r.code == cli::exit_success);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["estimate"].get<double>() == 1.0);
  CHECK(j["std_error"].get<double>() == 0.0);
}

TEST_CASE("table chain-limit reproduces the long-chain values") {
  const cli_run r = run_cli({"table", "chain-limit", "--format", "csv"});
  REQUIRE(r.code == cli::exit_success);
  CHECK(r.out ==
        "p,expected\n"
        "0.01,100\n"
        "0.02,50\n"
        "0.05,20\n"
        "0.1,10\n"
        "0.2,5\n"
        "0.5,2\n"
        "0.8,1.25\n");
}

TEST_CASE("table chain and star closed forms") {
  const cli_run chain = run_cli(
      {"table", "chain", "--n", "10000", "--p", "0.5", "--format", "csv"});
  REQUIRE(chain.code == cli::exit_success);
  CHECK(chain.out == "n,p,expected\n10000,0.5,2\n");

  const cli_run star = run_cli({"table", "star", "--k", "10000", "--p", "0.5", "--format", "csv"});
  REQUIRE(star.code == cli::exit_success);
  CHECK(star.out == "k,p,expected\n10000,0.5,5001\n");

  const cli_run trivial = run_cli({"table", "chain", "--n", "0", "--p", "0.7", "--format", "csv"});
  REQUIRE(trivial.code == cli::exit_success);
  CHECK(trivial.out == "n,p,expected\n0,0.7,1\n");

  const cli_run missing = run_cli({"table", "chain", "--p", "0.5"});
  CHECK(missing.code == cli::exit_validation);
}

TEST_CASE("stationary reports analytic and iterative columns") {
  const cli_run r = run_cli(
      {"stationary", fixture("figure3.json"), "--p", "0.5", "--format", "json"});
  REQUIRE(r.code == cli::exit_success);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["max_abs_diff"].get<double>() < 1e-8);
  for (int i = 0; i < 9; ++i) {
    const double want = i < 3 ? 3.0 : 0.0;
    CHECK_THAT(j["rows"][i]["scaled_weight"].get<double>(), WithinAbs(want, 1e-12));
    CHECK_THAT(j["rows"][i]["iterative_scaled_weight"].get<double>(), WithinAbs(want, 1e-8));
  }
}

TEST_CASE("stationary reports periodicity as no-convergence") {
  const cli_run r = run_cli({"stationary", fixture("figure3.json"), "--p", "0",
                             "--max-iters", "5000"});
  CHECK(r.code == cli::exit_mismatch);
  CHECK(r.err.find("no-convergence") != std::string::npos);
}

TEST_CASE("edge list input works end to end") {
  const cli_run r = run_cli(
      {"analyze", fixture("chain3.edges"), "--p", "0.5", "--format", "csv"});
  REQUIRE(r.code == cli::exit_success);
  CHECK(r.out.find("end,4,1.875,4\n") != std::string::npos);
}

TEST_CASE("validation failures exit with code 1") {
  CHECK(run_cli({"analyze", "/nonexistent.json"}).code == cli::exit_validation);
  CHECK(run_cli({"analyze", fixture("figure2.json"), "--p", "1.5"}).code ==
        cli::exit_validation);
  CHECK(run_cli({"oracle", fixture("figure1.json"), "--target", "zz", "--p", "0.5"}).code ==
        cli::exit_validation);
  CHECK(run_cli({"sample", fixture("figure1.json"), "--target", "a", "--p", "0.5", "--samples",
                 "1"})
            .code == cli::exit_validation);

  const std::string bare = write_temp("liqdem_bare.json", R"({
    "agents": ["a", "b"],
    "delegations": [{"from": "a", "to": "b"}]
  })");
  const cli_run no_prob = run_cli({"analyze", bare});
  CHECK(no_prob.code == cli::exit_validation);
  CHECK(no_prob.err.find("missing-probability") != std::string::npos);
  std::remove(bare.c_str());

  const std::string dup = write_temp("liqdem_dup.json", R"({
    "agents": ["a", "b"],
    "delegations": [{"from": "a", "to": "b"}, {"from": "a", "to": "b"}]
  })");
  const cli_run r = run_cli({"analyze", dup, "--p", "0.5"});
  CHECK(r.code == cli::exit_validation);
  CHECK(r.err.find("duplicate-scope") != std::string::npos);
  std::remove(dup.c_str());
}

TEST_CASE("help exits cleanly") {
  CHECK(run_cli({"--help"}).code == cli::exit_success);
  CHECK(run_cli({"analyze", "--help"}).code == cli::exit_success);
  CHECK(run_cli({}).code == cli::exit_validation);
  CHECK(run_cli({"frobnicate"}).code == cli::exit_validation);
}
