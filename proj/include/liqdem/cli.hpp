#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "liqdem/io.hpp"

namespace liqdem::cli {

inline constexpr int exit_success = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_mismatch = 2;
inline constexpr int exit_guard = 3;

inline constexpr double oracle_agreement_bound = 1e-9;

namespace detail {

struct graph_options {
  std::string file;
  std::optional<std::string> issue;
  std::optional<double> uniform_p;
  std::optional<std::string> prob_file;
};

struct loaded_graph {
  graph_document doc;
  agent_names names;
  delegation_profile profile;
  suspendible_profile sp;
  std::string probability_model;
};

inline std::string describe_probability_model(const graph_document& doc,
                                              const graph_options& opts, bool has_overrides) {
  if (has_overrides) return "per-agent file overrides";
  if (opts.uniform_p) return "uniform p=" + format_number(*opts.uniform_p);
  if (!doc.probabilities.empty()) {
    std::string s = "document probabilities";
    if (doc.default_probability) s += " (default p=" + format_number(*doc.default_probability) + ")";
    return s;
  }
  if (doc.default_probability) {
    return "document default p=" + format_number(*doc.default_probability);
  }
  return "endpoints only";
}

inline loaded_graph load_graph(const graph_options& opts) {
  graph_document doc = load_graph_file(opts.file);
  compiled_graph compiled = compile_document(doc);
  delegation_profile profile = consolidated_profile(compiled, opts.issue);

  std::map<std::string, double> overrides;
  if (opts.prob_file) overrides = parse_probability_file(read_file(*opts.prob_file));
  std::vector<double> probs =
      resolve_vote_probabilities(doc, compiled.names, profile, overrides, opts.uniform_p);

  std::string model = describe_probability_model(doc, opts, !overrides.empty());
  suspendible_profile sp(profile, std::move(probs));
  return loaded_graph{std::move(doc), std::move(compiled.names), std::move(profile),
                      std::move(sp), std::move(model)};
}

inline void add_graph_options(CLI::App* cmd, graph_options& opts, std::string& issue_storage,
                              std::string& prob_file_storage, double& p_storage) {
  cmd->add_option("graph", opts.file, "graph file (.json schema or edge list)")->required();
  auto* issue = cmd->add_option("--issue", issue_storage,
                                "issue id to consolidate scoped delegations for");
  auto* p = cmd->add_option("--p", p_storage, "uniform voting probability for delegating agents");
  auto* prob = cmd->add_option("--prob-file", prob_file_storage,
                               "JSON object of per-agent voting probabilities");
  cmd->parse_complete_callback([&opts, issue, p, prob, &issue_storage, &prob_file_storage,
                                &p_storage]() {
    if (issue->count() > 0) opts.issue = issue_storage;
    if (p->count() > 0) opts.uniform_p = p_storage;
    if (prob->count() > 0) opts.prob_file = prob_file_storage;
  });
}

inline std::string render_pairs_json(
    const std::vector<std::pair<std::string, nlohmann::ordered_json>>& fields) {
  nlohmann::ordered_json j;
  for (const auto& [key, value] : fields) j[key] = value;
  return j.dump(2) + "\n";
}

inline std::string render_pairs(const std::vector<std::pair<std::string, std::string>>& fields,
                                const std::string& format) {
  text_table t;
  if (format == "csv") {
    for (const auto& [key, value] : fields) t.header.push_back(key);
    std::vector<std::string> row;
    for (const auto& [key, value] : fields) row.push_back(value);
    t.rows.push_back(std::move(row));
    return render_csv(t);
  }
  std::ostringstream out;
  for (const auto& [key, value] : fields) out << key << ": " << value << "\n";
  return std::move(out).str();
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"influence analytics for transitive delegation graphs"};
  app.name("liqdem");
  app.require_subcommand(1);

  const std::vector<std::string> formats{"json", "csv", "table"};

  // analyze
  auto* analyze = app.add_subcommand("analyze", "potential, expected and stationary weight report");
  detail::graph_options analyze_graph;
  std::string analyze_issue, analyze_prob_file;
  double analyze_p = 0.0;
  detail::add_graph_options(analyze, analyze_graph, analyze_issue, analyze_prob_file, analyze_p);
  std::uint64_t analyze_samples = 0;
  auto* analyze_samples_opt = analyze->add_option(
      "--samples", analyze_samples, "add Monte Carlo estimate columns with this sample count");
  std::uint64_t analyze_seed = 0;
  analyze->add_option("--seed", analyze_seed, "Monte Carlo seed");
  double analyze_tolerance = 1e-10;
  analyze->add_option("--tolerance", analyze_tolerance, "tolerance recorded for solver use");
  std::string analyze_format = "table";
  analyze->add_option("--format", analyze_format, "output format")
      ->check(CLI::IsMember(formats));

  // oracle
  auto* oracle = app.add_subcommand(
      "oracle", "compare expected weight against the exact enumeration oracle");
  detail::graph_options oracle_graph;
  std::string oracle_issue, oracle_prob_file;
  double oracle_p = 0.0;
  detail::add_graph_options(oracle, oracle_graph, oracle_issue, oracle_prob_file, oracle_p);
  std::string oracle_target;
  oracle->add_option("--target", oracle_target, "agent to evaluate")->required();
  std::string oracle_format = "table";
  oracle->add_option("--format", oracle_format, "output format")->check(CLI::IsMember(formats));

  // sample
  auto* sample = app.add_subcommand("sample", "Monte Carlo estimate of expected weight");
  detail::graph_options sample_graph_opts;
  std::string sample_issue, sample_prob_file;
  double sample_p = 0.0;
  detail::add_graph_options(sample, sample_graph_opts, sample_issue, sample_prob_file, sample_p);
  std::string sample_target;
  sample->add_option("--target", sample_target, "agent to evaluate")->required();
  std::uint64_t sample_samples = 0;
  sample->add_option("--samples", sample_samples, "number of sampled graphs")->required();
  std::uint64_t sample_seed = 0;
  sample->add_option("--seed", sample_seed, "RNG seed");
  std::string sample_format = "table";
  sample->add_option("--format", sample_format, "output format")->check(CLI::IsMember(formats));

  // stationary
  auto* stationary = app.add_subcommand("stationary",
                                        "stationary weight distribution, analytic and iterative");
  detail::graph_options stationary_graph;
  std::string stationary_issue, stationary_prob_file;
  double stationary_p = 0.0;
  detail::add_graph_options(stationary, stationary_graph, stationary_issue, stationary_prob_file,
                            stationary_p);
  double stationary_tolerance = 1e-10;
  stationary->add_option("--tolerance", stationary_tolerance, "power iteration tolerance");
  std::uint64_t stationary_max_iters = 200000;
  stationary->add_option("--max-iters", stationary_max_iters, "power iteration cap");
  std::string stationary_format = "table";
  stationary->add_option("--format", stationary_format, "output format")
      ->check(CLI::IsMember(formats));

  // table
  auto* table = app.add_subcommand("table", "closed-form expected weight tables");
  std::string table_kind;
  table->add_option("kind", table_kind, "chain-limit, chain or star")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>{"chain-limit", "chain", "star"}));
  std::vector<double> table_p;
  table->add_option("--p", table_p, "voting probabilities (repeatable)");
  std::uint64_t table_n = 0;
  auto* table_n_opt = table->add_option("--n", table_n, "chain length (delegators)");
  std::uint64_t table_k = 0;
  auto* table_k_opt = table->add_option("--k", table_k, "direct delegators");
  std::string table_format = "csv";
  table->add_option("--format", table_format, "output format")->check(CLI::IsMember(formats));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_success : exit_validation;
  }

  try {
    if (analyze->parsed()) {
      detail::loaded_graph g = detail::load_graph(analyze_graph);
      std::optional<std::uint64_t> samples;
      if (analyze_samples_opt->count() > 0) {
        samples = analyze_samples;
      }
      const report_document report = build_report(g.names, g.sp, g.probability_model, samples,
                                                  analyze_seed, analyze_tolerance);
      if (analyze_format == "json") {
        out << report_to_json(report);
      } else if (analyze_format == "csv") {
        out << report_to_csv(report);
      } else {
        out << report_to_table(report);
      }
      return exit_success;
    }

    if (oracle->parsed()) {
      detail::loaded_graph g = detail::load_graph(oracle_graph);
      const agent_id target = g.names.require(oracle_target);
      const double expected = expected_weight(g.sp, target);
      const double enumerated = enumerate_expected_weight(g.sp, target);
      const double diff = std::abs(expected - enumerated);
      if (oracle_format == "json") {
        out << detail::render_pairs_json({{"target", oracle_target},
                                          {"expected_weight", expected},
                                          {"enumerated_weight", enumerated},
                                          {"abs_diff", diff}});
      } else {
        out << detail::render_pairs({{"target", oracle_target},
                                     {"expected_weight", format_number(expected)},
                                     {"enumerated_weight", format_number(enumerated)},
                                     {"abs_diff", format_number(diff)}},
                                    oracle_format);
      }
      return diff > oracle_agreement_bound ? exit_mismatch : exit_success;
    }

    if (sample->parsed()) {
      detail::loaded_graph g = detail::load_graph(sample_graph_opts);
      const agent_id target = g.names.require(sample_target);
      const monte_carlo_result mc =
          monte_carlo_expected_weight(g.sp, target, sample_samples, sample_seed);
      if (sample_format == "json") {
        out << detail::render_pairs_json({{"target", sample_target},
                                          {"estimate", mc.estimate},
                                          {"std_error", mc.std_error},
                                          {"samples", mc.samples},
                                          {"seed", mc.seed}});
      } else {
        out << detail::render_pairs({{"target", sample_target},
                                     {"estimate", format_number(mc.estimate)},
                                     {"std_error", format_number(mc.std_error)},
                                     {"samples", std::to_string(mc.samples)},
                                     {"seed", std::to_string(mc.seed)}},
                                    sample_format);
      }
      return exit_success;
    }

    if (stationary->parsed()) {
      detail::loaded_graph g = detail::load_graph(stationary_graph);
      const stationary_result analytic = stationary_analytic(g.sp);
      const stationary_result iterated =
          stationary_iterative(g.sp, stationary_tolerance, stationary_max_iters);
      double max_diff = 0.0;
      for (std::uint32_t i = 0; i < g.names.size(); ++i) {
        max_diff = std::max(max_diff,
                            std::abs(analytic.scaled_weight[i] - iterated.scaled_weight[i]));
      }

      if (stationary_format == "json") {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::uint32_t i = 0; i < g.names.size(); ++i) {
          nlohmann::ordered_json row;
          row["agent"] = g.names.name(agent_id{i});
          row["distribution"] = analytic.distribution[i];
          row["scaled_weight"] = analytic.scaled_weight[i];
          row["iterative_scaled_weight"] = iterated.scaled_weight[i];
          rows.push_back(std::move(row));
        }
        out << detail::render_pairs_json({{"agents", g.names.size()},
                                          {"probability_model", g.probability_model},
                                          {"tolerance", stationary_tolerance},
                                          {"max_abs_diff", max_diff},
                                          {"rows", rows}});
      } else {
        const bool human = stationary_format == "table";
        const auto fmt = human ? format_human : format_number;
        text_table t;
        t.metadata.emplace_back("agents", std::to_string(g.names.size()));
        t.metadata.emplace_back("probability_model", g.probability_model);
        t.metadata.emplace_back("tolerance", format_number(stationary_tolerance));
        t.metadata.emplace_back("max_abs_diff", format_number(max_diff));
        t.header = {"agent", "distribution", "scaled_weight", "iterative_scaled_weight"};
        for (std::uint32_t i = 0; i < g.names.size(); ++i) {
          t.rows.push_back({g.names.name(agent_id{i}), fmt(analytic.distribution[i]),
                            fmt(analytic.scaled_weight[i]), fmt(iterated.scaled_weight[i])});
        }
        out << (human ? render_table(t) : render_csv(t));
      }
      return exit_success;
    }

    if (table->parsed()) {
      std::vector<std::string> header;
      std::vector<std::vector<double>> values;
      if (table_kind == "chain-limit") {
        std::vector<double> ps = table_p;
        if (ps.empty()) ps = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.8};
        header = {"p", "expected"};
        for (const double p : ps) values.push_back({p, expected_weight_chain_limit(p)});
      } else if (table_kind == "chain") {
        if (table_n_opt->count() == 0 || table_p.size() != 1) {
          throw validation_error("bad-arguments", "table chain needs --n and exactly one --p");
        }
        header = {"n", "p", "expected"};
        values.push_back({static_cast<double>(table_n), table_p[0],
                          expected_weight_chain(table_n, table_p[0])});
      } else {
        if (table_k_opt->count() == 0 || table_p.size() != 1) {
          throw validation_error("bad-arguments", "table star needs --k and exactly one --p");
        }
        header = {"k", "p", "expected"};
        values.push_back({static_cast<double>(table_k), table_p[0],
                          expected_weight_star(table_k, table_p[0])});
      }

      if (table_format == "json") {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& row : values) {
          nlohmann::ordered_json r;
          for (std::size_t i = 0; i < header.size(); ++i) r[header[i]] = row[i];
          rows.push_back(std::move(r));
        }
        out << rows.dump(2) << "\n";
      } else {
        const bool human = table_format == "table";
        const auto fmt = human ? format_human : format_number;
        text_table t;
        t.header = header;
        for (const auto& row : values) {
          std::vector<std::string> cells;
          for (const double v : row) cells.push_back(fmt(v));
          t.rows.push_back(std::move(cells));
        }
        out << (human ? render_table(t) : render_csv(t));
      }
      return exit_success;
    }
  } catch (const too_large& e) {
    err << "error[" << e.code() << "]: " << e.what() << "\n";
    return exit_guard;
  } catch (const no_convergence& e) {
    err << "error[" << e.code() << "]: " << e.what() << "\n";
    return exit_mismatch;
  } catch (const parse_error& e) {
    err << "error[" << e.code() << "] at line " << e.line() << ", column " << e.column() << ": "
        << e.what() << "\n";
    return exit_validation;
  } catch (const error& e) {
    err << "error[" << e.code() << "]: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  }
  return exit_validation;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("liqdem");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace liqdem::cli
