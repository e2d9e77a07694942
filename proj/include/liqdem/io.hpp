#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "liqdem/influence.hpp"
#include "liqdem/lottery.hpp"
#include "liqdem/overlay.hpp"

namespace liqdem {

// ---------------------------------------------------------------------------
// Graph documents

struct document_delegation {
  std::string from;
  std::string to;
  delegation_scope scope;

  friend bool operator==(const document_delegation&, const document_delegation&) = default;
};

// Parsed form of a graph file: named agents, scoped delegations, the
// issue -> area map, and optional voting probabilities.
struct graph_document {
  std::vector<std::string> agents;
  std::vector<document_delegation> delegations;
  std::map<std::string, std::string> areas;  // issue -> area
  std::map<std::string, double> probabilities;
  std::optional<double> default_probability;

  friend bool operator==(const graph_document&, const graph_document&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t stop = std::min(byte, text.size());
  for (std::size_t i = 0; i < stop; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

inline void check_document(const graph_document& doc) {
  std::set<std::string> agents;
  for (const std::string& a : doc.agents) {
    if (a.empty()) throw validation_error("bad-schema", "agent names must be nonempty");
    if (!agents.insert(a).second) {
      throw validation_error("duplicate-agent", "agent '" + a + "' is listed twice");
    }
  }
  std::set<std::pair<std::string, std::string>> scope_slots;  // (agent, scope key)
  for (const document_delegation& d : doc.delegations) {
    if (!agents.contains(d.from)) {
      throw validation_error("unknown-agent", "delegating agent '" + d.from + "' is not listed");
    }
    if (!agents.contains(d.to)) {
      throw validation_error("unknown-agent", "delegate '" + d.to + "' is not listed");
    }
    if (d.from == d.to) {
      throw validation_error("self-delegation", "agent '" + d.from +
                                                    "' delegates to itself; drop the delegation instead");
    }
    std::string slot;
    switch (d.scope.kind) {
      case scope_kind::global:
        slot = "global";
        break;
      case scope_kind::area:
        slot = "area:" + d.scope.id;
        break;
      case scope_kind::issue:
        if (!doc.areas.contains(d.scope.id)) {
          throw validation_error("unknown-issue", "delegation of '" + d.from +
                                                      "' names issue '" + d.scope.id +
                                                      "' missing from areas");
        }
        slot = "issue:" + d.scope.id;
        break;
    }
    if (!scope_slots.emplace(d.from, slot).second) {
      throw validation_error("duplicate-scope",
                             "agent '" + d.from + "' has two delegations for scope " + slot);
    }
  }
  for (const auto& [agent, p] : doc.probabilities) {
    if (!agents.contains(agent)) {
      throw validation_error("unknown-agent", "probability given for unknown agent '" + agent + "'");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      throw validation_error("probability-out-of-range",
                             "probability of '" + agent + "' is outside [0, 1]");
    }
  }
  if (doc.default_probability &&
      !(*doc.default_probability >= 0.0 && *doc.default_probability <= 1.0)) {
    throw validation_error("probability-out-of-range", "default_probability is outside [0, 1]");
  }
}

inline delegation_scope scope_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "global") return delegation_scope::global();
    throw validation_error("bad-scope", "scope string must be \"global\", got \"" +
                                            j.get<std::string>() + "\"");
  }
  if (j.is_object() && j.size() == 1) {
    if (j.contains("area") && j["area"].is_string()) {
      return delegation_scope::for_area(j["area"].get<std::string>());
    }
    if (j.contains("issue") && j["issue"].is_string()) {
      return delegation_scope::for_issue(j["issue"].get<std::string>());
    }
  }
  throw validation_error("bad-scope",
                         "scope must be \"global\", {\"area\": id} or {\"issue\": id}");
}

}  // namespace detail

// Parses the JSON graph schema: top-level keys `agents`, `delegations`,
// `areas`, `probabilities`, `default_probability`. Only `agents` is required.
inline graph_document parse_graph(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw parse_error("invalid JSON: " + std::string(e.what()), line, column);
  }
  if (!j.is_object()) throw validation_error("bad-schema", "top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "agents" && key != "delegations" && key != "areas" && key != "probabilities" &&
        key != "default_probability") {
      throw validation_error("bad-schema", "unknown top-level key '" + key + "'");
    }
    (void)value;
  }

  graph_document doc;
  if (!j.contains("agents") || !j["agents"].is_array()) {
    throw validation_error("bad-schema", "'agents' must be an array of strings");
  }
  for (const auto& a : j["agents"]) {
    if (!a.is_string()) throw validation_error("bad-schema", "'agents' entries must be strings");
    doc.agents.push_back(a.get<std::string>());
  }

  if (j.contains("delegations")) {
    if (!j["delegations"].is_array()) {
      throw validation_error("bad-schema", "'delegations' must be an array");
    }
    for (const auto& d : j["delegations"]) {
      if (!d.is_object() || !d.contains("from") || !d.contains("to") || !d["from"].is_string() ||
          !d["to"].is_string()) {
        throw validation_error("bad-schema",
                               "each delegation needs string fields 'from' and 'to'");
      }
      for (const auto& [key, value] : d.items()) {
        if (key != "from" && key != "to" && key != "scope") {
          throw validation_error("bad-schema", "unknown delegation key '" + key + "'");
        }
        (void)value;
      }
      document_delegation entry{d["from"].get<std::string>(), d["to"].get<std::string>(),
                                delegation_scope::global()};
      if (d.contains("scope")) entry.scope = detail::scope_from_json(d["scope"]);
      doc.delegations.push_back(std::move(entry));
    }
  }

  if (j.contains("areas")) {
    if (!j["areas"].is_object()) {
      throw validation_error("bad-schema", "'areas' must map issue ids to area ids");
    }
    for (const auto& [issue, area] : j["areas"].items()) {
      if (!area.is_string()) {
        throw validation_error("bad-schema", "'areas' values must be strings");
      }
      doc.areas.emplace(issue, area.get<std::string>());
    }
  }

  if (j.contains("probabilities")) {
    if (!j["probabilities"].is_object()) {
      throw validation_error("bad-schema", "'probabilities' must map agents to numbers");
    }
    for (const auto& [agent, p] : j["probabilities"].items()) {
      if (!p.is_number()) {
        throw validation_error("bad-schema", "'probabilities' values must be numbers");
      }
      doc.probabilities.emplace(agent, p.get<double>());
    }
  }

  if (j.contains("default_probability")) {
    if (!j["default_probability"].is_number()) {
      throw validation_error("bad-schema", "'default_probability' must be a number");
    }
    doc.default_probability = j["default_probability"].get<double>();
  }

  detail::check_document(doc);
  return doc;
}

inline std::string serialize_graph(const graph_document& doc) {
  nlohmann::ordered_json j;
  j["agents"] = doc.agents;
  j["delegations"] = nlohmann::ordered_json::array();
  for (const document_delegation& d : doc.delegations) {
    nlohmann::ordered_json entry;
    entry["from"] = d.from;
    entry["to"] = d.to;
    switch (d.scope.kind) {
      case scope_kind::global:
        entry["scope"] = "global";
        break;
      case scope_kind::area:
        entry["scope"] = nlohmann::ordered_json{{"area", d.scope.id}};
        break;
      case scope_kind::issue:
        entry["scope"] = nlohmann::ordered_json{{"issue", d.scope.id}};
        break;
    }
    j["delegations"].push_back(std::move(entry));
  }
  if (!doc.areas.empty()) j["areas"] = doc.areas;
  if (!doc.probabilities.empty()) j["probabilities"] = doc.probabilities;
  if (doc.default_probability) j["default_probability"] = *doc.default_probability;
  return j.dump(2) + "\n";
}

// Plain edge list: one `from,to` pair per line, `#` starts a comment, a line
// with a single name declares an agent without delegation. Agents are
// inferred in order of first mention; all delegations are global.
inline graph_document parse_edge_list(std::string_view text) {
  graph_document doc;
  std::set<std::string> seen;
  const auto note_agent = [&](std::string_view name) {
    if (seen.insert(std::string(name)).second) doc.agents.emplace_back(name);
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;

    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;

    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      note_agent(line);
      continue;
    }
    if (line.find(',', comma + 1) != std::string_view::npos) {
      throw parse_error("expected one 'from,to' pair", line_no, comma + 1);
    }
    const std::string_view from = detail::trim(line.substr(0, comma));
    const std::string_view to = detail::trim(line.substr(comma + 1));
    if (from.empty() || to.empty()) {
      throw parse_error("agent names must be nonempty", line_no, comma + 1);
    }
    note_agent(from);
    note_agent(to);
    doc.delegations.push_back(
        document_delegation{std::string(from), std::string(to), delegation_scope::global()});
  }

  detail::check_document(doc);
  return doc;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("io-error", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Loads a graph file; `.json` selects the JSON schema, anything else the edge
// list format.
inline graph_document load_graph_file(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    return parse_graph(text);
  }
  return parse_edge_list(text);
}

// ---------------------------------------------------------------------------
// Names and compilation to core types

// Bidirectional mapping between agent names and dense ids. Ids follow the
// lexicographic order of the names, which fixes the output ordering of every
// report.
class agent_names {
public:
  explicit agent_names(std::vector<std::string> names) : names_(std::move(names)) {
    std::sort(names_.begin(), names_.end());
  }

  std::size_t size() const noexcept { return names_.size(); }

  const std::string& name(agent_id a) const { return names_.at(a.value); }

  std::optional<agent_id> find(std::string_view name) const {
    const auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) return std::nullopt;
    return agent_id{static_cast<std::uint32_t>(it - names_.begin())};
  }

  agent_id require(std::string_view name) const {
    if (const auto id = find(name)) return *id;
    throw unknown_agent("agent '" + std::string(name) + "' is not in the graph");
  }

  const std::vector<std::string>& names() const noexcept { return names_; }

private:
  std::vector<std::string> names_;
};

struct compiled_graph {
  agent_names names;
  delegation_overlay overlay;
  bool has_scoped = false;
};

inline compiled_graph compile_document(const graph_document& doc) {
  agent_names names(doc.agents);
  std::vector<scoped_delegation> delegations;
  delegations.reserve(doc.delegations.size());
  bool has_scoped = false;
  for (const document_delegation& d : doc.delegations) {
    delegations.push_back(scoped_delegation{names.require(d.from), names.require(d.to), d.scope});
    has_scoped |= d.scope.kind != scope_kind::global;
  }
  delegation_overlay overlay(names.size(), delegations, doc.areas);
  return compiled_graph{std::move(names), std::move(overlay), has_scoped};
}

// Profile seen by one analysis run: the consolidation for --issue, or the
// plain global profile when the document carries no scoped delegations.
inline delegation_profile consolidated_profile(const compiled_graph& graph,
                                               const std::optional<std::string>& issue) {
  if (issue) return graph.overlay.consolidate(*issue);
  if (graph.has_scoped) {
    throw validation_error("missing-issue",
                           "graph has area- or issue-scoped delegations; pass --issue to pick one");
  }
  return graph.overlay.global_profile();
}

// Per-agent voting probability, most specific source first: explicit
// overrides (--prob-file), the document's probabilities, the --p flag, then
// the document default. Endpoints need none; a delegating agent without any
// source is an error.
inline std::vector<double> resolve_vote_probabilities(
    const graph_document& doc, const agent_names& names, const delegation_profile& profile,
    const std::map<std::string, double>& overrides, std::optional<double> uniform) {
  for (const auto& [agent, p] : overrides) {
    names.require(agent);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw validation_error("probability-out-of-range",
                             "override probability of '" + agent + "' is outside [0, 1]");
    }
  }
  if (uniform && !(*uniform >= 0.0 && *uniform <= 1.0)) {
    throw validation_error("probability-out-of-range", "uniform probability is outside [0, 1]");
  }

  std::vector<double> out(names.size(), 1.0);
  for (std::uint32_t i = 0; i < names.size(); ++i) {
    const agent_id a{i};
    if (profile.is_endpoint(a)) continue;
    const std::string& name = names.name(a);
    if (const auto it = overrides.find(name); it != overrides.end()) {
      out[i] = it->second;
    } else if (const auto it2 = doc.probabilities.find(name); it2 != doc.probabilities.end()) {
      out[i] = it2->second;
    } else if (uniform) {
      out[i] = *uniform;
    } else if (doc.default_probability) {
      out[i] = *doc.default_probability;
    } else {
      throw validation_error("missing-probability",
                             "no voting probability for delegating agent '" + name +
                                 "'; pass --p or add probabilities to the document");
    }
  }
  return out;
}

// JSON object map of agent name to probability.
inline std::map<std::string, double> parse_probability_file(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw parse_error("invalid JSON: " + std::string(e.what()), line, column);
  }
  if (!j.is_object()) {
    throw validation_error("bad-schema", "probability file must be a JSON object");
  }
  std::map<std::string, double> out;
  for (const auto& [agent, p] : j.items()) {
    if (!p.is_number()) {
      throw validation_error("bad-schema", "probability file values must be numbers");
    }
    out.emplace(agent, p.get<double>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Number formatting

// Shortest representation that parses back to the same double; integral
// values print without a decimal part. Locale-independent.
inline std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string format_fixed(double x, int precision) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, precision);
  return std::string(buf, r.ptr);
}

// Display form for human tables: integers stay integers, everything else is
// rounded to three decimals with trailing zeros trimmed.
inline std::string format_human(double x) {
  if (std::nearbyint(x) == x && std::abs(x) < 1e15) return format_number(x);
  std::string s = format_fixed(x, 3);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

// ---------------------------------------------------------------------------
// Tabular rendering shared by the CLI commands

struct text_table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string render_csv(const text_table& t) {
  std::ostringstream out;
  for (const auto& [key, value] : t.metadata) out << "# " << key << "=" << value << "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    out << (i ? "," : "") << csv_escape(t.header[i]);
  }
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
    out << "\n";
  }
  return std::move(out).str();
}

inline std::string render_table(const text_table& t) {
  std::ostringstream out;
  for (const auto& [key, value] : t.metadata) out << key << ": " << value << "\n";
  if (!t.metadata.empty()) out << "\n";

  std::vector<std::size_t> width(t.header.size(), 0);
  for (std::size_t i = 0; i < t.header.size(); ++i) width[i] = t.header[i].size();
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  const auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << "  ";
      out << row[i];
      if (i + 1 < row.size()) out << std::string(width[i] - row[i].size(), ' ');
    }
    out << "\n";
  };
  emit(t.header);
  for (const auto& row : t.rows) emit(row);
  return std::move(out).str();
}

// ---------------------------------------------------------------------------
// Analysis reports

struct report_row {
  std::string agent;
  double potential = 0.0;
  double expected = 0.0;
  double stationary_scaled = 0.0;
  std::optional<double> mc_estimate;
  std::optional<double> mc_std_error;
};

struct report_document {
  std::size_t agent_count = 0;
  std::string probability_model;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;
  double tolerance = 1e-10;
  std::vector<report_row> rows;
};

// Potential, expected and stationary weight for every agent, plus optional
// Monte Carlo estimates when a sample count is given. Rows follow the name
// order of `names`.
inline report_document build_report(const agent_names& names, const suspendible_profile& sp,
                                    std::string probability_model,
                                    std::optional<std::uint64_t> samples, std::uint64_t seed,
                                    double tolerance) {
  report_document report;
  report.agent_count = names.size();
  report.probability_model = std::move(probability_model);
  report.samples = samples;
  if (samples) report.seed = seed;
  report.tolerance = tolerance;

  const weight_vector potential = potential_weight(sp.profile());
  const weight_vector expected = expected_weights(sp);
  const stationary_result stationary = stationary_analytic(sp);

  for (std::uint32_t i = 0; i < names.size(); ++i) {
    const agent_id a{i};
    report_row row{names.name(a), potential[i], expected[i], stationary.scaled_weight[i],
                   std::nullopt, std::nullopt};
    if (samples) {
      const monte_carlo_result mc = monte_carlo_expected_weight(sp, a, *samples, seed);
      row.mc_estimate = mc.estimate;
      row.mc_std_error = mc.std_error;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

inline text_table report_table(const report_document& report, bool human) {
  const auto fmt = human ? format_human : format_number;
  text_table t;
  t.metadata.emplace_back("agents", std::to_string(report.agent_count));
  t.metadata.emplace_back("probability_model", report.probability_model);
  if (report.samples) {
    t.metadata.emplace_back("samples", std::to_string(*report.samples));
    t.metadata.emplace_back("seed", std::to_string(*report.seed));
  }
  t.metadata.emplace_back("tolerance", format_number(report.tolerance));
  t.header = {"agent", "potential", "expected", "stationary_scaled"};
  if (report.samples) {
    t.header.push_back("mc_estimate");
    t.header.push_back("mc_std_error");
  }
  for (const report_row& row : report.rows) {
    std::vector<std::string> cells{row.agent, fmt(row.potential), fmt(row.expected),
                                   fmt(row.stationary_scaled)};
    if (report.samples) {
      cells.push_back(fmt(*row.mc_estimate));
      cells.push_back(fmt(*row.mc_std_error));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline std::string report_to_json(const report_document& report) {
  nlohmann::ordered_json meta;
  meta["agents"] = report.agent_count;
  meta["probability_model"] = report.probability_model;
  if (report.samples) {
    meta["samples"] = *report.samples;
    meta["seed"] = *report.seed;
  }
  meta["tolerance"] = report.tolerance;

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const report_row& row : report.rows) {
    nlohmann::ordered_json r;
    r["agent"] = row.agent;
    r["potential"] = row.potential;
    r["expected"] = row.expected;
    r["stationary_scaled"] = row.stationary_scaled;
    if (row.mc_estimate) {
      r["mc_estimate"] = *row.mc_estimate;
      r["mc_std_error"] = *row.mc_std_error;
    }
    rows.push_back(std::move(r));
  }
  nlohmann::ordered_json j;
  j["metadata"] = std::move(meta);
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

inline std::string report_to_csv(const report_document& report) {
  return render_csv(report_table(report, false));
}

inline std::string report_to_table(const report_document& report) {
  return render_table(report_table(report, true));
}

}  // namespace liqdem
