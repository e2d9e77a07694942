#pragma once

#include <compare>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liqdem/graph.hpp"

namespace liqdem {

enum class scope_kind { global, area, issue };

// Scope of a single delegation: the broad default, one policy area, or one
// concrete issue. id is empty for the global scope.
struct delegation_scope {
  scope_kind kind = scope_kind::global;
  std::string id;

  static delegation_scope global() { return {}; }
  static delegation_scope for_area(std::string area) {
    return {scope_kind::area, std::move(area)};
  }
  static delegation_scope for_issue(std::string issue) {
    return {scope_kind::issue, std::move(issue)};
  }

  friend auto operator<=>(const delegation_scope&, const delegation_scope&) = default;
};

struct scoped_delegation {
  agent_id from;
  agent_id to;
  delegation_scope scope;

  friend bool operator==(const scoped_delegation&, const scoped_delegation&) = default;
};

// Layered delegations per agent (one global default, one per area, one per
// issue) together with the issue -> area assignment. Consolidation picks the
// most specific delegation per agent for a given issue.
class delegation_overlay {
public:
  delegation_overlay(std::size_t universe_size, std::span<const scoped_delegation> delegations,
                     std::map<std::string, std::string> area_of)
      : n_(universe_size), slots_(universe_size), area_of_(std::move(area_of)) {
    for (const scoped_delegation& d : delegations) {
      if (d.from.value >= n_ || d.to.value >= n_) {
        throw unknown_agent("delegation " + to_string(d.from) + " -> " + to_string(d.to) +
                            " references an agent outside the universe of size " +
                            std::to_string(n_));
      }
      if (d.from == d.to) {
        throw validation_error("self-delegation",
                               "agent " + to_string(d.from) +
                                   " delegates to itself; drop the delegation instead");
      }
      agent_slots& s = slots_[d.from.value];
      switch (d.scope.kind) {
        case scope_kind::global:
          if (s.global_target) {
            throw validation_error("duplicate-scope", "agent " + to_string(d.from) +
                                                          " has two global delegations");
          }
          s.global_target = d.to;
          break;
        case scope_kind::area:
          if (!s.by_area.emplace(d.scope.id, d.to).second) {
            throw validation_error("duplicate-scope", "agent " + to_string(d.from) +
                                                          " has two delegations for area '" +
                                                          d.scope.id + "'");
          }
          break;
        case scope_kind::issue:
          if (!area_of_.contains(d.scope.id)) {
            throw unknown_issue("delegation of agent " + to_string(d.from) +
                                " names issue '" + d.scope.id + "' missing from the area map");
          }
          if (!s.by_issue.emplace(d.scope.id, d.to).second) {
            throw validation_error("duplicate-scope", "agent " + to_string(d.from) +
                                                          " has two delegations for issue '" +
                                                          d.scope.id + "'");
          }
          break;
      }
    }
  }

  delegation_overlay(std::size_t universe_size,
                     std::initializer_list<scoped_delegation> delegations,
                     std::map<std::string, std::string> area_of)
      : delegation_overlay(universe_size,
                           std::span<const scoped_delegation>(delegations.begin(),
                                                              delegations.size()),
                           std::move(area_of)) {}

  std::size_t size() const noexcept { return n_; }

  const std::map<std::string, std::string>& area_of() const noexcept { return area_of_; }

  // Profile for one issue: issue-specific delegation first, then the area
  // default, then the global default, else a self-loop.
  delegation_profile consolidate(const std::string& issue) const {
    const auto area_it = area_of_.find(issue);
    if (area_it == area_of_.end()) {
      throw unknown_issue("issue '" + issue + "' is not in the area map");
    }
    const std::string& area = area_it->second;
    std::vector<agent_id> succ(n_);
    for (std::uint32_t i = 0; i < n_; ++i) {
      succ[i] = resolve(agent_id{i}, issue, area);
    }
    return delegation_profile(std::move(succ));
  }

  // Profile using only global defaults; the view that applies when no scoped
  // delegations exist.
  delegation_profile global_profile() const {
    std::vector<agent_id> succ(n_);
    for (std::uint32_t i = 0; i < n_; ++i) {
      const agent_slots& s = slots_[i];
      succ[i] = s.global_target.value_or(agent_id{i});
    }
    return delegation_profile(std::move(succ));
  }

private:
  struct agent_slots {
    std::optional<agent_id> global_target;
    std::map<std::string, agent_id> by_area;
    std::map<std::string, agent_id> by_issue;
  };

  agent_id resolve(agent_id a, const std::string& issue, const std::string& area) const {
    const agent_slots& s = slots_[a.value];
    if (const auto it = s.by_issue.find(issue); it != s.by_issue.end()) return it->second;
    if (const auto it = s.by_area.find(area); it != s.by_area.end()) return it->second;
    if (s.global_target) return *s.global_target;
    return a;
  }

  std::size_t n_;
  std::vector<agent_slots> slots_;
  std::map<std::string, std::string> area_of_;
};

inline delegation_profile consolidate(const delegation_overlay& overlay, const std::string& issue) {
  return overlay.consolidate(issue);
}

}  // namespace liqdem
