#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liqdem/errors.hpp"

namespace liqdem {

// Dense agent handle; a graph over n agents uses ids 0..n-1. Callers that
// work with named agents map names to ids once (see io.hpp) and keep the core
// numeric.
struct agent_id {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const agent_id&) const = default;
};

inline std::string to_string(agent_id a) { return std::to_string(a.value); }

// Total successor map over a finite agent universe. successor(i) == i marks
// an endpoint (no outgoing delegation); every other agent delegates to
// exactly one proxy. Immutable after construction, so profiles can be shared
// across threads freely.
class delegation_profile {
public:
  explicit delegation_profile(std::vector<agent_id> successor)
      : successor_(std::move(successor)) {
    for (const agent_id s : successor_) {
      if (s.value >= successor_.size()) {
        throw unknown_agent("successor " + to_string(s) + " lies outside the universe of size " +
                            std::to_string(successor_.size()));
      }
    }
  }

  // All agents are endpoints.
  static delegation_profile identity(std::size_t n) {
    std::vector<agent_id> succ(n);
    for (std::size_t i = 0; i < n; ++i) succ[i] = agent_id{static_cast<std::uint32_t>(i)};
    return delegation_profile(std::move(succ));
  }

  std::size_t size() const noexcept { return successor_.size(); }

  bool contains(agent_id a) const noexcept { return a.value < successor_.size(); }

  void require_member(agent_id a) const {
    if (!contains(a)) {
      throw unknown_agent("agent " + to_string(a) + " outside the universe of size " +
                          std::to_string(size()));
    }
  }

  agent_id successor(agent_id a) const {
    require_member(a);
    return successor_[a.value];
  }

  bool is_endpoint(agent_id a) const { return successor(a) == a; }

  const std::vector<agent_id>& successors() const noexcept { return successor_; }

  friend bool operator==(const delegation_profile&, const delegation_profile&) = default;

private:
  std::vector<agent_id> successor_;
};

// Builds a total profile from explicit delegations; agents without an edge
// become endpoints.
inline delegation_profile build_profile(std::size_t universe_size,
                                        std::span<const std::pair<agent_id, agent_id>> edges) {
  std::vector<agent_id> succ(universe_size);
  std::vector<bool> has_edge(universe_size, false);
  for (std::size_t i = 0; i < universe_size; ++i) succ[i] = agent_id{static_cast<std::uint32_t>(i)};
  for (const auto& [from, to] : edges) {
    if (from.value >= universe_size || to.value >= universe_size) {
      throw unknown_agent("delegation " + to_string(from) + " -> " + to_string(to) +
                          " references an agent outside the universe of size " +
                          std::to_string(universe_size));
    }
    if (has_edge[from.value]) {
      throw duplicate_delegator("agent " + to_string(from) + " delegates more than once");
    }
    has_edge[from.value] = true;
    succ[from.value] = to;
  }
  return delegation_profile(std::move(succ));
}

inline delegation_profile build_profile(std::size_t universe_size,
                                        std::initializer_list<std::pair<agent_id, agent_id>> edges) {
  return build_profile(universe_size,
                       std::span<const std::pair<agent_id, agent_id>>(edges.begin(), edges.size()));
}

// Replaces the outgoing delegation of every agent in `actors` with a
// self-loop; incoming delegations are untouched.
inline delegation_profile suspend(const delegation_profile& profile,
                                  std::span<const agent_id> actors) {
  std::vector<agent_id> succ = profile.successors();
  for (const agent_id a : actors) {
    profile.require_member(a);
    succ[a.value] = a;
  }
  return delegation_profile(std::move(succ));
}

inline delegation_profile suspend(const delegation_profile& profile,
                                  std::initializer_list<agent_id> actors) {
  return suspend(profile, std::span<const agent_id>(actors.begin(), actors.size()));
}

// A minimal set X with X = D(X): either a single self-looping endpoint or a
// delegation cycle of two or more agents.
struct ultimate_set {
  enum class set_kind { endpoint, cycle };

  std::vector<agent_id> members;  // sorted ascending
  set_kind kind = set_kind::endpoint;

  friend bool operator==(const ultimate_set&, const ultimate_set&) = default;
};

// Sink structure of a delegation graph. Every delegation path ends in exactly
// one ultimate set; entry(a) is the first ultimate agent on a's path and
// distance(a) the number of steps to it (0 when a is itself ultimate).
// Construction is linear in the number of agents.
class ultimate_decomposition {
public:
  explicit ultimate_decomposition(const delegation_profile& profile) : n_(profile.size()) {
    constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();
    set_of_.assign(n_, 0);
    entry_.assign(n_, agent_id{0});
    distance_.assign(n_, 0);
    std::vector<std::uint32_t> pos_on_walk(n_, npos);
    std::vector<bool> done(n_, false);
    std::vector<std::uint32_t> walk;
    const auto& succ = profile.successors();

    for (std::uint32_t start = 0; start < n_; ++start) {
      if (done[start]) continue;
      walk.clear();
      std::uint32_t cur = start;
      while (!done[cur] && pos_on_walk[cur] == npos) {
        pos_on_walk[cur] = static_cast<std::uint32_t>(walk.size());
        walk.push_back(cur);
        cur = succ[cur].value;
      }

      std::uint32_t tail_end = 0;
      std::uint32_t set_idx = 0;
      agent_id base_entry{};
      std::uint32_t base_dist = 0;
      if (!done[cur]) {
        // walk[pos_on_walk[cur]..] closes a fresh cycle (length 1 = endpoint)
        const std::uint32_t first = pos_on_walk[cur];
        ultimate_set set;
        for (std::uint32_t i = first; i < walk.size(); ++i) set.members.push_back(agent_id{walk[i]});
        std::sort(set.members.begin(), set.members.end());
        set.kind = set.members.size() == 1 ? ultimate_set::set_kind::endpoint
                                           : ultimate_set::set_kind::cycle;
        set_idx = static_cast<std::uint32_t>(sets_.size());
        sets_.push_back(std::move(set));
        for (std::uint32_t i = first; i < walk.size(); ++i) {
          const std::uint32_t node = walk[i];
          set_of_[node] = set_idx;
          entry_[node] = agent_id{node};
          distance_[node] = 0;
          done[node] = true;
        }
        tail_end = first;
        base_entry = agent_id{cur};
        base_dist = 0;
      } else {
        tail_end = static_cast<std::uint32_t>(walk.size());
        set_idx = set_of_[cur];
        base_entry = entry_[cur];
        base_dist = distance_[cur];
      }
      for (std::uint32_t i = tail_end; i-- > 0;) {
        const std::uint32_t node = walk[i];
        set_of_[node] = set_idx;
        entry_[node] = base_entry;
        distance_[node] = base_dist + (tail_end - i);
        done[node] = true;
      }
      for (const std::uint32_t node : walk) pos_on_walk[node] = npos;
    }

    reorder_by_smallest_member();
  }

  std::size_t universe_size() const noexcept { return n_; }

  const std::vector<ultimate_set>& sets() const noexcept { return sets_; }

  std::uint32_t set_index(agent_id a) const {
    require_member(a);
    return set_of_[a.value];
  }

  const ultimate_set& set_of(agent_id a) const { return sets_[set_index(a)]; }

  // First ultimate agent on a's delegation path (a itself when ultimate).
  agent_id entry(agent_id a) const {
    require_member(a);
    return entry_[a.value];
  }

  std::uint32_t distance(agent_id a) const {
    require_member(a);
    return distance_[a.value];
  }

  bool is_ultimate(agent_id a) const { return distance(a) == 0; }

private:
  void require_member(agent_id a) const {
    if (a.value >= n_) {
      throw unknown_agent("agent " + to_string(a) + " outside the universe of size " +
                          std::to_string(n_));
    }
  }

  void reorder_by_smallest_member() {
    std::vector<std::uint32_t> order(sets_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return sets_[a].members.front() < sets_[b].members.front();
    });
    std::vector<std::uint32_t> new_index(sets_.size());
    std::vector<ultimate_set> reordered;
    reordered.reserve(sets_.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
      new_index[order[rank]] = rank;
      reordered.push_back(std::move(sets_[order[rank]]));
    }
    sets_ = std::move(reordered);
    for (auto& idx : set_of_) idx = new_index[idx];
  }

  std::uint32_t n_;
  std::vector<ultimate_set> sets_;
  std::vector<std::uint32_t> set_of_;
  std::vector<agent_id> entry_;
  std::vector<std::uint32_t> distance_;
};

inline std::vector<ultimate_set> ultimate_sets(const delegation_profile& profile) {
  return ultimate_decomposition(profile).sets();
}

struct proxy_info {
  ultimate_set set;
  agent_id entry;           // D-star of the agent
  std::uint32_t distance;   // delegation steps to the entry
};

// One-shot convenience; callers resolving many agents should hold an
// ultimate_decomposition instead.
inline proxy_info ultimate_proxy(const delegation_profile& profile, agent_id a) {
  const ultimate_decomposition decomp(profile);
  return proxy_info{decomp.set_of(a), decomp.entry(a), decomp.distance(a)};
}

// Steps along the unique delegation path from `from` until `to` is first
// reached; empty when `to` is not on that path. distance(i, i) == 0.
inline std::optional<std::uint32_t> delegation_distance(const delegation_profile& profile,
                                                        agent_id from, agent_id to) {
  profile.require_member(from);
  profile.require_member(to);
  agent_id cur = from;
  const std::uint32_t limit = static_cast<std::uint32_t>(profile.size());
  for (std::uint32_t steps = 0; steps <= limit; ++steps) {
    if (cur == to) return steps;
    cur = profile.successors()[cur.value];
  }
  return std::nullopt;
}

}  // namespace liqdem

template <>
struct std::hash<liqdem::agent_id> {
  std::size_t operator()(const liqdem::agent_id& a) const noexcept {
    return std::hash<std::uint32_t>{}(a.value);
  }
};
