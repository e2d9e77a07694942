#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liqdem/suspendible.hpp"

namespace liqdem {

namespace detail {

constexpr std::uint64_t splitmix_increment = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// SplitMix64 generator with a fixed substream derivation from
// (seed, stream index). Every stream is reproducible on its own, so sampling
// results do not depend on how many streams run or in which order they are
// consumed. Pure integer arithmetic: identical output on every platform.
class sample_rng {
public:
  sample_rng(std::uint64_t seed, std::uint64_t stream)
      : state_(detail::mix64(seed + detail::splitmix_increment) ^
               detail::mix64(stream + 0x632be59bd9b4e019ULL)) {}

  std::uint64_t next() {
    state_ += detail::splitmix_increment;
    return detail::mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
  std::uint64_t state_;
};

// One outcome of the delegation lottery: the realized profile after every
// voting agent's outgoing delegation was suspended. Voters are exactly the
// self-looping agents of the realized profile.
struct realized_graph {
  delegation_profile profile;
  std::vector<bool> voter;

  realized_graph(delegation_profile realized, std::vector<bool> voters)
      : profile(std::move(realized)), voter(std::move(voters)) {
    if (voter.size() != profile.size()) {
      throw std::invalid_argument("voter flags must cover every agent");
    }
    for (std::uint32_t i = 0; i < voter.size(); ++i) {
      if (voter[i] != (profile.successors()[i].value == i)) {
        throw std::invalid_argument("voters must be exactly the self-loop agents");
      }
    }
  }
};

// Draws one realized graph: every non-endpoint agent outside forced_voters
// votes with its own probability (suspending its delegation), forced voters
// and base endpoints always vote. Draws are consumed in ascending agent order
// for the delegating, unforced agents only; that ordering is part of the
// reproducibility contract.
inline realized_graph sample_graph(const suspendible_profile& sp, sample_rng& rng,
                                   std::span<const agent_id> forced_voters) {
  const delegation_profile& base = sp.profile();
  const std::size_t n = base.size();
  std::vector<bool> forced(n, false);
  for (const agent_id f : forced_voters) {
    base.require_member(f);
    forced[f.value] = true;
  }

  std::vector<agent_id> succ = base.successors();
  std::vector<bool> voter(n, false);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (succ[i].value == i) {
      voter[i] = true;
    } else if (forced[i]) {
      voter[i] = true;
      succ[i] = agent_id{i};
    } else if (rng.next_unit() < sp.vote_probs()[i]) {
      voter[i] = true;
      succ[i] = agent_id{i};
    }
  }
  return realized_graph(delegation_profile(std::move(succ)), std::move(voter));
}

inline realized_graph sample_graph(const suspendible_profile& sp, sample_rng& rng,
                                   std::initializer_list<agent_id> forced_voters) {
  return sample_graph(sp, rng,
                      std::span<const agent_id>(forced_voters.begin(), forced_voters.size()));
}

// Ballot counts of one realized graph. Every agent's vote travels its unique
// delegation path and is credited to the first voter reached; votes entering
// a cycle of non-voters reach nobody and are counted as lost.
struct tally_result {
  std::vector<std::uint32_t> cast;  // nonzero only for voters
  std::uint64_t lost = 0;

  std::uint32_t cast_for(agent_id a) const { return cast.at(a.value); }
};

inline tally_result tally(const realized_graph& g) {
  const auto& succ = g.profile.successors();
  const std::size_t n = succ.size();
  constexpr std::uint32_t unknown = std::numeric_limits<std::uint32_t>::max();
  constexpr std::uint32_t lost_mark = unknown - 1;
  constexpr std::uint32_t on_path = unknown - 2;

  std::vector<std::uint32_t> sink(n, unknown);
  std::vector<std::uint32_t> path;
  for (std::uint32_t start = 0; start < n; ++start) {
    if (sink[start] != unknown || g.voter[start]) continue;
    path.clear();
    std::uint32_t cur = start;
    while (sink[cur] == unknown && !g.voter[cur]) {
      sink[cur] = on_path;
      path.push_back(cur);
      cur = succ[cur].value;
    }
    std::uint32_t resolved;
    if (g.voter[cur]) {
      resolved = cur;
    } else if (sink[cur] == on_path) {
      resolved = lost_mark;  // the walk closed a cycle without voters
    } else {
      resolved = sink[cur];
    }
    for (const std::uint32_t node : path) sink[node] = resolved;
  }

  tally_result r;
  r.cast.assign(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t dest = g.voter[i] ? i : sink[i];
    if (dest == lost_mark) {
      ++r.lost;
    } else {
      ++r.cast[dest];
    }
  }
  return r;
}

// Largest number of Bernoulli trials enumerate_expected_weight will expand
// (about 3e7 outcomes); larger inputs belong to Monte Carlo sampling.
inline constexpr std::size_t enumeration_trial_limit = 25;

// Exact expected ballots of the target, conditional on the target voting:
// the probability-weighted tally over every outcome of the voting trials.
// Only agents whose delegation path reaches the target can change its tally;
// everyone else's trial is marginalized out, so the expansion is 2^|in-tree|.
inline double enumerate_expected_weight(const suspendible_profile& sp, agent_id target) {
  const delegation_profile& base = sp.profile();
  base.require_member(target);
  const std::size_t n = base.size();
  const delegation_profile suspended = suspend(base, {target});
  const auto& succ = suspended.successors();

  std::vector<std::vector<std::uint32_t>> children(n);
  for (std::uint32_t j = 0; j < n; ++j) {
    const std::uint32_t to = succ[j].value;
    if (to != j) children[to].push_back(j);
  }
  std::vector<std::uint32_t> in_tree;
  std::vector<std::uint32_t> stack{target.value};
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    for (const std::uint32_t c : children[v]) {
      in_tree.push_back(c);
      stack.push_back(c);
    }
  }
  std::sort(in_tree.begin(), in_tree.end());

  if (in_tree.size() > enumeration_trial_limit) {
    throw too_large("exact enumeration would expand 2^" + std::to_string(in_tree.size()) +
                    " voting outcomes (limit 2^" + std::to_string(enumeration_trial_limit) +
                    "); use Monte Carlo sampling instead");
  }
  const std::size_t m = in_tree.size();

  // sub-universe: the in-tree agents (ascending) plus the target as agent m
  std::vector<std::uint32_t> local_of(n, std::numeric_limits<std::uint32_t>::max());
  for (std::uint32_t k = 0; k < m; ++k) local_of[in_tree[k]] = k;
  local_of[target.value] = static_cast<std::uint32_t>(m);
  std::vector<agent_id> local_base(m + 1);
  for (std::uint32_t k = 0; k < m; ++k) {
    local_base[k] = agent_id{local_of[succ[in_tree[k]].value]};
  }
  local_base[m] = agent_id{static_cast<std::uint32_t>(m)};

  double total = 0.0;
  double compensation = 0.0;  // Kahan term
  const std::uint64_t outcomes = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < outcomes; ++mask) {
    double pr = 1.0;
    for (std::uint32_t k = 0; k < m; ++k) {
      const double pk = sp.vote_probs()[in_tree[k]];
      pr *= (mask >> k & 1) ? pk : 1.0 - pk;
    }
    if (pr == 0.0) continue;

    std::vector<agent_id> realized = local_base;
    std::vector<bool> voter(m + 1, false);
    voter[m] = true;
    for (std::uint32_t k = 0; k < m; ++k) {
      if (mask >> k & 1) {
        realized[k] = agent_id{k};
        voter[k] = true;
      }
    }
    const tally_result t = tally(realized_graph(delegation_profile(std::move(realized)),
                                                std::move(voter)));
    const double term = pr * static_cast<double>(t.cast[m]) - compensation;
    const double accumulated = total + term;
    compensation = (accumulated - total) - term;
    total = accumulated;
  }
  return total;
}

struct monte_carlo_result {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const monte_carlo_result&, const monte_carlo_result&) = default;
};

// Seeded Monte Carlo estimate of the target's expected ballots. Sample k uses
// the substream (seed, k) and the target is forced to vote, mirroring the
// conditioning of expected_weight. Accumulation is sequential Welford in
// sample order, so a given (seed, samples) pair is bit-reproducible.
inline monte_carlo_result monte_carlo_expected_weight(const suspendible_profile& sp,
                                                      agent_id target, std::uint64_t samples,
                                                      std::uint64_t seed) {
  sp.profile().require_member(target);
  if (samples < 2) {
    throw validation_error("invalid-samples", "at least 2 samples are required, got " +
                                                  std::to_string(samples));
  }
  const agent_id forced[1] = {target};
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t k = 0; k < samples; ++k) {
    sample_rng rng(seed, k);
    const realized_graph g = sample_graph(sp, rng, forced);
    const double x = static_cast<double>(tally(g).cast[target.value]);
    const double delta = x - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (x - mean);
  }
  const double variance = m2 / static_cast<double>(samples - 1);
  return monte_carlo_result{mean, std::sqrt(variance / static_cast<double>(samples)), samples,
                            seed};
}

}  // namespace liqdem
