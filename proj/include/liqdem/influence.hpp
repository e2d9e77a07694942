#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "liqdem/suspendible.hpp"

namespace liqdem {

using weight_vector = std::vector<double>;

// Potential voting weight: the ballots agent i would cast if everyone
// upstream abstained. w(i) counts every agent whose delegation path touches i
// (including i itself). Because the path of anyone reaching a delegation
// cycle eventually touches every cycle member, all members of a cycle share
// the whole-cycle credit: any one of them voting first collects everything
// that reaches the cycle.
inline weight_vector potential_weight(const delegation_profile& profile) {
  const std::size_t n = profile.size();
  const ultimate_decomposition decomp(profile);
  const auto& succ = profile.successors();

  // accumulate tree counts from the farthest agents inward; an agent's count
  // is final before it is pushed to its successor
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto da = decomp.distance(agent_id{a});
    const auto db = decomp.distance(agent_id{b});
    return da != db ? da > db : a < b;
  });

  std::vector<double> subtree(n, 1.0);
  std::vector<double> into_ultimate(n, 0.0);
  for (const std::uint32_t i : order) {
    if (decomp.is_ultimate(agent_id{i})) continue;
    const std::uint32_t next = succ[i].value;
    if (decomp.is_ultimate(agent_id{next})) {
      into_ultimate[next] += subtree[i];
    } else {
      subtree[next] += subtree[i];
    }
  }

  weight_vector w(n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!decomp.is_ultimate(agent_id{i})) w[i] = subtree[i];
  }
  for (const ultimate_set& set : decomp.sets()) {
    double total = static_cast<double>(set.members.size());
    for (const agent_id m : set.members) total += into_ultimate[m.value];
    for (const agent_id m : set.members) w[m.value] = total;
  }
  return w;
}

// Strict per-entry crediting: each agent counts only toward the ultimate
// agent its path first reaches, so cycle members are credited just the trees
// entering through them and non-ultimate agents always get 1. Diagnostic
// counterpart of potential_weight.
inline weight_vector potential_weight_by_ultimate_proxy(const delegation_profile& profile) {
  const std::size_t n = profile.size();
  const ultimate_decomposition decomp(profile);
  weight_vector w(n, 1.0);
  for (std::uint32_t i = 0; i < n; ++i) {
    const agent_id a{i};
    if (!decomp.is_ultimate(a)) w[decomp.entry(a).value] += 1.0;
  }
  return w;
}

// Row-stochastic matrix of the weight flow: an endpoint keeps its weight; a
// delegating agent keeps it with its voting probability and forwards it to
// its proxy otherwise. Dense storage, intended for inspection and testing at
// desk scale.
class delegation_matrix {
public:
  explicit delegation_matrix(const suspendible_profile& sp)
      : n_(sp.size()), cells_(n_ * n_, 0.0) {
    const auto& succ = sp.profile().successors();
    for (std::uint32_t i = 0; i < n_; ++i) {
      const std::uint32_t j = succ[i].value;
      if (j == i) {
        cells_[i * n_ + i] = 1.0;
      } else {
        const double p = sp.vote_prob(agent_id{i});
        cells_[i * n_ + i] = p;
        cells_[i * n_ + j] = 1.0 - p;
      }
    }
  }

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t row, std::size_t col) const { return cells_.at(row * n_ + col); }

  double row_sum(std::size_t row) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += cells_.at(row * n_ + j);
    return s;
  }

  // y = x M (left action); the vector view of one delegation step.
  std::vector<double> apply_left(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) y[j] += x[i] * cells_[i * n_ + j];
    }
    return y;
  }

private:
  std::size_t n_;
  std::vector<double> cells_;
};

// Probability, per agent j, that j's vote reaches the target through an
// unbroken chain of non-voting delegators. The target's own outgoing
// delegation is suspended first: the measure conditions on the target voting,
// so cycles through the target contribute like chains. Entry for the target
// itself is 0; its own ballot is accounted for by expected_weight.
inline std::vector<double> first_passage(const suspendible_profile& sp, agent_id target) {
  sp.profile().require_member(target);
  const delegation_profile suspended = suspend(sp.profile(), {target});
  const std::size_t n = suspended.size();
  const auto& succ = suspended.successors();

  std::vector<std::vector<std::uint32_t>> children(n);
  for (std::uint32_t j = 0; j < n; ++j) {
    const std::uint32_t to = succ[j].value;
    if (to != j) children[to].push_back(j);
  }

  std::vector<double> reach(n, 0.0);
  std::vector<std::uint32_t> queue{target.value};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t v = queue[head];
    const double downstream = v == target.value ? 1.0 : reach[v];
    for (const std::uint32_t c : children[v]) {
      reach[c] = (1.0 - sp.vote_prob(agent_id{c})) * downstream;
      queue.push_back(c);
    }
  }
  return reach;
}

// Expected ballots the target casts, conditional on the target voting: its
// own ballot plus the first-passage probability of every other agent.
inline double expected_weight(const suspendible_profile& sp, agent_id target) {
  const std::vector<double> reach = first_passage(sp, target);
  double total = 1.0;
  for (const double r : reach) total += r;
  return total;
}

inline weight_vector expected_weights(const suspendible_profile& sp) {
  weight_vector w(sp.size(), 0.0);
  for (std::uint32_t i = 0; i < sp.size(); ++i) w[i] = expected_weight(sp, agent_id{i});
  return w;
}

namespace detail {
inline void require_open_unit(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw invalid_probability("voting probability " + std::to_string(p) +
                              " must lie in (0, 1]");
  }
}
}  // namespace detail

// Expected ballots of the terminal voter of a single chain with
// `delegators` agents ahead of it, uniform voting probability p:
// sum over d = 0..delegators of (1-p)^d.
inline double expected_weight_chain(std::uint64_t delegators, double p) {
  detail::require_open_unit(p);
  const double keep = 1.0 - p;
  return (1.0 - std::pow(keep, static_cast<double>(delegators) + 1.0)) / p;
}

// Limit of expected_weight_chain as the chain grows without bound: 1/p.
inline double expected_weight_chain_limit(double p) {
  detail::require_open_unit(p);
  return 1.0 / p;
}

// Expected ballots of a voter with `direct_delegators` direct delegations and
// no deeper inflow: 1 + k(1-p). Grows linearly, unlike chain inflow.
inline double expected_weight_star(std::uint64_t direct_delegators, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw invalid_probability("voting probability " + std::to_string(p) +
                              " must lie in [0, 1]");
  }
  return 1.0 + static_cast<double>(direct_delegators) * (1.0 - p);
}

// Contribution of one maximal delegation chain of the given length to a
// target's expected weight: sum over k = 1..length of (1-p)^k.
inline double path_contribution(std::uint64_t length, double p) {
  detail::require_open_unit(p);
  const double keep = 1.0 - p;
  return keep * (1.0 - std::pow(keep, static_cast<double>(length))) / p;
}

// Limit of path_contribution for unbounded length: (1-p)/p. At most 1 extra
// expected ballot per path once p >= 1/2, however long the chain.
inline double path_contribution_limit(double p) {
  detail::require_open_unit(p);
  return (1.0 - p) / p;
}

// Equilibrium allocation of voting weight starting from the uniform
// distribution. Supported only on ultimate sets; each component's mass
// concentrates on its sink and cycles split their mass equally.
struct stationary_result {
  std::vector<double> distribution;   // sums to 1
  std::vector<double> scaled_weight;  // distribution * n
};

// Structural form of the stationary distribution: each agent's 1/n of initial
// weight ends up at its ultimate set, cycles splitting equally. Exact and
// independent of the voting probabilities. The equal split is the chain limit
// when a cycle's members share one voting probability in (0, 1); members with
// heterogeneous probabilities equilibrate proportionally to 1/(1-p_i)
// instead, which stationary_iterative reproduces.
inline stationary_result stationary_analytic(const suspendible_profile& sp) {
  const delegation_profile& profile = sp.profile();
  const std::size_t n = profile.size();
  stationary_result r{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  if (n == 0) return r;

  const ultimate_decomposition decomp(profile);
  std::vector<double> population(decomp.sets().size(), 0.0);
  for (std::uint32_t i = 0; i < n; ++i) population[decomp.set_index(agent_id{i})] += 1.0;

  for (std::size_t s = 0; s < decomp.sets().size(); ++s) {
    const ultimate_set& set = decomp.sets()[s];
    const double share = population[s] / static_cast<double>(n) /
                         static_cast<double>(set.members.size());
    for (const agent_id m : set.members) r.distribution[m.value] = share;
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    r.scaled_weight[i] = r.distribution[i] * static_cast<double>(n);
  }
  return r;
}

// Power iteration of the delegation matrix from the uniform vector, applied
// sparsely. Convergence is tested on the mean of two consecutive iterates,
// which damps the period-2 oscillation of a never-voting 2-cycle; longer
// never-voting cycles stay periodic and end in no_convergence. Agreement with
// stationary_analytic needs every delegating agent's vote_prob in (0, 1) and
// one shared probability per cycle.
inline stationary_result stationary_iterative(const suspendible_profile& sp,
                                              double tolerance = 1e-10,
                                              std::size_t max_iters = 200000) {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }
  const std::size_t n = sp.size();
  stationary_result r{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  if (n == 0) return r;

  const auto& succ = sp.profile().successors();
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n, 0.0);
  std::vector<double> averaged(n, 0.0);
  std::vector<double> prev_averaged = x;

  for (std::size_t iter = 1; iter <= max_iters; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t j = succ[i].value;
      if (j == i) {
        next[i] += x[i];
      } else {
        const double p = sp.vote_probs()[i];
        next[i] += p * x[i];
        next[j] += (1.0 - p) * x[i];
      }
    }

    double diff = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      averaged[i] = 0.5 * (x[i] + next[i]);
      diff = std::max(diff, std::abs(averaged[i] - prev_averaged[i]));
    }
    if (diff < tolerance) {
      double sum = 0.0;
      for (const double v : averaged) sum += v;
      for (std::uint32_t i = 0; i < n; ++i) {
        r.distribution[i] = averaged[i] / sum;
        r.scaled_weight[i] = r.distribution[i] * static_cast<double>(n);
      }
      return r;
    }
    prev_averaged.swap(averaged);
    x.swap(next);
  }
  throw no_convergence("stationary iteration did not reach tolerance " +
                       std::to_string(tolerance) + " within " + std::to_string(max_iters) +
                       " iterations; a cycle of never-voting agents keeps the chain periodic");
}

}  // namespace liqdem
