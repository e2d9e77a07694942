#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liqdem/graph.hpp"

namespace liqdem {

// A delegation profile plus, per agent, the probability of voting directly.
// Voting suspends the agent's outgoing delegation for that ballot. Endpoints
// always vote: their probability is pinned to 1 regardless of the input.
class suspendible_profile {
public:
  suspendible_profile(delegation_profile profile, std::vector<double> vote_prob)
      : profile_(std::move(profile)), prob_(std::move(vote_prob)) {
    if (prob_.size() != profile_.size()) {
      throw std::invalid_argument("vote probabilities must cover every agent (" +
                                  std::to_string(prob_.size()) + " given, " +
                                  std::to_string(profile_.size()) + " agents)");
    }
    for (std::uint32_t i = 0; i < prob_.size(); ++i) {
      if (!(prob_[i] >= 0.0 && prob_[i] <= 1.0)) {
        throw invalid_probability("vote probability of agent " + std::to_string(i) + " is " +
                                  std::to_string(prob_[i]) + ", outside [0, 1]");
      }
    }
    pin_endpoints();
  }

  suspendible_profile(delegation_profile profile, double uniform_prob)
      : profile_(std::move(profile)) {
    if (!(uniform_prob >= 0.0 && uniform_prob <= 1.0)) {
      throw invalid_probability("uniform vote probability " + std::to_string(uniform_prob) +
                                " is outside [0, 1]");
    }
    prob_.assign(profile_.size(), uniform_prob);
    pin_endpoints();
  }

  const delegation_profile& profile() const noexcept { return profile_; }

  std::size_t size() const noexcept { return profile_.size(); }

  double vote_prob(agent_id a) const {
    profile_.require_member(a);
    return prob_[a.value];
  }

  const std::vector<double>& vote_probs() const noexcept { return prob_; }

private:
  void pin_endpoints() {
    const auto& succ = profile_.successors();
    for (std::uint32_t i = 0; i < prob_.size(); ++i) {
      if (succ[i].value == i) prob_[i] = 1.0;
    }
  }

  delegation_profile profile_;
  std::vector<double> prob_;
};

}  // namespace liqdem
