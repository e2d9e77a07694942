#pragma once

#include <cstdint>
#include <vector>

#include "liqdem/graph.hpp"

namespace liqdem {

// Single chain: agent 0 is the head, each agent delegates to the next, the
// last agent is the terminal endpoint. `delegators` agents feed the endpoint.
inline delegation_profile chain_profile(std::size_t delegators) {
  std::vector<agent_id> succ(delegators + 1);
  for (std::size_t i = 0; i < delegators; ++i) succ[i] = agent_id{static_cast<std::uint32_t>(i + 1)};
  succ[delegators] = agent_id{static_cast<std::uint32_t>(delegators)};
  return delegation_profile(std::move(succ));
}

// Star: agent 0 is the hub endpoint, agents 1..spokes delegate straight to it.
inline delegation_profile star_profile(std::size_t spokes) {
  std::vector<agent_id> succ(spokes + 1, agent_id{0});
  return delegation_profile(std::move(succ));
}

}  // namespace liqdem
