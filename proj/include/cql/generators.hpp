#pragma once

#include <cstdint>

#include "cql/rng.hpp"
#include "cql/types.hpp"

namespace cql {

// Two-state chain: action 0 stays, action 1 switches; reward 1 in state 1,
// 0 in state 0; gamma 0.9; start in state 0.
TabularMdp chain2();

// Same chain with near-tied expected rewards so Bernoulli reward sampling is
// nondegenerate: r = [[0.2, 0.4], [0.9, 0.7]].
TabularMdp chain2_bernoulli();

struct GridworldSpec {
  int width = 4;
  int height = 4;
  double slip = 0.2;          // probability mass split over unintended moves
  double goal_reward = 0.9;   // expected reward for any action at the goal cell
  double gamma = 0.95;
};

// Gridworld with actions up/down/left/right, moves clamped at the borders,
// slip/3 to each unintended direction. Goal is the last cell; reward there is
// goal_reward for every action, 0 elsewhere. Start in cell 0.
TabularMdp gridworld(const GridworldSpec& spec);

struct RandomMdpSpec {
  int n_states = 5;
  int n_actions = 3;
  int branching = 0;          // successor support per (s,a); 0 means all states
  double gamma = 0.9;
  double r_max = 1.0;
  double reward_lo = 0.0;
  double reward_hi = 1.0;
  double dirichlet_concentration = 1.0;
  bool uniform_initial = true;
};

// Dirichlet transition rows over `branching` distinct successors, rewards
// uniform in [reward_lo, reward_hi]. Fully determined by spec and seed.
TabularMdp random_mdp(const RandomMdpSpec& spec, std::uint64_t seed);

// Each row drawn Dirichlet(concentration) over all actions.
Policy random_policy(int n_states, int n_actions, Rng& rng,
                     double concentration = 1.0);

}  // namespace cql
