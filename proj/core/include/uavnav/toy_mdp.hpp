#pragma once

#include "uavnav/reward.hpp"
#include "uavnav/world.hpp"

namespace uavnav {

/// Dense MDP with Dirichlet-like random rows and rewards uniform in [-1, 1].
TabularMdp make_random_mdp(int n_states, int n_actions, Rng& rng);

/// Deterministic four-action grid, states indexed y*width + x. Moves off the
/// edge stay in place. Every move pays step_cost, plus goal_reward when it
/// enters the bottom-right goal; the goal is absorbing with zero reward.
TabularMdp make_gridworld(int width, int height, double step_cost, double goal_reward);

/// phi(s) = -scale * manhattan(s, goal), zero at the (absorbing) goal.
std::vector<double> gridworld_distance_potential(int width, int height, double scale);

}  // namespace uavnav
