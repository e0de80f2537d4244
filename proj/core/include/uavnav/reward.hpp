#pragma once

#include <span>
#include <vector>

#include "uavnav/observe.hpp"

namespace uavnav {

enum class StepOutcome { None, Success, Collision };

enum class ShapingKind { Pbrs, Heuristic, None };

struct RewardParams {
  double k_t = 20.0;      // success bonus
  double k_c = 20.0;      // collision penalty
  double k_v = 0.05;      // velocity gain
  double k_d = 0.05;      // distance-progress gain
  double k_theta = 0.1;   // alignment-progress gain
  double k_obs = 0.005;   // clearance-progress gain
  double v_c = 3.0;       // cruise speed the velocity term rewards above
  double gamma = 0.99;    // trainer discount; the shaping difference itself uses 1
  ShapingKind shaping = ShapingKind::Pbrs;
  double k_heur = 0.1;    // gain of the non-potential distance penalty
};

/// Success bonus, collision penalty and the velocity term k_v*(v - v_c).
double base_reward(StepOutcome outcome, double v, const RewardParams& p);

/// Potential-difference shaping between consecutive observations:
///   k_d*(d_prev - d_cur) + k_theta*(|a_prev| - |a_cur|)*pi + k_obs*sum(ray_cur - ray_prev).
double shaping_reward(const Observation& prev, const Observation& cur, const RewardParams& p);

/// Plain per-step distance penalty -k_heur * d/diag. Unlike shaping_reward this
/// is not a potential difference, so it can change the optimal policy.
double heuristic_distance_penalty(const Observation& cur, const RewardParams& p);

/// Dense tabular MDP with transition kernel P(s'|s,a) and reward R(s,a,s').
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [(s*A + a)*S + s']
  std::vector<double> reward;      // same indexing

  std::size_t idx(int s, int a, int sn) const {
    return (static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
            static_cast<std::size_t>(a)) * static_cast<std::size_t>(n_states) +
           static_cast<std::size_t>(sn);
  }
  void validate() const;  // shape + row-stochastic check, throws
};

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<int> greedy;          // argmax action per state
  std::vector<bool> unique_argmax;  // best action beats runner-up by a clear gap
  int iterations = 0;
};

/// Exact value iteration to sup-norm convergence. Throws for gamma >= 1.
ValueIterationResult value_iterate(const TabularMdp& mdp, double gamma,
                                   double tol = 1e-13, int max_iter = 200000);

/// Solves the MDP twice, once with rewards shaped by gamma*phi(s') - phi(s),
/// and returns true iff greedy policies agree at every unique-argmax state and
/// the shaped values equal base values minus phi up to tol. (The additive
/// shaping term telescopes to -phi(s0), so the literal offset is -phi.)
bool pbrs_invariance_check(const TabularMdp& mdp, std::span<const double> potential,
                           double gamma, double tol);

}  // namespace uavnav
