#include "uavnav/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavnav {

double base_reward(StepOutcome outcome, double v, const RewardParams& p) {
  double r = p.k_v * (v - p.v_c);
  if (outcome == StepOutcome::Success) r += p.k_t;
  if (outcome == StepOutcome::Collision) r -= p.k_c;
  return r;
}

double shaping_reward(const Observation& prev, const Observation& cur, const RewardParams& p) {
  const double r_d = p.k_d * (prev.raw_distance - cur.raw_distance);
  const double r_theta = p.k_theta * (std::abs(prev.raw_alpha) - std::abs(cur.raw_alpha)) * kPi;
  double clearance = 0.0;
  for (int i = 0; i < kPolicyRays; ++i) {
    clearance += cur.raw_rays[static_cast<std::size_t>(i)] -
                 prev.raw_rays[static_cast<std::size_t>(i)];
  }
  return r_d + r_theta + p.k_obs * clearance;
}

double heuristic_distance_penalty(const Observation& cur, const RewardParams& p) {
  return -p.k_heur * cur.s[16];
}

void TabularMdp::validate() const {
  if (n_states <= 0 || n_actions <= 0) {
    throw std::invalid_argument("TabularMdp: empty state or action space");
  }
  const std::size_t need = static_cast<std::size_t>(n_states) *
                           static_cast<std::size_t>(n_actions) *
                           static_cast<std::size_t>(n_states);
  if (transition.size() != need || reward.size() != need) {
    throw std::invalid_argument("TabularMdp: table size mismatch");
  }
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double row = 0.0;
      for (int sn = 0; sn < n_states; ++sn) {
        const double pr = transition[idx(s, a, sn)];
        if (pr < 0.0) throw std::invalid_argument("TabularMdp: negative probability");
        row += pr;
      }
      if (std::abs(row - 1.0) > 1e-9) {
        throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
      }
    }
  }
}

ValueIterationResult value_iterate(const TabularMdp& mdp, double gamma, double tol,
                                   int max_iter) {
  mdp.validate();
  if (gamma >= 1.0 || gamma < 0.0) {
    throw std::invalid_argument("value_iterate: gamma must lie in [0, 1)");
  }
  const int S = mdp.n_states;
  const int A = mdp.n_actions;
  ValueIterationResult res;
  res.values.assign(static_cast<std::size_t>(S), 0.0);
  std::vector<double> next(static_cast<std::size_t>(S), 0.0);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        double q = 0.0;
        for (int sn = 0; sn < S; ++sn) {
          const double pr = mdp.transition[mdp.idx(s, a, sn)];
          if (pr == 0.0) continue;
          q += pr * (mdp.reward[mdp.idx(s, a, sn)] + gamma * res.values[static_cast<std::size_t>(sn)]);
        }
        best = std::max(best, q);
      }
      next[static_cast<std::size_t>(s)] = best;
      delta = std::max(delta, std::abs(best - res.values[static_cast<std::size_t>(s)]));
    }
    res.values.swap(next);
    if (delta <= tol) break;
  }
  res.iterations = iter + 1;

  res.greedy.assign(static_cast<std::size_t>(S), 0);
  res.unique_argmax.assign(static_cast<std::size_t>(S), false);
  constexpr double kGap = 1e-7;
  for (int s = 0; s < S; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int a = 0; a < A; ++a) {
      double q = 0.0;
      for (int sn = 0; sn < S; ++sn) {
        const double pr = mdp.transition[mdp.idx(s, a, sn)];
        if (pr == 0.0) continue;
        q += pr * (mdp.reward[mdp.idx(s, a, sn)] + gamma * res.values[static_cast<std::size_t>(sn)]);
      }
      if (q > best) {
        second = best;
        best = q;
        arg = a;
      } else if (q > second) {
        second = q;
      }
    }
    res.greedy[static_cast<std::size_t>(s)] = arg;
    res.unique_argmax[static_cast<std::size_t>(s)] = best - second > kGap;
  }
  return res;
}

bool pbrs_invariance_check(const TabularMdp& mdp, std::span<const double> potential,
                           double gamma, double tol) {
  if (potential.size() != static_cast<std::size_t>(mdp.n_states)) {
    throw std::invalid_argument("pbrs_invariance_check: potential size mismatch");
  }
  TabularMdp shaped = mdp;
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      for (int sn = 0; sn < mdp.n_states; ++sn) {
        shaped.reward[shaped.idx(s, a, sn)] +=
            gamma * potential[static_cast<std::size_t>(sn)] - potential[static_cast<std::size_t>(s)];
      }
    }
  }
  // Converge well below the comparison tolerance.
  const double vi_tol = std::min(tol, 1e-9) * (1.0 - gamma) * 0.1;
  const auto base = value_iterate(mdp, gamma, vi_tol);
  const auto mod = value_iterate(shaped, gamma, vi_tol);

  for (int s = 0; s < mdp.n_states; ++s) {
    const auto si = static_cast<std::size_t>(s);
    if (base.unique_argmax[si] && mod.unique_argmax[si] && base.greedy[si] != mod.greedy[si]) {
      return false;
    }
    const double offset = mod.values[si] - base.values[si] + potential[si];
    if (std::abs(offset) > tol) return false;
  }
  return true;
}

}  // namespace uavnav
