#include <doctest.h>

#include <numeric>

#include "uavnav/toy_mdp.hpp"

using namespace uavnav;

namespace {

Observation obs_with(double d, double alpha, double ray_sum) {
  Observation o;
  o.raw_distance = d;
  o.raw_alpha = alpha;
  o.raw_rays.fill(ray_sum / kPolicyRays);
  o.s[16] = d / 100.0;  // the normalized-distance slot the plain penalty reads
  return o;
}

}  // namespace

TEST_CASE("base reward combines terminal bonus, penalty and velocity term") {
  RewardParams p;
  p.v_c = 3.0;
  CHECK(base_reward(StepOutcome::Success, p.v_c, p) == doctest::Approx(p.k_t));
  CHECK(base_reward(StepOutcome::Collision, p.v_c, p) == doctest::Approx(-p.k_c));
  p.k_v = 0.1;
  CHECK(base_reward(StepOutcome::None, 5.0, p) == doctest::Approx(0.2));

  // Linear in v with slope k_v.
  const double r1 = base_reward(StepOutcome::None, 1.0, p);
  const double r2 = base_reward(StepOutcome::None, 2.0, p);
  const double r4 = base_reward(StepOutcome::None, 4.0, p);
  CHECK(r2 - r1 == doctest::Approx(p.k_v));
  CHECK(r4 - r2 == doctest::Approx(2.0 * p.k_v));
}

TEST_CASE("shaping reward matches the three-term difference formula") {
  RewardParams p;
  p.k_d = 1.0;
  p.k_theta = 0.0;
  p.k_obs = 0.0;
  CHECK(shaping_reward(obs_with(10, 0, 0), obs_with(8, 0, 0), p) == doctest::Approx(2.0));

  p.k_d = 0.0;
  p.k_theta = 0.1;
  CHECK(shaping_reward(obs_with(5, kPi / 2, 0), obs_with(5, kPi / 4, 0), p) ==
        doctest::Approx(0.1 * (kPi / 4) * kPi));

  p.k_theta = 0.0;
  p.k_obs = 0.005;
  CHECK(shaping_reward(obs_with(5, 0, 90.0), obs_with(5, 0, 126.0), p) ==
        doctest::Approx(0.005 * 36.0));

  const Observation same = obs_with(3.0, 0.4, 50.0);
  RewardParams all;
  CHECK(shaping_reward(same, same, all) == doctest::Approx(0.0));
}

TEST_CASE("shaping telescopes over a trajectory") {
  RewardParams p;
  Rng rng(3);
  std::uniform_real_distribution<double> ud(0.0, 100.0);
  std::uniform_real_distribution<double> ua(0.0, kPi);
  std::vector<Observation> traj;
  for (int i = 0; i < 50; ++i) {
    Observation o;
    o.raw_distance = ud(rng);
    o.raw_alpha = ua(rng);
    for (auto& r : o.raw_rays) r = ud(rng);
    traj.push_back(o);
  }
  auto phi = [&p](const Observation& o) {
    const double rays = std::accumulate(o.raw_rays.begin(), o.raw_rays.end(), 0.0);
    return -p.k_d * o.raw_distance - p.k_theta * std::abs(o.raw_alpha) * kPi + p.k_obs * rays;
  };
  double total = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    total += shaping_reward(traj[i - 1], traj[i], p);
  }
  CHECK(total == doctest::Approx(phi(traj.back()) - phi(traj.front())).epsilon(1e-9));
}

TEST_CASE("heuristic distance penalty is not a potential difference") {
  RewardParams p;
  p.k_heur = 0.1;
  const Observation near = obs_with(10.0, 0.0, 0.0);
  const Observation far = obs_with(50.0, 0.0, 0.0);
  CHECK(heuristic_distance_penalty(near, p) > heuristic_distance_penalty(far, p));
  CHECK(heuristic_distance_penalty(near, p) < 0.0);
}

TEST_CASE("value iteration solves the gridworld") {
  const TabularMdp grid = make_gridworld(4, 4, -1.0, 10.0);
  grid.validate();
  const ValueIterationResult res = value_iterate(grid, 0.95);
  const int goal = 15;
  CHECK(res.values[goal] == doctest::Approx(0.0));
  // One step from the goal: the move costs 1 and pays the bonus on entry.
  CHECK(res.values[14] == doctest::Approx(9.0));
  CHECK(res.values[11] == doctest::Approx(9.0));
  // The corner state is strictly worse than its neighbors.
  CHECK(res.values[0] < res.values[1]);
  CHECK_THROWS_AS(value_iterate(grid, 1.0), std::invalid_argument);
}

TEST_CASE("random mdp rows are stochastic and value iteration converges") {
  Rng rng(9);
  const TabularMdp mdp = make_random_mdp(6, 3, rng);
  mdp.validate();
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      double sum = 0.0;
      for (int sn = 0; sn < mdp.n_states; ++sn) sum += mdp.transition[mdp.idx(s, a, sn)];
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  const ValueIterationResult res = value_iterate(mdp, 0.9);
  CHECK(res.iterations > 0);
  for (double v : res.values) CHECK(std::isfinite(v));
}

TEST_CASE("potential shaping preserves greedy policies and shifts values by -phi") {
  const TabularMdp grid = make_gridworld(5, 5, -1.0, 10.0);
  const std::vector<double> phi = gridworld_distance_potential(5, 5, 1.0);
  CHECK(pbrs_invariance_check(grid, phi, 0.99, 1e-9));

  const std::vector<double> zero(static_cast<std::size_t>(grid.n_states), 0.0);
  CHECK(pbrs_invariance_check(grid, zero, 0.99, 1e-9));

  std::uniform_real_distribution<double> up(-10.0, 10.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const TabularMdp mdp = make_random_mdp(8, 3, rng);
    std::vector<double> pot(static_cast<std::size_t>(mdp.n_states));
    for (auto& v : pot) v = up(rng);
    CHECK(pbrs_invariance_check(mdp, pot, 0.95, 1e-9));
  }
}

TEST_CASE("a non-potential reward term can change the greedy policy") {
  // Two states, two actions: action 0 stays, action 1 swaps. Base reward favors
  // swapping from state 0; adding a state-dependent bonus (not a potential
  // difference) flips the preference. This is the failure shaping avoids.
  TabularMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.transition.assign(8, 0.0);
  mdp.reward.assign(8, 0.0);
  auto set = [&mdp](int s, int a, int sn, double pr, double r) {
    mdp.transition[mdp.idx(s, a, sn)] = pr;
    mdp.reward[mdp.idx(s, a, sn)] = r;
  };
  set(0, 0, 0, 1.0, 0.0);
  set(0, 1, 1, 1.0, 1.0);
  set(1, 0, 1, 1.0, 0.0);
  set(1, 1, 0, 1.0, 0.0);
  const ValueIterationResult base = value_iterate(mdp, 0.9);
  CHECK(base.greedy[0] == 1);

  TabularMdp bonus = mdp;
  bonus.reward[bonus.idx(0, 0, 0)] += 5.0;  // flat bonus for staying put
  const ValueIterationResult shaped = value_iterate(bonus, 0.9);
  CHECK(shaped.greedy[0] == 0);
}
