#include "uavnav/toy_mdp.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace uavnav {

TabularMdp make_random_mdp(int n_states, int n_actions, Rng& rng) {
  if (n_states <= 0 || n_actions <= 0) {
    throw std::invalid_argument("make_random_mdp: sizes must be positive");
  }
  TabularMdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  const auto n = static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions) *
                 static_cast<std::size_t>(n_states);
  m.transition.resize(n);
  m.reward.resize(n);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> r(-1.0, 1.0);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double total = 0.0;
      for (int sn = 0; sn < n_states; ++sn) {
        const double w = -std::log(1.0 - u01(rng));  // Exp(1), so rows are Dirichlet(1)
        m.transition[m.idx(s, a, sn)] = w;
        total += w;
        m.reward[m.idx(s, a, sn)] = r(rng);
      }
      for (int sn = 0; sn < n_states; ++sn) m.transition[m.idx(s, a, sn)] /= total;
    }
  }
  m.validate();
  return m;
}

TabularMdp make_gridworld(int width, int height, double step_cost, double goal_reward) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("make_gridworld: sizes must be positive");
  }
  TabularMdp m;
  m.n_states = width * height;
  m.n_actions = 4;
  const auto n = static_cast<std::size_t>(m.n_states) * 4u * static_cast<std::size_t>(m.n_states);
  m.transition.assign(n, 0.0);
  m.reward.assign(n, 0.0);
  const int goal = m.n_states - 1;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int s = y * width + x;
      for (int a = 0; a < 4; ++a) {
        int nx = x, ny = y;
        if (s != goal) {
          switch (a) {
            case 0: nx = std::min(x + 1, width - 1); break;
            case 1: nx = std::max(x - 1, 0); break;
            case 2: ny = std::min(y + 1, height - 1); break;
            case 3: ny = std::max(y - 1, 0); break;
          }
        }
        const int sn = ny * width + nx;
        m.transition[m.idx(s, a, sn)] = 1.0;
        if (s != goal) {
          m.reward[m.idx(s, a, sn)] = step_cost + (sn == goal ? goal_reward : 0.0);
        }
      }
    }
  }
  m.validate();
  return m;
}

std::vector<double> gridworld_distance_potential(int width, int height, double scale) {
  std::vector<double> phi(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  const int gx = width - 1, gy = height - 1;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      phi[static_cast<std::size_t>(y * width + x)] =
          -scale * (std::abs(x - gx) + std::abs(y - gy));
    }
  }
  return phi;
}

}  // namespace uavnav
