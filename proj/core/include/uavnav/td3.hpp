#pragma once

#include <filesystem>

#include "uavnav/nn.hpp"
#include "uavnav/replay.hpp"
#include "uavnav/reward.hpp"

namespace uavnav {

struct Td3Config {
  std::vector<int> hidden = {256, 256};
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double expl_noise = 0.1;    // stddev of exploration noise on each action axis
  double target_noise = 0.2;  // target policy smoothing stddev
  double noise_clip = 0.5;
  int policy_delay = 2;
  std::size_t batch_size = 256;
  std::size_t learning_starts = 10000;  // uniform-random action warmup
  std::size_t total_steps = 1000000;
  std::uint64_t seed = 1;
  ReplayConfig replay;

  void validate() const;  // throws std::invalid_argument
};

/// actor(obs) plus optional N(0, noise_std) per axis, clipped to [-1, 1].
Action select_action(const Mlp& actor, const Observation& obs, double noise_std, Rng& rng);

/// y = r + gamma*(1 - done)*min(Q1', Q2') at the smoothed target action
/// clip(actor'(s') + clip(noise, +-noise_clip), +-1). Noise is drawn row by
/// row, lambda_v axis first; target_noise <= 0 draws nothing.
Eigen::VectorXd td_targets(const Mlp& actor_target, const Mlp& critic1_target,
                           const Mlp& critic2_target, const Eigen::MatrixXd& next_obs,
                           const Eigen::VectorXd& reward, const Eigen::VectorXd& done,
                           double gamma, double target_noise, double noise_clip, Rng& rng);

/// Twin-critic learner with delayed policy and target updates. One call to
/// update() is one critic step; every policy_delay-th call also steps the
/// actor and moves the targets.
class Td3Learner {
 public:
  Td3Learner(int obs_dim, int act_dim, const Td3Config& cfg, Rng& rng);
  Td3Learner(Td3Nets nets, const Td3Config& cfg);  // resume from a checkpoint

  void update(const std::vector<Transition>& batch, Rng& rng);

  const Td3Nets& nets() const { return nets_; }
  Td3Nets& nets() { return nets_; }
  long updates() const { return n_updates_; }

 private:
  Td3Config cfg_;
  Td3Nets nets_;
  AdamState actor_opt_;
  AdamState critic1_opt_;
  AdamState critic2_opt_;
  long n_updates_ = 0;
};

struct TrainOptions {
  WorldConfig world;
  RewardParams reward;
  Td3Config td3;
  std::filesystem::path checkpoint_path;  // empty: skip saving
  std::filesystem::path log_path;         // empty: skip the episode log
};

struct TrainStats {
  int episodes = 0;
  std::size_t steps = 0;
  double tail_success_rate = 0.0;  // over the final (up to) 100 episodes
  double tail_mean_steps = 0.0;
};

/// Environment interaction at one decision per physics tick, with one learner
/// update per step once warmup is over and both pools together can fill a
/// batch. Episodes that leave the arena score as collisions. The log gets one
/// row per episode: episode,steps,outcome,return,wall_ms (wall_ms is the only
/// non-reproducible column).
TrainStats train(const TrainOptions& opts);

}  // namespace uavnav
