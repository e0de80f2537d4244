#include "uavnav/td3.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace uavnav {

void Td3Config::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("Td3Config: ") + what);
  };
  require(!hidden.empty(), "need at least one hidden layer");
  for (int h : hidden) require(h > 0, "hidden widths must be positive");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  require(actor_lr > 0.0 && critic_lr > 0.0, "learning rates must be positive");
  require(expl_noise >= 0.0 && target_noise >= 0.0 && noise_clip >= 0.0,
          "noise parameters must be non-negative");
  require(policy_delay >= 1, "policy_delay must be at least 1");
  require(batch_size > 0, "batch_size must be positive");
  require(total_steps > 0, "total_steps must be positive");
  replay.validate();
}

Action select_action(const Mlp& actor, const Observation& obs, double noise_std, Rng& rng) {
  Eigen::MatrixXd x(1, kObsDim);
  for (int i = 0; i < kObsDim; ++i) x(0, i) = obs.s[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd y = actor.forward(x);
  Action a{y(0, 0), y(0, 1)};
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    a.lambda_v += noise(rng);
    a.lambda_theta += noise(rng);
  }
  a.lambda_v = std::clamp(a.lambda_v, -1.0, 1.0);
  a.lambda_theta = std::clamp(a.lambda_theta, -1.0, 1.0);
  return a;
}

Eigen::VectorXd td_targets(const Mlp& actor_target, const Mlp& critic1_target,
                           const Mlp& critic2_target, const Eigen::MatrixXd& next_obs,
                           const Eigen::VectorXd& reward, const Eigen::VectorXd& done,
                           double gamma, double target_noise, double noise_clip, Rng& rng) {
  const Eigen::Index b = next_obs.rows();
  Eigen::MatrixXd act = actor_target.forward(next_obs);
  if (target_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, target_noise);
    for (Eigen::Index i = 0; i < b; ++i) {
      for (Eigen::Index j = 0; j < act.cols(); ++j) {
        act(i, j) += std::clamp(noise(rng), -noise_clip, noise_clip);
      }
    }
  }
  act = act.cwiseMax(-1.0).cwiseMin(1.0);
  Eigen::MatrixXd x(b, next_obs.cols() + act.cols());
  x << next_obs, act;
  const Eigen::VectorXd q1 = critic1_target.forward(x).col(0);
  const Eigen::VectorXd q2 = critic2_target.forward(x).col(0);
  return (reward.array() + gamma * (1.0 - done.array()) * q1.cwiseMin(q2).array()).matrix();
}

Td3Learner::Td3Learner(int obs_dim, int act_dim, const Td3Config& cfg, Rng& rng)
    : Td3Learner(make_td3_nets(obs_dim, act_dim, cfg.hidden, rng), cfg) {}

Td3Learner::Td3Learner(Td3Nets nets, const Td3Config& cfg)
    : cfg_(cfg),
      nets_(std::move(nets)),
      actor_opt_(nets_.actor),
      critic1_opt_(nets_.critic1),
      critic2_opt_(nets_.critic2) {
  cfg_.validate();
}

void Td3Learner::update(const std::vector<Transition>& batch, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("Td3Learner::update: empty batch");
  const auto b = static_cast<Eigen::Index>(batch.size());
  const int obs_dim = nets_.actor.dims().front();
  const int act_dim = nets_.actor.dims().back();
  Eigen::MatrixXd obs(b, obs_dim), next_obs(b, obs_dim), act(b, act_dim);
  Eigen::VectorXd reward(b), done(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const Transition& t = batch[static_cast<std::size_t>(i)];
    for (int j = 0; j < obs_dim; ++j) {
      obs(i, j) = t.obs[static_cast<std::size_t>(j)];
      next_obs(i, j) = t.next_obs[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < act_dim; ++j) act(i, j) = t.action[static_cast<std::size_t>(j)];
    reward(i) = t.reward;
    done(i) = t.done ? 1.0 : 0.0;
  }

  const Eigen::VectorXd y =
      td_targets(nets_.actor_target, nets_.critic1_target, nets_.critic2_target, next_obs,
                 reward, done, cfg_.gamma, cfg_.target_noise, cfg_.noise_clip, rng);

  Eigen::MatrixXd x(b, obs_dim + act_dim);
  x << obs, act;
  const double inv_b = 1.0 / static_cast<double>(b);
  {
    Tape tape;
    const Eigen::MatrixXd q = nets_.critic1.forward(x, tape);
    const Eigen::MatrixXd dy = 2.0 * inv_b * (q.col(0) - y);
    adam_step(nets_.critic1, nets_.critic1.backward(tape, dy), critic1_opt_,
              {cfg_.critic_lr});
  }
  {
    Tape tape;
    const Eigen::MatrixXd q = nets_.critic2.forward(x, tape);
    const Eigen::MatrixXd dy = 2.0 * inv_b * (q.col(0) - y);
    adam_step(nets_.critic2, nets_.critic2.backward(tape, dy), critic2_opt_,
              {cfg_.critic_lr});
  }

  ++n_updates_;
  if (n_updates_ % cfg_.policy_delay != 0) return;

  // Maximize Q1 along the policy: push -dQ/da through the frozen critic.
  Tape actor_tape;
  const Eigen::MatrixXd pi = nets_.actor.forward(obs, actor_tape);
  Eigen::MatrixXd xq(b, obs_dim + act_dim);
  xq << obs, pi;
  Tape critic_tape;
  nets_.critic1.forward(xq, critic_tape);
  Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(b, 1, -inv_b);
  Eigen::MatrixXd dx;
  nets_.critic1.backward(critic_tape, dq, &dx);
  const Eigen::MatrixXd da = dx.rightCols(act_dim);
  adam_step(nets_.actor, nets_.actor.backward(actor_tape, da), actor_opt_, {cfg_.actor_lr});

  polyak_update(nets_.actor_target, nets_.actor, cfg_.tau);
  polyak_update(nets_.critic1_target, nets_.critic1, cfg_.tau);
  polyak_update(nets_.critic2_target, nets_.critic2, cfg_.tau);
}

namespace {

const char* outcome_name(StepOutcome o) {
  switch (o) {
    case StepOutcome::Success: return "success";
    case StepOutcome::Collision: return "collision";
    case StepOutcome::None: return "timeout";
  }
  return "timeout";
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrainStats train(const TrainOptions& opts) {
  opts.world.validate();
  opts.td3.validate();
  const Td3Config& cfg = opts.td3;

  Rng master(cfg.seed);
  const auto s_net = master();
  const auto s_env = master();
  const auto s_act = master();
  const auto s_learn = master();
  Rng rng_net(s_net), rng_env(s_env), rng_act(s_act), rng_learn(s_learn);

  Td3Learner learner(kObsDim, 2, cfg, rng_net);
  ReplayConfig rc = cfg.replay;
  rc.temp_capacity = std::max(rc.temp_capacity, static_cast<std::size_t>(opts.world.episode_cap));
  ReplayPools pools(rc);

  std::ofstream log;
  if (!opts.log_path.empty()) {
    log.open(opts.log_path, std::ios::trunc);
    if (!log) throw std::runtime_error("train: cannot open log " + opts.log_path.string());
    log << "episode,steps,outcome,return,wall_ms\n";
  }

  const Rect bounds = opts.world.bounds();
  const Rect motion_box = opts.world.target_motion_box();
  const double dt = opts.world.physics_dt;
  std::uniform_real_distribution<double> box(-1.0, 1.0);

  struct EpisodeRecord {
    bool success;
    int steps;
  };
  std::vector<EpisodeRecord> records;
  std::size_t global_step = 0;
  int episode = 0;

  while (global_step < cfg.total_steps) {
    const auto t0 = std::chrono::steady_clock::now();
    WorldState world = randomize_scenario(opts.world, rng_env);
    Observation obs = build_observation(world, opts.world);
    double ep_return = 0.0;
    int ep_steps = 0;
    StepOutcome final_outcome = StepOutcome::None;

    for (int tick = 0; tick < opts.world.episode_cap && global_step < cfg.total_steps; ++tick) {
      Action a;
      if (global_step < cfg.learning_starts) {
        a.lambda_v = box(rng_act);
        a.lambda_theta = box(rng_act);
      } else {
        a = select_action(learner.nets().actor, obs, cfg.expl_noise, rng_act);
      }

      world.uav = step_uav(world.uav, a, opts.world, dt);
      step_obstacles(world.obstacles, bounds, dt);
      world.target = step_target(world.target, motion_box, opts.world, rng_env, dt);
      ++world.step_count;

      StepOutcome outcome = StepOutcome::None;
      if (detect_collision(world.uav, world.obstacles, opts.world) != CollisionResult::None) {
        outcome = StepOutcome::Collision;
      } else if ((world.uav.position - world.target.position).norm() <=
                 opts.world.success_threshold) {
        outcome = StepOutcome::Success;
      }
      const Observation next = build_observation(world, opts.world);

      double r = base_reward(outcome, world.uav.speed, opts.reward);
      switch (opts.reward.shaping) {
        case ShapingKind::Pbrs:
          r += shaping_reward(obs, next, opts.reward);
          break;
        case ShapingKind::Heuristic:
          r += heuristic_distance_penalty(next, opts.reward);
          break;
        case ShapingKind::None:
          break;
      }

      Transition t;
      for (int j = 0; j < kObsDim; ++j) {
        t.obs[static_cast<std::size_t>(j)] = static_cast<float>(obs.s[static_cast<std::size_t>(j)]);
        t.next_obs[static_cast<std::size_t>(j)] =
            static_cast<float>(next.s[static_cast<std::size_t>(j)]);
      }
      t.action = {static_cast<float>(a.lambda_v), static_cast<float>(a.lambda_theta)};
      t.reward = static_cast<float>(r);
      t.done = outcome != StepOutcome::None;
      pools.push(t);

      ep_return += r;
      ++ep_steps;
      ++global_step;
      obs = next;

      if (global_step >= cfg.learning_starts && pools.can_sample(cfg.batch_size)) {
        learner.update(pools.sample(cfg.batch_size, rng_learn), rng_learn);
      }
      if (t.done) {
        final_outcome = outcome;
        break;
      }
    }

    pools.finish_episode(final_outcome == StepOutcome::Success);
    ++episode;
    records.push_back({final_outcome == StepOutcome::Success, ep_steps});

    if (log.is_open()) {
      const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
      log << episode << ',' << ep_steps << ',' << outcome_name(final_outcome) << ','
          << format_g17(ep_return) << ',' << wall_ms << '\n';
    }
  }

  if (!opts.checkpoint_path.empty()) {
    save_checkpoint(opts.checkpoint_path, learner.nets());
  }

  TrainStats stats;
  stats.episodes = episode;
  stats.steps = global_step;
  if (records.empty()) return stats;
  const std::size_t tail = std::min<std::size_t>(100, records.size());
  std::size_t wins = 0;
  double steps_sum = 0.0;
  for (std::size_t i = records.size() - tail; i < records.size(); ++i) {
    wins += records[i].success ? 1u : 0u;
    steps_sum += records[i].steps;
  }
  stats.tail_success_rate = static_cast<double>(wins) / static_cast<double>(tail);
  stats.tail_mean_steps = steps_sum / static_cast<double>(tail);
  return stats;
}

}  // namespace uavnav
