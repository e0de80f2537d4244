#include "uavnav/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>

namespace uavnav {
namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Rl1Hz: return "rl-1hz";
    case Mode::Rl10Hz: return "rl-10hz";
    case Mode::RlClfQp10Hz: return "rl-clf-qp-10hz";
    case Mode::RlClfCbfQp10Hz: return "rl-clf-cbf-qp-10hz";
    case Mode::RlClfCbfQpNovel10Hz: return "rl-clf-cbf-qp-novel-10hz";
  }
  return "rl-10hz";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : kAllModes) {
    if (name == mode_name(m)) return m;
  }
  throw ConfigError("unknown mode '" + name + "'");
}

bool mode_uses_filter(Mode m) {
  return m == Mode::RlClfQp10Hz || m == Mode::RlClfCbfQp10Hz ||
         m == Mode::RlClfCbfQpNovel10Hz;
}

int mode_decision_period(Mode m, double physics_dt) {
  if (m != Mode::Rl1Hz) return 1;
  return std::max(1, static_cast<int>(std::lround(1.0 / physics_dt)));
}

FilterFlags mode_filter_flags(Mode m) {
  FilterFlags f;
  f.use_obstacle = m != Mode::RlClfQp10Hz;
  f.use_ball = m != Mode::RlClfCbfQpNovel10Hz;
  return f;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Collision: return "collision";
    case Outcome::OutOfBounds: return "oob";
    case Outcome::Timeout: return "timeout";
  }
  return "timeout";
}

PolicyFn actor_policy(const Mlp& actor) {
  auto net = std::make_shared<Mlp>(actor);
  return [net](const Observation& obs) {
    Eigen::MatrixXd x(1, kObsDim);
    for (int i = 0; i < kObsDim; ++i) x(0, i) = obs.s[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd y = net->forward(x);
    return Action{std::clamp(y(0, 0), -1.0, 1.0), std::clamp(y(0, 1), -1.0, 1.0)};
  };
}

PolicyFn goto_goal_policy(const WorldConfig& cfg) {
  const double dtheta = cfg.dtheta_max;
  return [dtheta](const Observation& obs) {
    const double bearing = obs.s[15] * kPi;
    const double heading = obs.s[2] * kPi;
    const double turn = wrap_angle(bearing - heading);
    Action a;
    a.lambda_v = 1.0;
    a.lambda_theta = dtheta > 0.0 ? std::clamp(turn / dtheta, -1.0, 1.0) : 0.0;
    return a;
  };
}

EpisodeMetrics run_episode(const ScenarioConfig& sc, Mode mode, const PolicyFn& policy,
                           Rng& rng, const TrajectorySink& sink) {
  const WorldConfig& cfg = sc.world;
  const auto t0 = std::chrono::steady_clock::now();
  WorldState world = randomize_scenario(cfg, rng);
  std::optional<SafetyFilter> filter;
  if (mode_uses_filter(mode)) {
    filter.emplace(make_filter_params(sc), mode_filter_flags(mode));
  }
  const int period = mode_decision_period(mode, cfg.physics_dt);
  const Rect bounds = cfg.bounds();
  const Rect motion_box = cfg.target_motion_box();
  const double dt = cfg.physics_dt;
  const double v_tol = 1e-6 * std::max(1.0, cfg.v_max_uav);

  EpisodeMetrics m;
  Action action{};
  for (int tick = 0; tick < cfg.episode_cap; ++tick) {
    if (tick % period == 0) action = policy(build_observation(world, cfg));

    const UavState desired = step_uav(world.uav, action, cfg, dt);
    const Vec2 v_des = desired.speed * unit_from_angle(desired.heading);

    TrajectoryRow row;
    row.v_des_x = v_des.x();
    row.v_des_y = v_des.y();
    row.clf_value = 0.5 * (world.uav.position - world.target.position).squaredNorm();

    Vec2 v_exec = v_des;
    if (filter) {
      const FilterResult res = filter->apply(world, bounds, v_des, dt);
      v_exec = res.v_cmd;
      const double n = v_exec.norm();
      if (n > cfg.v_max_uav) v_exec *= cfg.v_max_uav / n;  // unconstrained variant re-clips
      if (!std::isnan(res.h_obs)) m.min_h_obs = std::min(m.min_h_obs, res.h_obs);
      row.h_obs = res.h_obs;
      row.delta1 = res.delta1;
      row.delta2 = res.delta2;
      row.status = res.fallback ? "fallback" : "ok";
      UavState next;
      next.position = world.uav.position + v_exec * dt;
      next.speed = std::min(v_exec.norm(), cfg.v_max_uav);
      next.heading = v_exec.norm() > 1e-12 ? heading_of(v_exec) : desired.heading;
      world.uav = next;
    } else {
      world.uav = desired;
    }
    if ((v_exec - v_des).norm() > v_tol) ++m.qp_interventions;

    step_obstacles(world.obstacles, bounds, dt);
    world.target = step_target(world.target, motion_box, cfg, rng, dt);
    ++world.step_count;
    ++m.steps;

    if (sink) {
      row.t = (tick + 1) * dt;
      row.x = world.uav.position.x();
      row.y = world.uav.position.y();
      row.theta = world.uav.heading;
      row.v = world.uav.speed;
      row.v_x = v_exec.x();
      row.v_y = v_exec.y();
      sink(row);
    }

    const CollisionResult hit = detect_collision(world.uav, world.obstacles, cfg);
    if (hit != CollisionResult::None) {
      m.outcome = hit == CollisionResult::OutOfBounds ? Outcome::OutOfBounds
                                                      : Outcome::Collision;
      break;
    }
    if ((world.uav.position - world.target.position).norm() <= cfg.success_threshold) {
      m.outcome = Outcome::Success;
      break;
    }
  }
  m.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  return m;
}

EvalSummary summarize(Mode mode, const std::vector<EpisodeMetrics>& episodes) {
  EvalSummary s;
  s.mode = mode;
  s.episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) return s;
  double steps = 0.0, success_steps = 0.0, interventions = 0.0;
  for (const auto& e : episodes) {
    switch (e.outcome) {
      case Outcome::Success:
        ++s.n_success;
        success_steps += e.steps;
        break;
      case Outcome::Collision:
        ++s.n_collision;
        break;
      case Outcome::OutOfBounds:
        ++s.n_oob;
        break;
      case Outcome::Timeout:
        ++s.n_timeout;
        break;
    }
    steps += e.steps;
    interventions += e.qp_interventions;
    s.min_h_obs = std::min(s.min_h_obs, e.min_h_obs);
  }
  const auto n = static_cast<double>(episodes.size());
  s.mean_steps = steps / n;
  s.mean_steps_success = s.n_success > 0 ? success_steps / s.n_success : 0.0;
  s.mean_interventions = interventions / n;
  return s;
}

std::string summary_table(const std::vector<EvalSummary>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-26s %8s %9s %9s %6s %8s %12s\n", "mode", "episodes",
                "success", "collision", "oob", "timeout", "mean_steps");
  out += line;
  for (const auto& s : rows) {
    std::snprintf(line, sizeof(line), "%-26s %8d %9d %9d %6d %8d %12.2f\n", mode_name(s.mode),
                  s.episodes, s.n_success, s.n_collision, s.n_oob, s.n_timeout, s.mean_steps);
    out += line;
  }
  return out;
}

namespace {

void write_summary_row(std::ostream& os, const EvalSummary& s) {
  os << mode_name(s.mode) << ',' << s.episodes << ',' << s.n_success << ','
     << s.n_collision << ',' << s.n_oob << ',' << s.n_timeout << ','
     << g17(s.mean_steps) << ',' << g17(s.mean_steps_success) << ','
     << g17(s.min_h_obs) << ',' << g17(s.mean_interventions) << '\n';
}

constexpr const char* kSummaryHeader =
    "mode,episodes,success,collision,oob,timeout,mean_steps,"
    "mean_steps_success,min_h_obs,mean_interventions\n";

}  // namespace

EvalSummary evaluate(const EvalOptions& opts, const PolicyFn& policy) {
  const ScenarioConfig& sc = opts.scenario;
  const bool write = !opts.out_dir.empty();
  std::ofstream metrics;
  if (write) {
    std::filesystem::create_directories(opts.out_dir);
    metrics.open(opts.out_dir / "metrics.csv", std::ios::trunc);
    if (!metrics) {
      throw std::runtime_error("evaluate: cannot write to " + opts.out_dir.string());
    }
    metrics << "episode,outcome,steps,min_h_obs,qp_interventions\n";
  }

  std::vector<EpisodeMetrics> episodes;
  episodes.reserve(static_cast<std::size_t>(sc.eval_episodes));
  for (int k = 0; k < sc.eval_episodes; ++k) {
    Rng ep_rng(sc.eval_seed + static_cast<std::uint64_t>(k));
    std::ofstream traj;
    TrajectorySink sink;
    if (write && k < opts.save_trajectories) {
      traj.open(opts.out_dir / ("traj_" + std::to_string(k) + ".csv"), std::ios::trunc);
      traj << "t,x,y,theta,v,v_des_x,v_des_y,v_x,v_y,V,h_obs,delta1,delta2,status\n";
      sink = [&traj](const TrajectoryRow& r) {
        traj << g17(r.t) << ',' << g17(r.x) << ',' << g17(r.y) << ',' << g17(r.theta) << ','
             << g17(r.v) << ',' << g17(r.v_des_x) << ',' << g17(r.v_des_y) << ','
             << g17(r.v_x) << ',' << g17(r.v_y) << ',' << g17(r.clf_value) << ','
             << g17(r.h_obs) << ',' << g17(r.delta1) << ',' << g17(r.delta2) << ','
             << r.status << '\n';
      };
    }
    episodes.push_back(run_episode(sc, opts.mode, policy, ep_rng, sink));
    if (write) {
      const auto& e = episodes.back();
      metrics << k << ',' << outcome_name(e.outcome) << ',' << e.steps << ','
              << g17(e.min_h_obs) << ',' << e.qp_interventions << '\n';
    }
  }

  const EvalSummary s = summarize(opts.mode, episodes);
  if (write) {
    std::ofstream sum(opts.out_dir / "summary.csv", std::ios::trunc);
    sum << kSummaryHeader;
    write_summary_row(sum, s);
    std::ofstream tab(opts.out_dir / "summary.txt", std::ios::trunc);
    tab << summary_table({s});
  }
  return s;
}

std::vector<EvalSummary> ablate(const ScenarioConfig& sc, const PolicyFn& policy,
                                const std::filesystem::path& out_dir) {
  std::vector<EvalSummary> out;
  for (Mode m : kAllModes) {
    EvalOptions eo;
    eo.scenario = sc;
    eo.mode = m;
    if (!out_dir.empty()) eo.out_dir = out_dir / mode_name(m);
    eo.save_trajectories = 3;
    out.push_back(evaluate(eo, policy));
  }
  if (!out_dir.empty()) {
    std::ofstream f(out_dir / "ablation.csv", std::ios::trunc);
    f << kSummaryHeader;
    for (const auto& s : out) write_summary_row(f, s);
    std::ofstream tab(out_dir / "ablation.txt", std::ios::trunc);
    tab << summary_table(out);
  }
  return out;
}

std::vector<RewardVariantResult> compare_rewards(const ScenarioConfig& sc,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const std::filesystem::path& out_dir) {
  if (out_dir.empty()) throw std::invalid_argument("compare_rewards: out_dir required");
  if (seeds.empty()) throw std::invalid_argument("compare_rewards: at least one seed");
  std::filesystem::create_directories(out_dir);

  struct RunRow {
    const char* variant;
    std::uint64_t seed;
    TrainStats tr;
    EvalSummary ev;
  };
  std::vector<RunRow> runs;
  std::vector<RewardVariantResult> out;
  const auto n = static_cast<double>(seeds.size());

  const std::pair<ShapingKind, const char*> variants[] = {
      {ShapingKind::Pbrs, "pbrs"},
      {ShapingKind::Heuristic, "heuristic"},
  };
  for (const auto& [kind, name] : variants) {
    RewardVariantResult agg;
    agg.variant = name;
    for (std::uint64_t seed : seeds) {
      TrainOptions to;
      to.world = sc.world;
      to.reward = sc.reward;
      to.reward.shaping = kind;
      to.td3 = sc.td3;
      to.td3.seed = seed;
      const std::string stem = std::string(name) + "_" + std::to_string(seed);
      to.checkpoint_path = out_dir / ("ckpt_" + stem + ".bin");
      to.log_path = out_dir / ("train_" + stem + ".csv");
      const TrainStats tr = train(to);
      const Td3Nets nets = load_checkpoint(to.checkpoint_path);
      EvalOptions eo;
      eo.scenario = sc;
      eo.mode = Mode::Rl10Hz;
      eo.out_dir = out_dir / ("eval_" + stem);
      const EvalSummary ev = evaluate(eo, actor_policy(nets.actor));
      runs.push_back({name, seed, tr, ev});
      agg.train_success += tr.tail_success_rate;
      agg.train_steps += tr.tail_mean_steps;
      agg.test_success += ev.success_rate();
      agg.test_steps += ev.mean_steps;
    }
    agg.train_success /= n;
    agg.train_steps /= n;
    agg.test_success /= n;
    agg.test_steps /= n;
    out.push_back(agg);
  }

  std::ofstream rf(out_dir / "reward_comparison_runs.csv", std::ios::trunc);
  rf << "variant,seed,train_succ,test_succ,train_steps,test_steps\n";
  for (const auto& r : runs) {
    rf << r.variant << ',' << r.seed << ',' << g17(r.tr.tail_success_rate) << ','
       << g17(r.ev.success_rate()) << ',' << g17(r.tr.tail_mean_steps) << ','
       << g17(r.ev.mean_steps) << '\n';
  }
  std::ofstream sf(out_dir / "reward_comparison.csv", std::ios::trunc);
  sf << "variant,train_succ,test_succ,train_steps,test_steps\n";
  for (const auto& r : out) {
    sf << r.variant << ',' << g17(r.train_success) << ',' << g17(r.test_success) << ','
       << g17(r.train_steps) << ',' << g17(r.test_steps) << '\n';
  }
  return out;
}

}  // namespace uavnav
