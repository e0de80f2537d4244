// Command-line front end: train, eval, ablate, compare-rewards, toy-pbrs.
// Exit codes: 0 ok, 2 config/usage error, 3 checkpoint error, 1 anything else.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavnav/harness.hpp"
#include "uavnav/toy_mdp.hpp"

namespace fs = std::filesystem;
using namespace uavnav;

namespace {

struct TrainArgs {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
};

int cmd_train(const TrainArgs& a) {
  ScenarioConfig sc = parse_scenario_file(a.config);
  if (a.seed_set) sc.td3.seed = a.seed;
  fs::create_directories(a.out);
  TrainOptions to;
  to.world = sc.world;
  to.reward = sc.reward;
  to.td3 = sc.td3;
  to.checkpoint_path = fs::path(a.out) / "checkpoint.bin";
  to.log_path = fs::path(a.out) / "train_log.csv";
  const TrainStats st = train(to);
  std::printf("episodes=%d steps=%zu tail_success=%.3f tail_steps=%.1f\n", st.episodes,
              st.steps, st.tail_success_rate, st.tail_mean_steps);
  std::printf("checkpoint: %s\n", to.checkpoint_path.string().c_str());
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string scenario;
  std::string mode = "rl-10hz";
  int episodes = 0;
  bool episodes_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string policy = "actor";
  int save_traj = 3;
};

PolicyFn make_policy(const std::string& kind, const std::string& checkpoint,
                     const WorldConfig& world) {
  if (kind == "goto-goal") return goto_goal_policy(world);
  if (kind != "actor") throw ConfigError("unknown policy '" + kind + "'");
  if (checkpoint.empty()) throw ConfigError("--checkpoint required for the actor policy");
  return actor_policy(load_checkpoint(checkpoint).actor);
}

int cmd_eval(const EvalArgs& a) {
  EvalOptions eo;
  eo.scenario = parse_scenario_file(a.scenario);
  if (a.episodes_set) eo.scenario.eval_episodes = a.episodes;
  if (a.seed_set) eo.scenario.eval_seed = a.seed;
  if (eo.scenario.eval_episodes <= 0) throw ConfigError("--episodes must be positive");
  eo.mode = parse_mode(a.mode);
  eo.out_dir = a.out;
  eo.save_trajectories = a.save_traj;
  const PolicyFn policy = make_policy(a.policy, a.checkpoint, eo.scenario.world);
  const EvalSummary s = evaluate(eo, policy);
  std::fputs(summary_table({s}).c_str(), stdout);
  return 0;
}

struct AblateArgs {
  std::string checkpoint;
  std::string scenario;
  std::string out;
};

int cmd_ablate(const AblateArgs& a) {
  const ScenarioConfig sc = parse_scenario_file(a.scenario);
  const PolicyFn policy = actor_policy(load_checkpoint(a.checkpoint).actor);
  const auto rows = ablate(sc, policy, a.out);
  std::fputs(summary_table(rows).c_str(), stdout);
  return 0;
}

struct CompareArgs {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
};

int cmd_compare(const CompareArgs& a) {
  const ScenarioConfig sc = parse_scenario_file(a.config);
  const auto rows = compare_rewards(sc, a.seeds, a.out);
  std::printf("%-10s %11s %10s %12s %11s\n", "variant", "train_succ", "test_succ",
              "train_steps", "test_steps");
  for (const auto& r : rows) {
    std::printf("%-10s %11.3f %10.3f %12.1f %11.1f\n", r.variant.c_str(), r.train_success,
                r.test_success, r.train_steps, r.test_steps);
  }
  return 0;
}

int cmd_toy_pbrs() {
  bool all_ok = true;
  auto report = [&all_ok](const std::string& name, bool ok) {
    std::printf("%-34s %s\n", name.c_str(), ok ? "ok" : "FAIL");
    all_ok = all_ok && ok;
  };

  {
    const TabularMdp grid = make_gridworld(5, 5, -1.0, 10.0);
    const std::vector<double> phi = gridworld_distance_potential(5, 5, 1.0);
    report("gridworld distance potential", pbrs_invariance_check(grid, phi, 0.99, 1e-9));
    const std::vector<double> zero(grid.n_states, 0.0);
    report("gridworld zero potential", pbrs_invariance_check(grid, zero, 0.99, 1e-9));
  }
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const TabularMdp mdp = make_random_mdp(8, 3, rng);
    std::vector<double> phi(static_cast<std::size_t>(mdp.n_states));
    for (auto& p : phi) p = u(rng);
    report("random mdp seed " + std::to_string(seed),
           pbrs_invariance_check(mdp, phi, 0.95, 1e-9));
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV navigation: TD3 training with a CLF/CBF velocity filter"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a policy from a config file");
  train_cmd->add_option("--config", ta.config, "scenario/config file")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", ta.seed, "override td3.seed")
      ->each([&ta](const std::string&) { ta.seed_set = true; });
  train_cmd->add_option("--out", ta.out, "output directory")->required();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a scenario");
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "checkpoint file");
  eval_cmd->add_option("--scenario", ea.scenario, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--mode", ea.mode,
                       "rl-1hz | rl-10hz | rl-clf-qp-10hz | rl-clf-cbf-qp-10hz | "
                       "rl-clf-cbf-qp-novel-10hz");
  eval_cmd->add_option("--episodes", ea.episodes, "override eval.episodes")
      ->each([&ea](const std::string&) { ea.episodes_set = true; });
  eval_cmd->add_option("--seed", ea.seed, "override eval.seed (episode k uses seed+k)")
      ->each([&ea](const std::string&) { ea.seed_set = true; });
  eval_cmd->add_option("--out", ea.out, "output directory (metrics.csv, summary.csv)");
  eval_cmd->add_option("--policy", ea.policy, "actor | goto-goal");
  eval_cmd->add_option("--save-trajectories", ea.save_traj, "traj_<ep>.csv for first N episodes");

  AblateArgs aa;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run all five modes on one scenario");
  ablate_cmd->add_option("--checkpoint", aa.checkpoint, "checkpoint file")->required();
  ablate_cmd->add_option("--scenario", aa.scenario, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  ablate_cmd->add_option("--out", aa.out, "output directory")->required();

  CompareArgs ca;
  auto* cmp_cmd = app.add_subcommand("compare-rewards",
                                     "Train and test both reward variants per seed");
  cmp_cmd->add_option("--config", ca.config, "scenario/config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmp_cmd->add_option("--seeds", ca.seeds, "comma-separated training seeds")
      ->required()
      ->delimiter(',');
  cmp_cmd->add_option("--out", ca.out, "output directory")->required();

  auto* toy_cmd = app.add_subcommand("toy-pbrs", "Shaping-invariance checks on toy MDPs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return cmd_train(ta);
    if (*eval_cmd) return cmd_eval(ea);
    if (*ablate_cmd) return cmd_ablate(aa);
    if (*cmp_cmd) return cmd_compare(ca);
    if (*toy_cmd) return cmd_toy_pbrs();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
