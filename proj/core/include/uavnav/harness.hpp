#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "uavnav/scenario.hpp"

namespace uavnav {

/// Control stacks under comparison. All filtered variants decide every tick;
/// the 1 Hz variant re-applies its held action increments each tick.
enum class Mode {
  Rl1Hz,
  Rl10Hz,
  RlClfQp10Hz,          // convergence + wall rows, no obstacle row
  RlClfCbfQp10Hz,       // full constraint set
  RlClfCbfQpNovel10Hz,  // no velocity ball inside the program; clipped after
};

inline constexpr Mode kAllModes[] = {Mode::Rl1Hz, Mode::Rl10Hz, Mode::RlClfQp10Hz,
                                     Mode::RlClfCbfQp10Hz, Mode::RlClfCbfQpNovel10Hz};

const char* mode_name(Mode m);
Mode parse_mode(const std::string& name);  // throws ConfigError on unknown names
bool mode_uses_filter(Mode m);
int mode_decision_period(Mode m, double physics_dt);  // ticks between policy queries
FilterFlags mode_filter_flags(Mode m);

enum class Outcome { Success, Collision, OutOfBounds, Timeout };
const char* outcome_name(Outcome o);

struct EpisodeMetrics {
  Outcome outcome = Outcome::Timeout;
  int steps = 0;  // physics ticks elapsed
  double min_h_obs = std::numeric_limits<double>::infinity();  // over active-circle ticks
  int qp_interventions = 0;  // ticks where the executed velocity left the request
  long long wall_ms = 0;
};

using PolicyFn = std::function<Action(const Observation&)>;

PolicyFn actor_policy(const Mlp& actor);

/// Scripted chase: full throttle, steer along the bearing to the target.
PolicyFn goto_goal_policy(const WorldConfig& cfg);

/// One line per tick. Pose columns are post-move; v_des, V, h_obs, the slacks
/// and status describe the decision taken at the start of the tick.
struct TrajectoryRow {
  double t = 0.0;
  double x = 0.0, y = 0.0, theta = 0.0, v = 0.0;
  double v_des_x = 0.0, v_des_y = 0.0;
  double v_x = 0.0, v_y = 0.0;
  double clf_value = 0.0;
  double h_obs = std::numeric_limits<double>::quiet_NaN();
  double delta1 = 0.0, delta2 = 0.0;
  const char* status = "ok";  // "ok" or "fallback"
};

using TrajectorySink = std::function<void(const TrajectoryRow&)>;

EpisodeMetrics run_episode(const ScenarioConfig& sc, Mode mode, const PolicyFn& policy,
                           Rng& rng, const TrajectorySink& sink = {});

struct EvalSummary {
  Mode mode = Mode::Rl10Hz;
  int episodes = 0;
  int n_success = 0;
  int n_collision = 0;
  int n_oob = 0;
  int n_timeout = 0;
  double mean_steps = 0.0;  // over all episodes
  double mean_steps_success = 0.0;  // zero when nothing succeeded
  double min_h_obs = std::numeric_limits<double>::infinity();
  double mean_interventions = 0.0;

  double success_rate() const { return episodes ? double(n_success) / episodes : 0.0; }
  double collision_rate() const { return episodes ? double(n_collision) / episodes : 0.0; }
};

EvalSummary summarize(Mode mode, const std::vector<EpisodeMetrics>& episodes);

/// Fixed-width outcome-count table, one row per summary.
std::string summary_table(const std::vector<EvalSummary>& rows);

struct EvalOptions {
  ScenarioConfig scenario;
  Mode mode = Mode::Rl10Hz;
  std::filesystem::path out_dir;  // empty: no files
  int save_trajectories = 0;      // traj_<ep>.csv for the first N episodes
};

/// Episode k runs on seed eval.seed + k, so every mode and policy sees the
/// same scenario sequence. Writes metrics.csv and summary.csv (wall time
/// excluded; byte-identical across reruns).
EvalSummary evaluate(const EvalOptions& opts, const PolicyFn& policy);

/// Runs every mode over the shared scenario sequence with the same policy and
/// writes per-mode output plus ablation.csv under out_dir (if non-empty).
std::vector<EvalSummary> ablate(const ScenarioConfig& sc, const PolicyFn& policy,
                                const std::filesystem::path& out_dir);

struct RewardVariantResult {
  std::string variant;  // "pbrs" or "heuristic"
  double train_success = 0.0;  // tail-window mean across seeds
  double train_steps = 0.0;
  double test_success = 0.0;  // evaluation mean across seeds
  double test_steps = 0.0;
};

/// Trains both reward variants once per listed seed, then evaluates each
/// checkpoint unfiltered at full rate on the shared scenario sequence. Writes
/// per-run training logs and checkpoints, a per-run table
/// (reward_comparison_runs.csv) and a two-row summary (reward_comparison.csv)
/// under out_dir, which must be non-empty.
std::vector<RewardVariantResult> compare_rewards(const ScenarioConfig& sc,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const std::filesystem::path& out_dir);

}  // namespace uavnav
