#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "uavnav/geometry.hpp"

namespace uavnav {

using Rng = std::mt19937_64;

enum class TargetMode { Static, Moving };
enum class Layout { Uniform, Corridor, BoxedTarget };
enum class ObstacleKind { Static, Dynamic };

struct WorldConfig {
  double w = 1000.0;
  double h = 1000.0;
  int n_sta = 20;
  int n_dyn = 5;
  double r_min = 10.0;
  double r_max = 40.0;
  double uav_radius = 5.0;
  double v_max_uav = 10.0;
  double dv_max = 2.0;
  double dtheta_max = kPi / 6.0;
  double obstacle_speed = 3.0;
  TargetMode target_mode = TargetMode::Static;
  double target_speed = 0.0;
  double target_turn_prob = 0.0;
  double success_threshold = 20.0;
  double physics_dt = 0.1;
  int episode_cap = 1000;        // physics ticks
  double r_cap = 150.0;          // range cap of the 9-ray policy sensor
  double filter_sensor_range = 15.0;  // range cap of the 24-ray filter sensor
  double activation_distance = 8.0;
  double d_safe = 1.0;
  Layout layout = Layout::Uniform;
  bool randomize_layout = true;
  std::uint64_t layout_seed = 12345;  // obstacle placement seed when randomize_layout=false

  Rect bounds() const { return {0.0, 0.0, w, h}; }
  /// Region the moving target is confined to (reflects at its edges).
  Rect target_motion_box() const;
  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct UavState {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;  // wrapped to [-pi, pi]
  double speed = 0.0;    // in [0, v_max_uav]
};

struct Obstacle {
  Vec2 center{0.0, 0.0};
  double radius = 1.0;
  Vec2 velocity{0.0, 0.0};
  ObstacleKind kind = ObstacleKind::Static;
};

struct TargetState {
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
};

struct WorldState {
  UavState uav;
  TargetState target;
  std::vector<Obstacle> obstacles;
  int step_count = 0;
};

/// Commanded speed/heading increments, each in [-1, 1].
struct Action {
  double lambda_v = 0.0;
  double lambda_theta = 0.0;
};

enum class CollisionResult { None, Obstacle, OutOfBounds };

/// Kinematic update: v' = clip(v + lambda_v*dv_max, 0, v_max),
/// theta' = wrap(theta + lambda_theta*dtheta_max), p' = p + v'*dir(theta')*dt.
/// Throws std::invalid_argument on non-finite inputs.
UavState step_uav(const UavState& uav, const Action& a, const WorldConfig& cfg, double dt);

/// Advances dynamic obstacles; reflects velocity components off arena walls and,
/// on pairwise contact, off the center line between the two discs. Overlap is
/// resolved by separating along the center line (static discs never move).
void step_obstacles(std::vector<Obstacle>& obstacles, const Rect& bounds, double dt);

/// Moving target: resamples its heading with probability target_turn_prob, then
/// advances and reflects off the motion box. Static targets are returned as-is.
TargetState step_target(const TargetState& target, const Rect& motion_box,
                        const WorldConfig& cfg, Rng& rng, double dt);

/// Distances to the nearest obstacle (and wall, when include_walls) along n_rays
/// rays spanning `arc` radians centered on `heading`, capped at max_range.
/// An arc of a full circle spaces rays evenly without duplicating the endpoint.
std::vector<double> cast_rays(const Vec2& origin, double heading, int n_rays, double arc,
                              double max_range, std::span<const Obstacle> obstacles,
                              const Rect& bounds, bool include_walls = true);

/// Disc-overlap test. Obstacle contact takes precedence over leaving the arena.
CollisionResult detect_collision(const UavState& uav, std::span<const Obstacle> obstacles,
                                 const WorldConfig& cfg);

/// Draws a fresh scenario by rejection sampling: no initial overlap among UAV,
/// target and obstacles, and the UAV spawns farther than success_threshold from
/// the target. Throws std::runtime_error once a placement exceeds 10^4 attempts.
WorldState randomize_scenario(const WorldConfig& cfg, Rng& rng);

}  // namespace uavnav
