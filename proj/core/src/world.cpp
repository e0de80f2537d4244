#include "uavnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace uavnav {
namespace {

bool finite(double x) { return std::isfinite(x); }
bool finite(const Vec2& v) { return finite(v.x()) && finite(v.y()); }

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

Rect WorldConfig::target_motion_box() const {
  if (layout == Layout::BoxedTarget) {
    // Obstacles and target live in the centered sub-box spanning 80% per axis.
    const double mx = 0.1 * w, my = 0.1 * h;
    return {mx, my, w - mx, h - my};
  }
  return bounds();
}

void WorldConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("WorldConfig: " + what);
  };
  require(w > 0.0 && h > 0.0, "arena dimensions must be positive");
  require(n_sta >= 0 && n_dyn >= 0, "obstacle counts must be non-negative");
  require(r_min > 0.0 && r_max >= r_min, "need 0 < r_min <= r_max");
  require(uav_radius >= 0.0, "uav_radius must be non-negative");
  require(v_max_uav > 0.0, "v_max_uav must be positive");
  require(dv_max >= 0.0 && dtheta_max >= 0.0, "action limits must be non-negative");
  require(obstacle_speed >= 0.0 && target_speed >= 0.0, "speeds must be non-negative");
  require(target_turn_prob >= 0.0 && target_turn_prob <= 1.0, "target_turn_prob in [0,1]");
  require(success_threshold > 0.0, "success_threshold must be positive");
  require(physics_dt > 0.0, "physics_dt must be positive");
  require(episode_cap > 0, "episode_cap must be positive");
  require(r_cap > 0.0 && filter_sensor_range > 0.0, "sensor ranges must be positive");
  require(activation_distance > 0.0 && activation_distance <= filter_sensor_range,
          "need 0 < activation_distance <= filter_sensor_range");
  require(d_safe >= 0.0, "d_safe must be non-negative");
}

UavState step_uav(const UavState& uav, const Action& a, const WorldConfig& cfg, double dt) {
  if (!finite(uav.position) || !finite(uav.heading) || !finite(uav.speed) ||
      !finite(a.lambda_v) || !finite(a.lambda_theta) || !finite(dt)) {
    throw std::invalid_argument("step_uav: non-finite input");
  }
  const double lv = std::clamp(a.lambda_v, -1.0, 1.0);
  const double lt = std::clamp(a.lambda_theta, -1.0, 1.0);
  UavState out;
  out.speed = std::clamp(uav.speed + lv * cfg.dv_max, 0.0, cfg.v_max_uav);
  out.heading = wrap_angle(uav.heading + lt * cfg.dtheta_max);
  out.position = uav.position + out.speed * dt * unit_from_angle(out.heading);
  return out;
}

void step_obstacles(std::vector<Obstacle>& obstacles, const Rect& bounds, double dt) {
  for (auto& o : obstacles) {
    if (o.kind != ObstacleKind::Dynamic) continue;
    o.center += o.velocity * dt;
    if ((o.center.x() - o.radius <= bounds.xmin && o.velocity.x() < 0.0) ||
        (o.center.x() + o.radius >= bounds.xmax && o.velocity.x() > 0.0)) {
      o.velocity.x() = -o.velocity.x();
    }
    if ((o.center.y() - o.radius <= bounds.ymin && o.velocity.y() < 0.0) ||
        (o.center.y() + o.radius >= bounds.ymax && o.velocity.y() > 0.0)) {
      o.velocity.y() = -o.velocity.y();
    }
  }
  // Pairwise contact, fixed i<j order for determinism.
  for (std::size_t i = 0; i + 1 < obstacles.size(); ++i) {
    for (std::size_t j = i + 1; j < obstacles.size(); ++j) {
      Obstacle& a = obstacles[i];
      Obstacle& b = obstacles[j];
      if (a.kind == ObstacleKind::Static && b.kind == ObstacleKind::Static) continue;
      const double touch = a.radius + b.radius;
      Vec2 diff = b.center - a.center;
      const double d = diff.norm();
      if (d >= touch) continue;
      const Vec2 n = d > 1e-12 ? Vec2(diff / d) : Vec2(1.0, 0.0);
      // Reflect the along-line component of whichever disc is approaching.
      const double va = a.velocity.dot(n);
      if (va > 0.0) a.velocity -= 2.0 * va * n;
      const double vb = b.velocity.dot(n);
      if (vb < 0.0) b.velocity -= 2.0 * vb * n;
      // Separate so the discs just touch; static discs stay put.
      const double overlap = touch - d;
      if (a.kind == ObstacleKind::Dynamic && b.kind == ObstacleKind::Dynamic) {
        a.center -= 0.5 * overlap * n;
        b.center += 0.5 * overlap * n;
      } else if (a.kind == ObstacleKind::Dynamic) {
        a.center -= overlap * n;
      } else {
        b.center += overlap * n;
      }
    }
  }
}

TargetState step_target(const TargetState& target, const Rect& motion_box,
                        const WorldConfig& cfg, Rng& rng, double dt) {
  if (cfg.target_mode == TargetMode::Static) return target;
  TargetState out = target;
  if (cfg.target_turn_prob > 0.0) {
    const double u = uniform(rng, 0.0, 1.0);
    if (u < cfg.target_turn_prob) {
      out.velocity = cfg.target_speed * unit_from_angle(uniform(rng, -kPi, kPi));
    }
  }
  out.position += out.velocity * dt;
  if ((out.position.x() <= motion_box.xmin && out.velocity.x() < 0.0) ||
      (out.position.x() >= motion_box.xmax && out.velocity.x() > 0.0)) {
    out.velocity.x() = -out.velocity.x();
  }
  if ((out.position.y() <= motion_box.ymin && out.velocity.y() < 0.0) ||
      (out.position.y() >= motion_box.ymax && out.velocity.y() > 0.0)) {
    out.velocity.y() = -out.velocity.y();
  }
  return out;
}

std::vector<double> cast_rays(const Vec2& origin, double heading, int n_rays, double arc,
                              double max_range, std::span<const Obstacle> obstacles,
                              const Rect& bounds, bool include_walls) {
  if (n_rays <= 0) throw std::invalid_argument("cast_rays: n_rays must be positive");
  const bool full_circle = arc >= kTwoPi - 1e-9;
  std::vector<double> out(static_cast<std::size_t>(n_rays), max_range);
  for (int i = 0; i < n_rays; ++i) {
    double angle;
    if (full_circle) {
      angle = heading + kTwoPi * i / n_rays;
    } else if (n_rays == 1) {
      angle = heading;
    } else {
      angle = heading + arc * (static_cast<double>(i) / (n_rays - 1) - 0.5);
    }
    const Vec2 d = unit_from_angle(angle);
    double best = max_range;
    for (const auto& o : obstacles) {
      const Vec2 oc = origin - o.center;
      const double b = oc.dot(d);
      const double c = oc.squaredNorm() - o.radius * o.radius;
      const double disc = b * b - c;
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      const double t1 = -b - sq;
      const double t2 = -b + sq;
      double t;
      if (t1 >= 0.0) {
        t = t1;
      } else if (t2 >= 0.0) {
        t = 0.0;  // origin inside the disc
      } else {
        continue;
      }
      best = std::min(best, t);
    }
    if (include_walls) {
      constexpr double eps = 1e-15;
      if (d.x() > eps) best = std::min(best, (bounds.xmax - origin.x()) / d.x());
      else if (d.x() < -eps) best = std::min(best, (bounds.xmin - origin.x()) / d.x());
      if (d.y() > eps) best = std::min(best, (bounds.ymax - origin.y()) / d.y());
      else if (d.y() < -eps) best = std::min(best, (bounds.ymin - origin.y()) / d.y());
    }
    out[static_cast<std::size_t>(i)] = std::clamp(best, 0.0, max_range);
  }
  return out;
}

CollisionResult detect_collision(const UavState& uav, std::span<const Obstacle> obstacles,
                                 const WorldConfig& cfg) {
  for (const auto& o : obstacles) {
    if ((uav.position - o.center).norm() < cfg.uav_radius + o.radius) {
      return CollisionResult::Obstacle;
    }
  }
  const double r = cfg.uav_radius;
  if (uav.position.x() - r < 0.0 || uav.position.x() + r > cfg.w ||
      uav.position.y() - r < 0.0 || uav.position.y() + r > cfg.h) {
    return CollisionResult::OutOfBounds;
  }
  return CollisionResult::None;
}

namespace {

struct Range2 {
  double xlo, xhi, ylo, yhi;
};

Vec2 draw_point(Rng& rng, const Range2& r) {
  const double x = uniform(rng, r.xlo, r.xhi);
  const double y = uniform(rng, r.ylo, r.yhi);
  return {x, y};
}

Range2 obstacle_region(const WorldConfig& cfg, double r) {
  switch (cfg.layout) {
    case Layout::Corridor: {
      // the scatter stays off the side walls so a squeezed vehicle always
      // has a wall channel; otherwise a cluster fused to the boundary can
      // press the filter through the soft wall rows
      const double side = std::max(r, 0.04 * cfg.w);
      return {side, cfg.w - side, std::max(r, 0.2 * cfg.h), std::min(cfg.h - r, 0.8 * cfg.h)};
    }
    case Layout::BoxedTarget: {
      const Rect box = cfg.target_motion_box();
      return {std::max(box.xmin, r), std::min(box.xmax, cfg.w - r),
              std::max(box.ymin, r), std::min(box.ymax, cfg.h - r)};
    }
    case Layout::Uniform:
    default:
      return {r, cfg.w - r, r, cfg.h - r};
  }
}

Range2 target_region(const WorldConfig& cfg) {
  const double inset = cfg.uav_radius + 0.5 * cfg.success_threshold;
  switch (cfg.layout) {
    case Layout::Corridor:
      return {inset, cfg.w - inset, std::nextafter(0.9 * cfg.h, cfg.h), cfg.h - inset};
    case Layout::BoxedTarget: {
      const Rect box = cfg.target_motion_box();
      return {box.xmin, box.xmax, box.ymin, box.ymax};
    }
    case Layout::Uniform:
    default:
      return {inset, cfg.w - inset, inset, cfg.h - inset};
  }
}

Range2 uav_region(const WorldConfig& cfg) {
  const double inset = cfg.uav_radius;
  switch (cfg.layout) {
    case Layout::Corridor:
      return {inset, cfg.w - inset, inset, std::nextafter(0.1 * cfg.h, 0.0)};
    case Layout::BoxedTarget:
    case Layout::Uniform:
    default:
      return {inset, cfg.w - inset, inset, cfg.h - inset};
  }
}

[[noreturn]] void placement_failure(const char* what) {
  throw std::runtime_error(std::string("randomize_scenario: no valid placement for ") + what +
                           " after 10000 attempts (arena over-packed)");
}

constexpr int kMaxAttempts = 10000;

}  // namespace

WorldState randomize_scenario(const WorldConfig& cfg, Rng& rng) {
  cfg.validate();
  WorldState s;
  s.obstacles.reserve(static_cast<std::size_t>(cfg.n_sta + cfg.n_dyn));

  Rng layout_rng(cfg.layout_seed);
  Rng& obstacle_rng = cfg.randomize_layout ? rng : layout_rng;

  const int total = cfg.n_sta + cfg.n_dyn;
  for (int i = 0; i < total; ++i) {
    Obstacle o;
    o.kind = i < cfg.n_sta ? ObstacleKind::Static : ObstacleKind::Dynamic;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      o.radius = uniform(obstacle_rng, cfg.r_min, cfg.r_max);
      const Range2 region = obstacle_region(cfg, o.radius);
      if (region.xlo > region.xhi || region.ylo > region.yhi) continue;
      o.center = draw_point(obstacle_rng, region);
      bool overlap = false;
      for (const auto& other : s.obstacles) {
        if ((o.center - other.center).norm() < o.radius + other.radius) {
          overlap = true;
          break;
        }
      }
      if (!overlap) {
        placed = true;
        break;
      }
    }
    if (!placed) placement_failure("obstacle");
    if (o.kind == ObstacleKind::Dynamic) {
      o.velocity = cfg.obstacle_speed * unit_from_angle(uniform(obstacle_rng, -kPi, kPi));
    }
    s.obstacles.push_back(o);
  }

  // The target occupies a disc of uav_radius so the UAV can reach it.
  {
    const Range2 region = target_region(cfg);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      s.target.position = draw_point(rng, region);
      bool overlap = false;
      for (const auto& o : s.obstacles) {
        if ((s.target.position - o.center).norm() < o.radius + cfg.uav_radius) {
          overlap = true;
          break;
        }
      }
      if (!overlap) {
        placed = true;
        break;
      }
    }
    if (!placed) placement_failure("target");
    if (cfg.target_mode == TargetMode::Moving) {
      s.target.velocity = cfg.target_speed * unit_from_angle(uniform(rng, -kPi, kPi));
    }
  }

  {
    const Range2 region = uav_region(cfg);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      s.uav.position = draw_point(rng, region);
      if ((s.uav.position - s.target.position).norm() <= cfg.success_threshold) continue;
      bool overlap = false;
      for (const auto& o : s.obstacles) {
        if ((s.uav.position - o.center).norm() < o.radius + cfg.uav_radius) {
          overlap = true;
          break;
        }
      }
      if (!overlap) {
        placed = true;
        break;
      }
    }
    if (!placed) placement_failure("uav");
    s.uav.heading = uniform(rng, -kPi, kPi);
    s.uav.speed = 0.0;
  }

  s.step_count = 0;
  return s;
}

}  // namespace uavnav
