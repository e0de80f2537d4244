#include "uavnav/observe.hpp"

#include <algorithm>
#include <cmath>

namespace uavnav {

Observation build_observation(const WorldState& world, const WorldConfig& cfg) {
  Observation obs;
  const UavState& uav = world.uav;
  const Vec2 to_target = world.target.position - uav.position;
  const double d = to_target.norm();
  const double diag = std::hypot(cfg.w, cfg.h);

  obs.s[0] = uav.position.x() / cfg.w;
  obs.s[1] = uav.position.y() / cfg.h;
  const double theta = uav.heading < 0.0 ? uav.heading + kTwoPi : uav.heading;
  obs.s[2] = theta / kPi;
  obs.s[3] = uav.speed / cfg.v_max_uav;
  obs.s[4] = world.target.position.x() / cfg.w;
  obs.s[5] = world.target.position.y() / cfg.h;

  const auto rays = cast_rays(uav.position, uav.heading, kPolicyRays, kPolicyArc, cfg.r_cap,
                              world.obstacles, cfg.bounds());
  for (int i = 0; i < kPolicyRays; ++i) {
    obs.raw_rays[static_cast<std::size_t>(i)] = rays[static_cast<std::size_t>(i)];
    obs.s[static_cast<std::size_t>(6 + i)] = rays[static_cast<std::size_t>(i)] / cfg.r_cap;
  }

  obs.s[15] = std::atan2(to_target.y(), to_target.x()) / kPi;
  obs.s[16] = d / diag;
  double alpha = 0.0;
  if (d > 0.0) {
    const double cos_alpha = unit_from_angle(uav.heading).dot(to_target / d);
    alpha = std::acos(std::clamp(cos_alpha, -1.0, 1.0));
  }
  obs.s[17] = alpha / kPi;

  obs.raw_distance = d;
  obs.raw_alpha = alpha;
  return obs;
}

}  // namespace uavnav
