#pragma once

#include <array>

#include "uavnav/world.hpp"

namespace uavnav {

inline constexpr int kObsDim = 18;
inline constexpr int kPolicyRays = 9;
inline constexpr double kPolicyArc = 2.0 * kPi / 3.0;

/// Normalized policy input plus the raw quantities the shaping terms need.
///
/// s[0..1]  UAV position / arena size
/// s[2]     heading mapped to [0, 2): (theta mod 2pi) / pi
/// s[3]     speed / v_max
/// s[4..5]  target position / arena size
/// s[6..14] forward-arc ray distances / r_cap
/// s[15]    bearing to target / pi, quadrant-correct, in [-1, 1]
/// s[16]    distance to target / arena diagonal
/// s[17]    angle between heading and line of sight / pi, in [0, 1]
struct Observation {
  std::array<double, kObsDim> s{};
  double raw_distance = 0.0;                  // |p_T - p_A|
  double raw_alpha = 0.0;                     // heading-to-LOS angle, in [0, pi]
  std::array<double, kPolicyRays> raw_rays{}; // uncapped-units ray distances
};

Observation build_observation(const WorldState& world, const WorldConfig& cfg);

}  // namespace uavnav
