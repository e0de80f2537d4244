#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

namespace uavnav {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to [-pi, pi].
inline double wrap_angle(double theta) { return std::remainder(theta, kTwoPi); }

/// Direction of v in [-pi, pi]; zero vector maps to 0.
inline double heading_of(const Vec2& v) {
  if (v.x() == 0.0 && v.y() == 0.0) return 0.0;
  return std::atan2(v.y(), v.x());
}

inline Vec2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Axis-aligned rectangle [xmin,xmax] x [ymin,ymax].
struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(const Vec2& p, double inset = 0.0) const {
    return p.x() >= xmin + inset && p.x() <= xmax - inset &&
           p.y() >= ymin + inset && p.y() <= ymax - inset;
  }
};

}  // namespace uavnav
