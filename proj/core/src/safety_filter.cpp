#include "uavnav/safety_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uavnav {

void FilterParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("FilterParams: ") + what);
  };
  require(v_max > 0.0, "v_max must be positive");
  require(v_target_max >= 0.0 && v_target_max < v_max, "need 0 <= v_target_max < v_max");
  const double k_cap = std::sqrt(2.0) * (v_max - v_target_max);
  require(k_clf > 0.0 && k_clf <= k_cap + 1e-12,
          "k_clf must lie in (0, sqrt(2)*(v_max - v_target_max)]");
  require(k_cbf > 0.0, "k_cbf must be positive");
  require(alpha_bound > 0.0, "alpha_bound must be positive");
  require(margin >= 0.0, "margin must be non-negative");
  require(lambda_slack > 0.0, "lambda_slack must be positive");
  require(d_safe >= 0.0, "d_safe must be non-negative");
  require(activation_distance > 0.0 && activation_distance <= sensor_range,
          "need 0 < activation_distance <= sensor_range");
  require(n_scan_rays >= 4, "n_scan_rays must be at least 4");
}

double default_k_clf(double v_max, double v_target_max) {
  return 0.9 * std::sqrt(2.0) * (v_max - v_target_max);
}

std::vector<Vec2> scan_points(const WorldState& world, const Rect& bounds,
                              const FilterParams& fp) {
  // Walls are excluded: the boundary rows own them, and a wall echo inside the
  // activation band would wrap the circle around the vehicle's own corridor.
  const auto dist = cast_rays(world.uav.position, world.uav.heading, fp.n_scan_rays, kTwoPi,
                              fp.sensor_range, world.obstacles, bounds,
                              /*include_walls=*/false);
  std::vector<Vec2> pts;
  for (int i = 0; i < fp.n_scan_rays; ++i) {
    const double r = dist[static_cast<std::size_t>(i)];
    if (r >= fp.activation_distance) continue;
    const double angle = world.uav.heading + kTwoPi * i / fp.n_scan_rays;
    pts.push_back(world.uav.position + r * unit_from_angle(angle));
  }
  return pts;
}

BoundingCircle fit_bounding_circle(std::span<const Vec2> points, double d_safe) {
  if (points.empty()) throw std::invalid_argument("fit_bounding_circle: no points");
  BoundingCircle c;
  for (const auto& p : points) c.center += p;
  c.center /= static_cast<double>(points.size());
  double r_fit = 0.0;
  for (const auto& p : points) r_fit = std::max(r_fit, (p - c.center).norm());
  c.radius = r_fit + d_safe;
  c.n_points = static_cast<int>(points.size());
  return c;
}

double obstacle_h(const Vec2& p, const BoundingCircle& c) {
  return (p - c.center).squaredNorm() - c.radius * c.radius;
}

QpRow clf_row(const Vec2& p, const Vec2& p_target, const Vec2& v_target, double k_clf) {
  const Vec2 d = p - p_target;
  const double v = 0.5 * d.squaredNorm();
  QpRow row;
  row.a << d.x(), d.y(), -1.0, 0.0;
  row.b = d.dot(v_target) - k_clf * std::sqrt(v);
  row.label = "clf";
  return row;
}

QpRow obstacle_row(const Vec2& p, const BoundingCircle& c, double k_cbf) {
  const Vec2 d = p - c.center;
  QpRow row;
  row.a << -2.0 * d.x(), -2.0 * d.y(), 0.0, 0.0;
  row.b = k_cbf * obstacle_h(p, c) - 2.0 * d.dot(c.center_rate) -
          2.0 * c.radius * c.radius_rate;
  row.label = "cbf_obs";
  return row;
}

std::vector<QpRow> boundary_rows(const Vec2& p, const Rect& bounds, double margin,
                                 double alpha) {
  std::vector<QpRow> rows(4);
  rows[0].a << -1.0, 0.0, 0.0, 1.0;
  rows[0].b = alpha * (p.x() - bounds.xmin - margin);
  rows[0].label = "wall_xmin";
  rows[1].a << 1.0, 0.0, 0.0, 1.0;
  rows[1].b = alpha * (bounds.xmax - margin - p.x());
  rows[1].label = "wall_xmax";
  rows[2].a << 0.0, -1.0, 0.0, 1.0;
  rows[2].b = alpha * (p.y() - bounds.ymin - margin);
  rows[2].label = "wall_ymin";
  rows[3].a << 0.0, 1.0, 0.0, 1.0;
  rows[3].b = alpha * (bounds.ymax - margin - p.y());
  rows[3].label = "wall_ymax";
  return rows;
}

SafetyFilter::SafetyFilter(FilterParams params, FilterFlags flags)
    : params_(params), flags_(flags) {
  if (params_.k_clf == 0.0) {
    params_.k_clf = default_k_clf(params_.v_max, params_.v_target_max);
  }
  params_.validate();
}

void SafetyFilter::reset() {
  prev_.reset();
  solver_.reset();
}

FilterResult SafetyFilter::apply(const WorldState& world, const Rect& bounds,
                                 const Vec2& v_des, double dt) {
  FilterResult out;
  const Vec2 p = world.uav.position;

  const auto pts = scan_points(world, bounds, params_);
  if (!pts.empty()) {
    BoundingCircle c = fit_bounding_circle(pts, params_.d_safe);
    // Motion estimate holds only while roughly the same surface stays in view;
    // a jump in point count means the active set changed, so start over.
    if (prev_ && dt > 0.0 &&
        std::abs(c.n_points - prev_->n_points) <= 0.5 * prev_->n_points) {
      auto clamp_rate = [&](double x) { return std::clamp(x, -params_.v_max, params_.v_max); };
      c.center_rate.x() = clamp_rate((c.center.x() - prev_->center.x()) / dt);
      c.center_rate.y() = clamp_rate((c.center.y() - prev_->center.y()) / dt);
      c.radius_rate = clamp_rate((c.radius - prev_->radius) / dt);
    }
    out.circle = c;
    out.h_obs = obstacle_h(p, c);
    prev_ = c;
  } else {
    prev_.reset();
    solver_.reset();
  }

  QpProblem qp;
  qp.v_des = v_des;
  qp.lambda_slack = params_.lambda_slack;
  qp.v_max = flags_.use_ball ? params_.v_max : 0.0;
  qp.rows.push_back(clf_row(p, world.target.position, world.target.velocity, params_.k_clf));
  out.clf_value = 0.5 * (p - world.target.position).squaredNorm();
  if (flags_.use_obstacle && out.circle) {
    qp.rows.push_back(obstacle_row(p, *out.circle, params_.k_cbf));
  }
  for (auto& row : boundary_rows(p, bounds, params_.margin, params_.alpha_bound)) {
    qp.rows.push_back(std::move(row));
  }

  out.qp = solver_.solve(qp);
  if (out.qp.status == QpStatus::Optimal) {
    out.v_cmd = out.qp.velocity();
    out.delta1 = out.qp.z[2];
    out.delta2 = out.qp.z[3];
  } else {
    // Unsolved program: retreat from the circle at full speed, or coast on the
    // requested velocity clipped to the ball when nothing is nearby.
    out.fallback = true;
    solver_.reset();
    if (out.circle) {
      const Vec2 away = p - out.circle->center;
      const double n = away.norm();
      out.v_cmd = n > 1e-12 ? Vec2(params_.v_max * away / n) : Vec2(params_.v_max, 0.0);
    } else {
      const double n = v_des.norm();
      out.v_cmd = n > params_.v_max ? Vec2(params_.v_max * v_des / n) : v_des;
    }
  }
  out.intervened = (out.v_cmd - v_des).norm() > 1e-6 * std::max(1.0, params_.v_max);
  return out;
}

}  // namespace uavnav
