#pragma once

#include <optional>
#include <span>
#include <vector>

#include "uavnav/qp.hpp"
#include "uavnav/world.hpp"

namespace uavnav {

/// Parameters of the velocity correction layer. d_safe here is the full
/// standoff added to the fitted obstacle radius (vehicle radius included).
struct FilterParams {
  double v_max = 10.0;         // actuation ball radius and fallback speed
  double v_target_max = 0.0;   // target speed bound; caps admissible k_clf
  double k_clf = 0.0;          // 0 resolves to default_k_clf()
  double k_cbf = 1.0;
  double alpha_bound = 1.0;    // boundary barrier gain
  double margin = 0.0;         // wall inset the boundary rows defend
  double lambda_slack = 1e3;
  double d_safe = 1.0;
  double activation_distance = 8.0;
  double sensor_range = 15.0;
  int n_scan_rays = 24;

  /// Throws std::invalid_argument; requires 0 < k_clf <= sqrt(2)*(v_max - v_target_max),
  /// the largest gain the convergence constraint stays feasible for at full speed.
  void validate() const;
};

double default_k_clf(double v_max, double v_target_max);

/// Disc covering the currently sensed obstacle points, plus motion estimates.
struct BoundingCircle {
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
  Vec2 center_rate{0.0, 0.0};
  double radius_rate = 0.0;
  int n_points = 0;
};

/// Hit points of the full-circle scan that lie within activation distance.
std::vector<Vec2> scan_points(const WorldState& world, const Rect& bounds,
                              const FilterParams& fp);

/// Mean-centered cover of `points`, inflated by d_safe. Rates are zero;
/// the filter fills them from its history. Requires a non-empty span.
BoundingCircle fit_bounding_circle(std::span<const Vec2> points, double d_safe);

/// h = ||p - c||^2 - R^2.
double obstacle_h(const Vec2& p, const BoundingCircle& c);

/// Convergence row: (p - p_t)'(v - v_t) + k_clf*sqrt(V) <= delta1 with
/// V = 0.5*||p - p_t||^2.
QpRow clf_row(const Vec2& p, const Vec2& p_target, const Vec2& v_target, double k_clf);

/// Hard obstacle row: 2(p-c)'(v - c_dot) - 2R*Rdot >= -k_cbf*h. For a static
/// circle the discrete update keeps h >= 0 whenever k_cbf*dt <= 1.
QpRow obstacle_row(const Vec2& p, const BoundingCircle& c, double k_cbf);

/// Four wall rows of the form hdot + alpha*h >= delta2 with h the distance
/// beyond `margin` from each wall.
std::vector<QpRow> boundary_rows(const Vec2& p, const Rect& bounds, double margin,
                                 double alpha);

struct FilterFlags {
  bool use_obstacle = true;  // include the hard obstacle row
  bool use_ball = true;      // enforce ||v|| <= v_max inside the program
};

struct FilterResult {
  Vec2 v_cmd{0.0, 0.0};
  double delta1 = 0.0;
  double delta2 = 0.0;
  double clf_value = 0.0;
  double h_obs = std::numeric_limits<double>::quiet_NaN();  // NaN when no circle
  std::optional<BoundingCircle> circle;
  QpSolution qp;
  bool fallback = false;    // evasion override after an unsolved program
  bool intervened = false;  // command differs from the requested velocity
};

/// Per-step velocity correction: scans for nearby obstacle surface, fits one
/// bounding circle with finite-difference motion estimates, and projects the
/// requested velocity onto the constraint set. When the program cannot be
/// solved the command falls back to full speed directly away from the circle.
class SafetyFilter {
 public:
  explicit SafetyFilter(FilterParams params, FilterFlags flags = {});

  FilterResult apply(const WorldState& world, const Rect& bounds, const Vec2& v_des,
                     double dt);

  /// Drops circle history and solver warm start. Call between episodes.
  void reset();

  const FilterParams& params() const { return params_; }
  const FilterFlags& flags() const { return flags_; }

 private:
  FilterParams params_;
  FilterFlags flags_;
  QpSolver solver_;
  std::optional<BoundingCircle> prev_;
};

}  // namespace uavnav
