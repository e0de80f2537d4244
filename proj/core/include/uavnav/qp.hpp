#pragma once

#include <Eigen/Core>
#include <limits>
#include <vector>

#include "uavnav/geometry.hpp"

namespace uavnav {

/// One linear constraint a.z <= b over z = (vx, vy, delta1, delta2).
struct QpRow {
  Eigen::Vector4d a = Eigen::Vector4d::Zero();
  double b = 0.0;
  const char* label = "";
};

/// minimize 0.5*|v - v_des|^2 + (lambda_slack/2)*(delta1^2 + delta2^2)
/// subject to rows and, when v_max > 0, |v| <= v_max.
struct QpProblem {
  Vec2 v_des{0.0, 0.0};
  double lambda_slack = 1e3;
  double v_max = 0.0;  // <= 0 disables the Euclidean velocity bound
  std::vector<QpRow> rows;

  bool has_ball() const { return v_max > 0.0; }
  double objective_value(const Eigen::Vector4d& z) const {
    const double dx = z[0] - v_des.x();
    const double dy = z[1] - v_des.y();
    return 0.5 * (dx * dx + dy * dy) + 0.5 * lambda_slack * (z[2] * z[2] + z[3] * z[3]);
  }
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

struct QpKktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
};

struct QpSolution {
  Eigen::Vector4d z = Eigen::Vector4d::Zero();
  double objective = std::numeric_limits<double>::quiet_NaN();
  QpStatus status = QpStatus::Infeasible;
  std::vector<int> active;          // row indices; -1 marks the velocity ball
  std::vector<double> multipliers;  // aligned with `active`
  QpKktResiduals kkt;
  int pivots = 0;
  int cuts = 0;

  Vec2 velocity() const { return {z[0], z[1]}; }
};

/// Dual active-set solver for the strictly convex 4-variable problem above.
/// The Euclidean ball is handled by outer tangent cuts: solve the linear-row
/// relaxation, and while the optimum leaves the ball by more than a relative
/// tol add the half-plane tangent at its radial projection (caps: 100 cuts,
/// 100 pivots per solve). Tangent directions of active cuts are kept between
/// calls so consecutive solves of slowly-moving problems start from a tight
/// outer approximation.
class QpSolver {
 public:
  QpSolution solve(const QpProblem& p, double tol = 1e-9);
  void reset() { warm_cuts_.clear(); }

 private:
  std::vector<Vec2> warm_cuts_;
};

/// One-shot solve without warm-start state.
QpSolution solve_qp(const QpProblem& p, double tol = 1e-9);

}  // namespace uavnav
