#include "uavnav/qp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavnav {
namespace {

constexpr int kPivotCap = 100;
constexpr int kCutCap = 100;
constexpr double kDependenceTol = 1e-11;

struct LinearResult {
  QpStatus status = QpStatus::Infeasible;
  Eigen::Vector4d z = Eigen::Vector4d::Zero();
  std::vector<int> active;
  std::vector<double> u;
  int pivots = 0;
};

/// Goldfarb–Idnani dual active set for
///   min 0.5 z'Hz + g'z  s.t.  n_j'z >= d_j,
/// with diagonal positive definite H. Starts at the unconstrained optimum and
/// adds the most violated constraint at a time; multipliers stay nonnegative,
/// blocking constraints are dropped along partial steps.
LinearResult solve_linear(const Eigen::Vector4d& hdiag, const Eigen::Vector4d& g,
                          const std::vector<Eigen::Vector4d>& n, const std::vector<double>& d,
                          double tol) {
  const double inf = std::numeric_limits<double>::infinity();
  const Eigen::Vector4d hinv = hdiag.cwiseInverse();

  LinearResult res;
  res.z = -hinv.cwiseProduct(g);
  std::vector<int>& W = res.active;
  std::vector<double>& u = res.u;
  const int m = static_cast<int>(n.size());

  for (;;) {
    int p = -1;
    double worst = -tol;
    for (int j = 0; j < m; ++j) {
      if (std::find(W.begin(), W.end(), j) != W.end()) continue;
      const double s = n[static_cast<std::size_t>(j)].dot(res.z) - d[static_cast<std::size_t>(j)];
      if (s < worst) {
        worst = s;
        p = j;
      }
    }
    if (p < 0) {
      res.status = QpStatus::Optimal;
      return res;
    }
    const Eigen::Vector4d& np = n[static_cast<std::size_t>(p)];

    double up = 0.0;
    for (;;) {
      if (++res.pivots > kPivotCap) {
        res.status = QpStatus::MaxIter;
        return res;
      }
      const int q = static_cast<int>(W.size());
      Eigen::Vector4d dz;
      Eigen::VectorXd r(q);
      if (q == 0) {
        dz = hinv.cwiseProduct(np);
      } else {
        Eigen::Matrix<double, 4, Eigen::Dynamic> N(4, q);
        for (int k = 0; k < q; ++k) N.col(k) = n[static_cast<std::size_t>(W[static_cast<std::size_t>(k)])];
        const Eigen::Matrix<double, 4, Eigen::Dynamic> GiN = hinv.asDiagonal() * N;
        const Eigen::MatrixXd M = N.transpose() * GiN;
        r = M.ldlt().solve(N.transpose() * (hinv.cwiseProduct(np)));
        dz = hinv.cwiseProduct(np) - GiN * r;
      }
      const double dz_norm = dz.norm();

      // Partial step: first active multiplier driven to zero.
      double t1 = inf;
      int drop = -1;
      for (int k = 0; k < q; ++k) {
        if (r[k] > 1e-12) {
          const double tk = u[static_cast<std::size_t>(k)] / r[k];
          if (tk < t1) {
            t1 = tk;
            drop = k;
          }
        }
      }
      // Full step: distance until constraint p is satisfied.
      const double sp = np.dot(res.z) - d[static_cast<std::size_t>(p)];
      double t2 = inf;
      if (dz_norm > kDependenceTol) t2 = -sp / np.dot(dz);

      if (!std::isfinite(t1) && !std::isfinite(t2)) {
        res.status = QpStatus::Infeasible;
        return res;
      }
      if (t2 <= t1) {
        res.z += t2 * dz;
        for (int k = 0; k < q; ++k) u[static_cast<std::size_t>(k)] -= t2 * r[k];
        up += t2;
        W.push_back(p);
        u.push_back(up);
        break;
      }
      if (dz_norm > kDependenceTol) res.z += t1 * dz;
      for (int k = 0; k < q; ++k) u[static_cast<std::size_t>(k)] -= t1 * r[k];
      up += t1;
      W.erase(W.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }
}

void validate_problem(const QpProblem& p) {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(p.v_des.x()) || !finite(p.v_des.y()) || !finite(p.lambda_slack) ||
      !finite(p.v_max)) {
    throw std::invalid_argument("solve_qp: non-finite problem data");
  }
  if (p.lambda_slack <= 0.0) throw std::invalid_argument("solve_qp: lambda_slack must be positive");
  for (const auto& row : p.rows) {
    if (!row.a.allFinite() || !finite(row.b)) {
      throw std::invalid_argument("solve_qp: non-finite constraint row");
    }
  }
}

}  // namespace

QpSolution QpSolver::solve(const QpProblem& p, double tol) {
  validate_problem(p);
  if (tol <= 0.0) throw std::invalid_argument("solve_qp: tol must be positive");

  const Eigen::Vector4d hdiag(1.0, 1.0, p.lambda_slack, p.lambda_slack);
  const Eigen::Vector4d g(-p.v_des.x(), -p.v_des.y(), 0.0, 0.0);

  const int n_base = static_cast<int>(p.rows.size());
  std::vector<Eigen::Vector4d> n;
  std::vector<double> d;
  n.reserve(p.rows.size() + 8);
  d.reserve(p.rows.size() + 8);
  for (const auto& row : p.rows) {
    n.push_back(-row.a);
    d.push_back(-row.b);
  }
  auto add_cut = [&](const Vec2& dir) {
    n.push_back(Eigen::Vector4d(-dir.x(), -dir.y(), 0.0, 0.0));
    d.push_back(-p.v_max);
  };
  if (p.has_ball()) {
    for (const auto& dir : warm_cuts_) add_cut(dir);
  }

  QpSolution sol;
  LinearResult lin;
  for (;;) {
    lin = solve_linear(hdiag, g, n, d, tol);
    sol.pivots += lin.pivots;
    if (lin.status != QpStatus::Optimal || !p.has_ball()) break;
    const double vn = std::hypot(lin.z[0], lin.z[1]);
    if (vn <= p.v_max * (1.0 + tol)) break;
    if (sol.cuts >= kCutCap) {
      lin.status = QpStatus::MaxIter;
      break;
    }
    add_cut(Vec2(lin.z[0] / vn, lin.z[1] / vn));
    ++sol.cuts;
  }

  sol.status = lin.status;
  sol.z = lin.z;
  if (sol.status == QpStatus::Optimal) sol.objective = p.objective_value(sol.z);

  // Collapse active cuts into one ball entry; refresh the warm-start cache.
  warm_cuts_.clear();
  double ball_mult = 0.0;
  bool ball_active = false;
  for (std::size_t k = 0; k < lin.active.size(); ++k) {
    const int idx = lin.active[k];
    const double mult = lin.u[k];
    if (mult <= 1e-12) continue;
    if (idx < n_base) {
      sol.active.push_back(idx);
      sol.multipliers.push_back(mult);
    } else {
      ball_active = true;
      ball_mult += mult;
      if (p.has_ball() && warm_cuts_.size() < 8) {
        warm_cuts_.push_back({-n[static_cast<std::size_t>(idx)][0], -n[static_cast<std::size_t>(idx)][1]});
      }
    }
  }
  if (ball_active) {
    sol.active.push_back(-1);
    sol.multipliers.push_back(ball_mult);
  }

  if (sol.status != QpStatus::Infeasible) {
    Eigen::Vector4d grad = hdiag.cwiseProduct(sol.z) + g;
    double comp = 0.0;
    double primal = 0.0;
    for (std::size_t k = 0; k < lin.active.size(); ++k) {
      const auto idx = static_cast<std::size_t>(lin.active[k]);
      grad -= lin.u[k] * n[idx];
      comp = std::max(comp, std::abs(lin.u[k] * (n[idx].dot(sol.z) - d[idx])));
    }
    for (std::size_t j = 0; j < n.size(); ++j) {
      primal = std::max(primal, d[j] - n[j].dot(sol.z));
    }
    if (p.has_ball()) {
      primal = std::max(primal, std::hypot(sol.z[0], sol.z[1]) - p.v_max);
    }
    sol.kkt.stationarity = grad.lpNorm<Eigen::Infinity>();
    sol.kkt.primal = std::max(primal, 0.0);
    sol.kkt.complementarity = comp;
  }
  return sol;
}

QpSolution solve_qp(const QpProblem& p, double tol) {
  QpSolver solver;
  return solver.solve(p, tol);
}

}  // namespace uavnav
