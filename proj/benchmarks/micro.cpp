// Microbenchmarks for the per-tick hot path (sensing, filtering, stepping)
// and the learner update. Scene sizes mirror the dense proving-ground
// scenario so the numbers bound the worst case, not the average one.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "uavnav/nn.hpp"
#include "uavnav/observe.hpp"
#include "uavnav/qp.hpp"
#include "uavnav/safety_filter.hpp"
#include "uavnav/td3.hpp"
#include "uavnav/world.hpp"

namespace {

using namespace uavnav;

WorldConfig dense_config() {
  WorldConfig c;
  c.w = 100.0;
  c.h = 100.0;
  c.n_sta = 40;
  c.n_dyn = 10;
  c.r_min = 2.0;
  c.r_max = 5.0;
  c.uav_radius = 0.5;
  c.v_max_uav = 3.0;
  c.dv_max = 1.0;
  c.obstacle_speed = 1.0;
  c.success_threshold = 2.0;
  c.r_cap = 60.0;
  c.layout = Layout::Corridor;
  return c;
}

WorldState dense_world() {
  const WorldConfig cfg = dense_config();
  Rng rng(7);
  return randomize_scenario(cfg, rng);
}

FilterParams dense_filter_params(const WorldConfig& cfg) {
  FilterParams fp;
  fp.v_max = cfg.v_max_uav;
  fp.margin = cfg.uav_radius;
  fp.d_safe = cfg.d_safe + cfg.uav_radius;
  fp.activation_distance = cfg.activation_distance;
  fp.sensor_range = cfg.filter_sensor_range;
  return fp;
}

void BM_CastRaysPolicy(benchmark::State& state) {
  const WorldConfig cfg = dense_config();
  const WorldState w = dense_world();
  for (auto _ : state) {
    auto d = cast_rays(w.uav.position, w.uav.heading, kPolicyRays, kPolicyArc, cfg.r_cap,
                       w.obstacles, cfg.bounds());
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_CastRaysPolicy)->Unit(benchmark::kMicrosecond);

void BM_CastRaysScan(benchmark::State& state) {
  const WorldConfig cfg = dense_config();
  const WorldState w = dense_world();
  for (auto _ : state) {
    auto d = cast_rays(w.uav.position, 0.0, 24, 2.0 * kPi, cfg.filter_sensor_range,
                       w.obstacles, cfg.bounds(), false);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_CastRaysScan)->Unit(benchmark::kMicrosecond);

void BM_BuildObservation(benchmark::State& state) {
  const WorldConfig cfg = dense_config();
  const WorldState w = dense_world();
  for (auto _ : state) {
    Observation obs = build_observation(w, cfg);
    benchmark::DoNotOptimize(obs);
  }
}
BENCHMARK(BM_BuildObservation)->Unit(benchmark::kMicrosecond);

void BM_WorldTick(benchmark::State& state) {
  const WorldConfig cfg = dense_config();
  WorldState w = dense_world();
  Rng rng(11);
  const Action a{0.3, 0.1};
  for (auto _ : state) {
    w.uav = step_uav(w.uav, a, cfg, cfg.physics_dt);
    step_obstacles(w.obstacles, cfg.bounds(), cfg.physics_dt);
    w.target = step_target(w.target, cfg.target_motion_box(), cfg, rng, cfg.physics_dt);
    auto hit = detect_collision(w.uav, w.obstacles, cfg);
    benchmark::DoNotOptimize(hit);
  }
}
BENCHMARK(BM_WorldTick)->Unit(benchmark::kMicrosecond);

// Representative projection: convergence row, one obstacle row, four walls,
// speed ball. Cycling the request angle defeats trivial caching.
void BM_QpSolve(benchmark::State& state) {
  const Vec2 p{20.0, 30.0};
  BoundingCircle circle;
  circle.center = {23.0, 31.0};
  circle.radius = 2.5;
  QpProblem prob;
  prob.v_max = 3.0;
  prob.rows.push_back(clf_row(p, Vec2{80.0, 70.0}, Vec2{0.0, 0.0}, 1.5));
  prob.rows.push_back(obstacle_row(p, circle, 1.0));
  for (const QpRow& r : boundary_rows(p, Rect{0.0, 0.0, 100.0, 100.0}, 0.5, 1.0)) {
    prob.rows.push_back(r);
  }
  int k = 0;
  for (auto _ : state) {
    const double ang = 0.1 * (k++ % 63);
    prob.v_des = {3.0 * std::cos(ang), 3.0 * std::sin(ang)};
    QpSolution sol = solve_qp(prob);
    benchmark::DoNotOptimize(sol);
  }
}
BENCHMARK(BM_QpSolve)->Unit(benchmark::kMicrosecond);

void BM_FilterApply(benchmark::State& state) {
  const WorldConfig cfg = dense_config();
  WorldState w = dense_world();
  SafetyFilter filter(dense_filter_params(cfg));
  const Vec2 v_des = (w.target.position - w.uav.position).normalized() * cfg.v_max_uav;
  for (auto _ : state) {
    FilterResult res = filter.apply(w, cfg.bounds(), v_des, cfg.physics_dt);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_FilterApply)->Unit(benchmark::kMicrosecond);

void BM_MlpForward(benchmark::State& state) {
  Rng rng(3);
  const Mlp actor({kObsDim, 64, 64, 2}, OutputActivation::Tanh, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(256, kObsDim);
  for (auto _ : state) {
    Eigen::MatrixXd y = actor.forward(x);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(BM_MlpForward)->Unit(benchmark::kMicrosecond);

void BM_MlpBackward(benchmark::State& state) {
  Rng rng(3);
  const Mlp actor({kObsDim, 64, 64, 2}, OutputActivation::Tanh, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(256, kObsDim);
  Eigen::MatrixXd dy = Eigen::MatrixXd::Random(256, 2);
  for (auto _ : state) {
    Tape tape;
    actor.forward(x, tape);
    Gradients g = actor.backward(tape, dy);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_MlpBackward)->Unit(benchmark::kMicrosecond);

void BM_Td3Update(benchmark::State& state) {
  Td3Config cfg;
  cfg.hidden = {64, 64};
  cfg.batch_size = 256;
  Rng rng(5);
  Td3Learner learner(kObsDim, 2, cfg, rng);

  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<Transition> batch(cfg.batch_size);
  for (Transition& t : batch) {
    for (auto& v : t.obs) v = u(rng);
    for (auto& v : t.next_obs) v = u(rng);
    t.action = {u(rng), u(rng)};
    t.reward = u(rng);
    t.done = false;
  }
  for (auto _ : state) {
    learner.update(batch, rng);
  }
}
BENCHMARK(BM_Td3Update)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
