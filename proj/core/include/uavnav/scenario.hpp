#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "uavnav/safety_filter.hpp"
#include "uavnav/td3.hpp"

namespace uavnav {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filter gains that are not derivable from the world description.
/// Negative margin and zero k_clf mean "resolve a default".
struct FilterSettings {
  double k_clf = 0.0;
  double k_cbf = 1.0;
  double alpha_bound = 1.0;
  double margin = -1.0;
  double lambda_slack = 1e3;
  int n_scan_rays = 24;
};

struct ScenarioConfig {
  WorldConfig world;
  RewardParams reward;
  Td3Config td3;
  FilterSettings filter;
  int eval_episodes = 100;
  std::uint64_t eval_seed = 20240101;
};

/// Flat `section.key = value` lines; '#' and ';' start comments. Unknown keys,
/// malformed values and out-of-range results all raise ConfigError. The single
/// discount lives under td3.gamma and is mirrored into the reward parameters.
/// reward.v_c left unset resolves to 0.3 * world.v_max_uav.
ScenarioConfig parse_scenario_string(const std::string& text);
ScenarioConfig parse_scenario_file(const std::filesystem::path& path);

/// World-derived filter parameters: the standoff is d_safe plus the vehicle
/// radius, default margin is the vehicle radius, default k_clf is resolved by
/// the filter itself.
FilterParams make_filter_params(const ScenarioConfig& sc);

}  // namespace uavnav
