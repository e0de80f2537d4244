#include "uavnav/scenario.hpp"

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace uavnav {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, int line) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail(line, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) fail(line, "trailing characters in number '" + v + "'");
  return out;
}

long long parse_int(const std::string& v, int line) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    fail(line, "expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) fail(line, "trailing characters in integer '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& v, int line) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    fail(line, "expected an unsigned integer, got '" + v + "'");
  }
  if (pos != v.size()) fail(line, "trailing characters in integer '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(line, "expected true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v, int line) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "empty entry in list '" + v + "'");
    out.push_back(static_cast<int>(parse_int(item, line)));
  }
  if (out.empty()) fail(line, "empty list");
  return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, int)>;

const std::map<std::string, Setter>& key_table() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [&](const std::string& key, double WorldConfig::* field) {
      t[key] = [field](ScenarioConfig& sc, const std::string& v, int line) {
        sc.world.*field = parse_double(v, line);
      };
    };
    num("world.w", &WorldConfig::w);
    num("world.h", &WorldConfig::h);
    num("world.r_min", &WorldConfig::r_min);
    num("world.r_max", &WorldConfig::r_max);
    num("world.uav_radius", &WorldConfig::uav_radius);
    num("world.v_max_uav", &WorldConfig::v_max_uav);
    num("world.dv_max", &WorldConfig::dv_max);
    num("world.dtheta_max", &WorldConfig::dtheta_max);
    num("world.obstacle_speed", &WorldConfig::obstacle_speed);
    num("world.target_speed", &WorldConfig::target_speed);
    num("world.target_turn_prob", &WorldConfig::target_turn_prob);
    num("world.success_threshold", &WorldConfig::success_threshold);
    num("world.physics_dt", &WorldConfig::physics_dt);
    num("world.r_cap", &WorldConfig::r_cap);
    num("world.filter_sensor_range", &WorldConfig::filter_sensor_range);
    num("world.activation_distance", &WorldConfig::activation_distance);
    num("world.d_safe", &WorldConfig::d_safe);
    t["world.n_sta"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.world.n_sta = static_cast<int>(parse_int(v, line));
    };
    t["world.n_dyn"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.world.n_dyn = static_cast<int>(parse_int(v, line));
    };
    t["world.episode_cap"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.world.episode_cap = static_cast<int>(parse_int(v, line));
    };
    t["world.target_mode"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      if (v == "static") sc.world.target_mode = TargetMode::Static;
      else if (v == "moving") sc.world.target_mode = TargetMode::Moving;
      else fail(line, "target_mode must be static or moving, got '" + v + "'");
    };
    t["world.layout"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      if (v == "uniform") sc.world.layout = Layout::Uniform;
      else if (v == "corridor") sc.world.layout = Layout::Corridor;
      else if (v == "boxed_target") sc.world.layout = Layout::BoxedTarget;
      else fail(line, "layout must be uniform, corridor or boxed_target, got '" + v + "'");
    };
    t["world.randomize_layout"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.world.randomize_layout = parse_bool(v, line);
    };
    t["world.layout_seed"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.world.layout_seed = parse_u64(v, line);
    };

    auto rew = [&](const std::string& key, double RewardParams::* field) {
      t[key] = [field](ScenarioConfig& sc, const std::string& v, int line) {
        sc.reward.*field = parse_double(v, line);
      };
    };
    rew("reward.k_t", &RewardParams::k_t);
    rew("reward.k_c", &RewardParams::k_c);
    rew("reward.k_v", &RewardParams::k_v);
    rew("reward.k_d", &RewardParams::k_d);
    rew("reward.k_theta", &RewardParams::k_theta);
    rew("reward.k_obs", &RewardParams::k_obs);
    rew("reward.v_c", &RewardParams::v_c);
    rew("reward.k_heur", &RewardParams::k_heur);
    t["reward.shaping"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      if (v == "pbrs") sc.reward.shaping = ShapingKind::Pbrs;
      else if (v == "heuristic") sc.reward.shaping = ShapingKind::Heuristic;
      else if (v == "none") sc.reward.shaping = ShapingKind::None;
      else fail(line, "shaping must be pbrs, heuristic or none, got '" + v + "'");
    };

    auto td3num = [&](const std::string& key, double Td3Config::* field) {
      t[key] = [field](ScenarioConfig& sc, const std::string& v, int line) {
        sc.td3.*field = parse_double(v, line);
      };
    };
    td3num("td3.gamma", &Td3Config::gamma);
    td3num("td3.tau", &Td3Config::tau);
    td3num("td3.actor_lr", &Td3Config::actor_lr);
    td3num("td3.critic_lr", &Td3Config::critic_lr);
    td3num("td3.expl_noise", &Td3Config::expl_noise);
    td3num("td3.target_noise", &Td3Config::target_noise);
    td3num("td3.noise_clip", &Td3Config::noise_clip);
    t["td3.hidden"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.hidden = parse_int_list(v, line);
    };
    t["td3.policy_delay"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.policy_delay = static_cast<int>(parse_int(v, line));
    };
    t["td3.batch_size"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.batch_size = static_cast<std::size_t>(parse_u64(v, line));
    };
    t["td3.learning_starts"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.learning_starts = static_cast<std::size_t>(parse_u64(v, line));
    };
    t["td3.total_steps"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.total_steps = static_cast<std::size_t>(parse_u64(v, line));
    };
    t["td3.seed"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.seed = parse_u64(v, line);
    };
    t["td3.eta"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.replay.eta = parse_double(v, line);
    };
    t["td3.success_capacity"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.replay.success_capacity = static_cast<std::size_t>(parse_u64(v, line));
    };
    t["td3.failure_capacity"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.replay.failure_capacity = static_cast<std::size_t>(parse_u64(v, line));
    };
    t["td3.temp_capacity"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.td3.replay.temp_capacity = static_cast<std::size_t>(parse_u64(v, line));
    };

    auto fil = [&](const std::string& key, double FilterSettings::* field) {
      t[key] = [field](ScenarioConfig& sc, const std::string& v, int line) {
        sc.filter.*field = parse_double(v, line);
      };
    };
    fil("filter.k_clf", &FilterSettings::k_clf);
    fil("filter.k_cbf", &FilterSettings::k_cbf);
    fil("filter.alpha_bound", &FilterSettings::alpha_bound);
    fil("filter.margin", &FilterSettings::margin);
    fil("filter.lambda_slack", &FilterSettings::lambda_slack);
    t["filter.n_scan_rays"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.filter.n_scan_rays = static_cast<int>(parse_int(v, line));
    };

    t["eval.episodes"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.eval_episodes = static_cast<int>(parse_int(v, line));
    };
    t["eval.seed"] = [](ScenarioConfig& sc, const std::string& v, int line) {
      sc.eval_seed = parse_u64(v, line);
    };
    return t;
  }();
  return table;
}

}  // namespace

ScenarioConfig parse_scenario_string(const std::string& text) {
  ScenarioConfig sc;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto cut = raw.find_first_of("#;");
    std::string line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for '" + key + "'");
    const auto& table = key_table();
    const auto it = table.find(key);
    if (it == table.end()) fail(line_no, "unknown key '" + key + "'");
    it->second(sc, value, line_no);
    seen.insert(key);
  }
  if (!seen.count("reward.v_c")) sc.reward.v_c = 0.3 * sc.world.v_max_uav;
  sc.reward.gamma = sc.td3.gamma;
  try {
    sc.world.validate();
    sc.td3.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (sc.eval_episodes <= 0) throw ConfigError("eval.episodes must be positive");
  return sc;
}

ScenarioConfig parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_scenario_string(buf.str());
}

FilterParams make_filter_params(const ScenarioConfig& sc) {
  FilterParams fp;
  fp.v_max = sc.world.v_max_uav;
  fp.v_target_max =
      sc.world.target_mode == TargetMode::Moving ? sc.world.target_speed : 0.0;
  fp.k_clf = sc.filter.k_clf;
  fp.k_cbf = sc.filter.k_cbf;
  fp.alpha_bound = sc.filter.alpha_bound;
  fp.margin = sc.filter.margin >= 0.0 ? sc.filter.margin : sc.world.uav_radius;
  fp.lambda_slack = sc.filter.lambda_slack;
  fp.d_safe = sc.world.d_safe + sc.world.uav_radius;
  fp.activation_distance = sc.world.activation_distance;
  fp.sensor_range = sc.world.filter_sensor_range;
  fp.n_scan_rays = sc.filter.n_scan_rays;
  return fp;
}

}  // namespace uavnav
