#include "dexsafe/simulator.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dexsafe/constraints.hpp"

namespace dexsafe {

namespace {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Vec3 read_vec3(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
    throw ConfigError(where + ": '" + key + "' must be a 3-array");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = j[key][i].get<double>();
  return v;
}

void validate_config(const ScenarioConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigError("scenario: dt must be > 0");
  if (cfg.steps <= 0) throw ConfigError("scenario: steps must be > 0");
  if (!(cfg.obstacle_radius > 0.0))
    throw ConfigError("scenario: obstacle_radius must be > 0");
  if (cfg.obstacle_count < 0)
    throw ConfigError("scenario: obstacle_count must be >= 0");
  for (int a = 0; a < 3; ++a)
    if (cfg.task_lower[a] > cfg.task_upper[a])
      throw ConfigError("scenario: task_space min exceeds max");
  if (!(cfg.d_min_env > 0.0) || !(cfg.d_min_self > 0.0))
    throw ConfigError("scenario: clearance margins must be > 0");
  if (cfg.eta < 0.0) throw ConfigError("scenario: eta must be >= 0");
  if (!(cfg.goal_threshold > 0.0))
    throw ConfigError("scenario: goal_threshold must be > 0");
  if (cfg.brownian_sigma < 0.0)
    throw ConfigError("scenario: brownian_sigma must be >= 0");
  if (!(cfg.log_cutoff > 0.0))
    throw ConfigError("scenario: log_cutoff must be > 0");
}

std::vector<int> derive_tracked(const RobotModel& m,
                                const ScenarioConfig& cfg) {
  std::vector<int> tracked;
  if (!cfg.tracked_points.empty()) {
    for (const std::string& n : cfg.tracked_points) {
      int s = m.sphere_index(n);
      if (s < 0)
        throw ConfigError("scenario: tracked point '" + n +
                          "' is not a model sphere");
      tracked.push_back(s);
    }
    return tracked;
  }
  for (const char* n : {"L_ee", "R_ee"}) {
    int s = m.sphere_index(n);
    if (s >= 0) tracked.push_back(s);
  }
  bool mobile = false;
  for (const JointSpec& js : m.joints)
    if (js.kind == JointKind::kFreeTranslation) mobile = true;
  if (mobile) {
    int p = m.sphere_index("pelvis");
    if (p >= 0) tracked.push_back(p);
  }
  if (tracked.empty())
    throw ConfigError(
        "scenario: no tracked points; model has no wrist spheres and none "
        "were named");
  return tracked;
}

Vec3 sample_box(RngStream& rng, const Vec3& lo, const Vec3& hi) {
  Vec3 v;
  for (int a = 0; a < 3; ++a) v[a] = rng.uniform(lo[a], hi[a]);
  return v;
}

}  // namespace

ScenarioConfig parse_scenario(const json& j) {
  ScenarioConfig cfg;
  if (!j.contains("name") || !j["name"].is_string())
    throw ConfigError("scenario: missing 'name'");
  cfg.name = j["name"].get<std::string>();
  if (!j.contains("robot") || !j["robot"].is_string() ||
      j["robot"].get<std::string>().empty())
    throw ConfigError("scenario: missing 'robot'");
  cfg.robot = j["robot"].get<std::string>();

  const std::string mode = j.value("mode", std::string());
  if (mode == "SO")
    cfg.motion = ObstacleMotion::kStatic;
  else if (mode == "DO")
    cfg.motion = ObstacleMotion::kBrownian;
  else if (mode == "scripted")
    cfg.motion = ObstacleMotion::kScripted;
  else
    throw ConfigError("scenario: mode must be SO, DO, or scripted");

  if (!j.contains("obstacle_count") ||
      !j["obstacle_count"].is_number_integer())
    throw ConfigError("scenario: missing 'obstacle_count'");
  cfg.obstacle_count = j["obstacle_count"].get<int>();

  if (!j.contains("task_space") || !j["task_space"].is_object())
    throw ConfigError("scenario: missing 'task_space'");
  cfg.task_lower = read_vec3(j["task_space"], "min", "scenario task_space");
  cfg.task_upper = read_vec3(j["task_space"], "max", "scenario task_space");

  cfg.obstacle_radius = j.value("obstacle_radius", cfg.obstacle_radius);
  cfg.d_min_env = j.value("d_min_env", cfg.d_min_env);
  cfg.d_min_self = j.value("d_min_self", cfg.d_min_self);
  cfg.eta = j.value("eta", cfg.eta);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.steps = j.value("steps", cfg.steps);
  cfg.goal_threshold = j.value("goal_threshold", cfg.goal_threshold);
  cfg.brownian_sigma = j.value("brownian_sigma", cfg.brownian_sigma);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.log_cutoff = j.value("log_cutoff", cfg.log_cutoff);
  if (j.contains("tracked_points")) {
    if (!j["tracked_points"].is_array())
      throw ConfigError("scenario: 'tracked_points' must be an array");
    for (const auto& t : j["tracked_points"])
      cfg.tracked_points.push_back(t.get<std::string>());
  }
  validate_config(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("scenario json parse error in " + path + ": " +
                      e.what());
  }
  ScenarioConfig cfg = parse_scenario(j);
  std::filesystem::path robot(cfg.robot);
  if (robot.is_relative())
    cfg.robot = (std::filesystem::path(path).parent_path() / robot)
                    .lexically_normal()
                    .string();
  return cfg;
}

std::string resolve_data_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("DEXSAFE_DATA"); env && *env) return env;
  return DEXSAFE_DATA_DIR;
}

World init_scenario(const ScenarioConfig& cfg, RobotModel model,
                    std::uint64_t model_hash) {
  validate_config(cfg);
  World w;
  w.cfg = cfg;
  w.model = std::move(model);
  w.model_hash = model_hash;
  w.dyn = Dynamics::first_order(w.model.dofs);
  w.q = w.model.home;
  w.tracked = derive_tracked(w.model, cfg);

  const auto centers = forward_kinematics(w.model, w.q);
  RngStream obstacle_rng(cfg.seed, "obstacles");
  int rejections = 0;
  while (int(w.obstacles.size()) < cfg.obstacle_count) {
    Vec3 c = sample_box(obstacle_rng, cfg.task_lower, cfg.task_upper);
    bool clear = true;
    for (size_t s = 0; s < w.model.spheres.size() && clear; ++s) {
      double d = (centers[s] - c).norm() - w.model.spheres[s].radius -
                 cfg.obstacle_radius;
      if (d < cfg.d_min_env) clear = false;
    }
    if (!clear) {
      if (++rejections > 10000)
        throw ConfigError("scenario '" + cfg.name +
                          "': 10000 obstacle samples rejected; the task box "
                          "is too dense for the start pose");
      continue;
    }
    w.obstacles.push_back(Obstacle::sphere(c, cfg.obstacle_radius));
  }
  w.pairs = enumerate_pairs(w.model, w.obstacles, cfg.d_min_env,
                            cfg.d_min_self, cfg.eta);

  w.goal_rng = RngStream(cfg.seed, "goals");
  w.motion_rng = RngStream(cfg.seed, "brownian");
  for (int t : w.tracked)
    w.goals.push_back({w.model.spheres[t].name,
                       sample_box(w.goal_rng, cfg.task_lower, cfg.task_upper)});
  return w;
}

World init_scenario(const ScenarioConfig& cfg) {
  std::ifstream in(cfg.robot, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file: " + cfg.robot);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  json j;
  try {
    j = json::parse(bytes);
  } catch (const std::exception& e) {
    throw ConfigError("model json parse error in " + cfg.robot + ": " +
                      e.what());
  }
  return init_scenario(cfg, parse_robot_model(j), fnv1a64(bytes));
}

StepRecord step(World& w, FilterMethod method, const RelaxationConfig& mcfg) {
  const ScenarioConfig& cfg = w.cfg;
  StepRecord r;
  r.t = w.step_index;
  r.q = w.q;

  const auto centers = forward_kinematics(w.model, w.q);
  r.goal_distance.reserve(w.tracked.size());
  for (size_t i = 0; i < w.tracked.size(); ++i)
    r.goal_distance.push_back(
        (centers[w.tracked[i]] - w.goals[i].second).norm());

  r.u_ref = nominal_control(w.model, w.q, w.goals, cfg.gains);
  ConstraintSet cs =
      assemble_constraints(w.model, w.q, w.pairs, w.obstacles, w.dyn);
  FilterResult res = apply_filter(method, cs, r.u_ref, mcfg);
  r.u = res.u;
  r.feasible = res.feasible;
  for (int i = 0; i < res.s.size(); ++i)
    if (res.s[i] > 0.0) r.slack.push_back({i, res.s[i]});
  for (int i = 0; i < cs.phi.size(); ++i) {
    double d = w.pairs[i].d_min - cs.phi[i];
    if (d < cfg.log_cutoff) r.distance.push_back({i, d});
  }

  w.q = (w.q + cfg.dt * res.u)
            .cwiseMax(w.model.pos_lower)
            .cwiseMin(w.model.pos_upper);

  if (cfg.motion == ObstacleMotion::kBrownian) {
    for (Obstacle& o : w.obstacles)
      for (int a = 0; a < 3; ++a) {
        const double lo = cfg.task_lower[a], hi = cfg.task_upper[a];
        double c = o.center[a] + w.motion_rng.gaussian(cfg.brownian_sigma);
        if (hi <= lo) {
          o.center[a] = lo;
          continue;
        }
        // fold until inside; each pass sheds 2 box widths of excursion
        while (c < lo || c > hi) {
          if (c < lo) c = lo + (lo - c);
          if (c > hi) c = hi - (c - hi);
        }
        o.center[a] = c;
      }
  } else if (cfg.motion == ObstacleMotion::kScripted &&
             !w.obstacle_velocity.empty()) {
    for (size_t i = 0; i < w.obstacles.size(); ++i)
      w.obstacles[i].center += cfg.dt * w.obstacle_velocity[i];
  }

  const auto advanced = forward_kinematics(w.model, w.q);
  for (size_t i = 0; i < w.tracked.size(); ++i)
    if ((advanced[w.tracked[i]] - w.goals[i].second).norm() <
        cfg.goal_threshold)
      w.goals[i].second = sample_box(w.goal_rng, cfg.task_lower,
                                     cfg.task_upper);

  ++w.step_index;
  return r;
}

EpisodeLog run_episode(World w, FilterMethod method,
                       const RelaxationConfig& mcfg) {
  EpisodeLog log;
  log.cfg = w.cfg;
  log.method = method;
  log.method_cfg = mcfg;
  log.model_hash = w.model_hash;
  log.pair_info.reserve(w.pairs.size());
  for (const CollisionPair& p : w.pairs)
    log.pair_info.push_back({p.kind, p.d_min});
  for (int t : w.tracked) log.tracked_names.push_back(w.model.spheres[t].name);
  log.steps.reserve(w.cfg.steps);
  try {
    for (int k = 0; k < w.cfg.steps; ++k)
      log.steps.push_back(step(w, method, mcfg));
  } catch (const DegenerateGeometry& e) {
    log.aborted = true;
    log.abort_reason = e.what();
    throw EpisodeAbort("degenerate_geometry", e.what(), std::move(log));
  } catch (const PhaseConsistencyFault& e) {
    log.aborted = true;
    log.abort_reason = e.what();
    throw EpisodeAbort("phase_consistency", e.what(), std::move(log));
  } catch (const SolverFault& e) {
    log.aborted = true;
    log.abort_reason = e.what();
    throw EpisodeAbort("solver_fault", e.what(), std::move(log));
  }
  return log;
}

EpisodeLog run_episode(const ScenarioConfig& cfg, FilterMethod method,
                       const RelaxationConfig& mcfg) {
  return run_episode(init_scenario(cfg), method, mcfg);
}

namespace {

// 3-dof point robot used by the wall conflict scene.
RobotModel free_point_model(json* out) {
  json mj = json::parse(R"({
    "name": "free_point",
    "joints": [
      {"name": "base", "parent": "", "origin_xyz": [0, 0, 0],
       "origin_rpy": [0, 0, 0], "type": "free_translation",
       "limits": [[-10, 10], [-10, 10], [-10, 10]]}
    ],
    "spheres": [
      {"name": "R_ee", "frame": "base", "offset": [0, 0, 0], "radius": 0.05}
    ],
    "self_collision_pairs": [],
    "velocity_limits": {"lower": [-1, -1, -1], "upper": [1, 1, 1]}
  })");
  if (out) *out = mj;
  return parse_robot_model(mj);
}

World build_method_infeasibility() {
  ScenarioConfig cfg;
  cfg.name = "method_infeasibility";
  cfg.robot = "builtin:free_point";
  cfg.motion = ObstacleMotion::kScripted;
  cfg.obstacle_count = 0;
  cfg.task_lower = Vec3(1.5, 0.0, 0.0);
  cfg.task_upper = Vec3(2.5, 0.0, 0.0);
  cfg.steps = 200;
  json mj;
  RobotModel m = free_point_model(&mj);
  World w = init_scenario(cfg, std::move(m), fnv1a64(mj.dump()));
  // plane surfaces 0.17 m apart leave 0.07 m of free gap around the 0.1 m
  // sphere, less than the 0.05 + 0.05 the two margins demand, so the rows
  // conflict at every reachable configuration
  w.obstacles.push_back(Obstacle::plane(Vec3(0, -1, 0), Vec3(0, 0.085, 0)));
  w.obstacles.push_back(Obstacle::plane(Vec3(0, 1, 0), Vec3(0, -0.085, 0)));
  w.pairs = enumerate_pairs(w.model, w.obstacles, cfg.d_min_env,
                            cfg.d_min_self, cfg.eta);
  return w;
}

World build_inherent_infeasibility(const std::string& data_dir) {
  ScenarioConfig cfg;
  cfg.name = "inherent_infeasibility";
  cfg.robot = data_dir + "/models/g1_fixed_base.json";
  cfg.motion = ObstacleMotion::kScripted;
  cfg.obstacle_count = 0;
  cfg.task_lower = Vec3(-0.15, -0.40, -0.05);
  cfg.task_upper = Vec3(0.65, 0.40, 0.75);
  cfg.steps = 400;
  World w = init_scenario(cfg);
  // collision course with the pelvis, which no joint can move; the small z
  // offset keeps the centers from ever coinciding exactly
  w.obstacles.push_back(Obstacle::sphere(Vec3(-0.6, 0.0, 0.05), 0.05));
  w.obstacle_velocity.push_back(Vec3(0.2, 0.0, 0.0));
  w.pairs = enumerate_pairs(w.model, w.obstacles, cfg.d_min_env,
                            cfg.d_min_self, cfg.eta);
  return w;
}

World build_kinematics_infeasibility(const std::string& data_dir) {
  ScenarioConfig cfg;
  cfg.name = "kinematics_infeasibility";
  cfg.robot = data_dir + "/models/g1_fixed_base.json";
  cfg.motion = ObstacleMotion::kScripted;
  cfg.obstacle_count = 0;
  cfg.task_lower = Vec3(-0.15, -0.40, -0.05);
  cfg.task_upper = Vec3(0.65, 0.40, 0.75);
  cfg.steps = 150;
  World w = init_scenario(cfg);

  const auto centers = forward_kinematics(w.model, w.q);
  const auto tf = frame_transforms(w.model, w.q);
  const int S = w.model.sphere_index("left_shoulder_pitch");
  const int R = w.model.sphere_index("R_ee");

  // every waist axis passes through one point, so waist motion moves the
  // torso-mounted shoulder sphere only tangentially around it, and the
  // shoulder pitch axis runs through the sphere center itself. No control
  // input has a component along the outward radial line, at any pose. A
  // pursuer closing along exactly that line is kinematically unanswerable,
  // and its width rules out slipping aside before it has passed. The twin
  // pursuer aims at a wrist instead, which the arm can both yield to and
  // slide around, so one ledger fills while the other stays empty.
  const Vec3 waist = tf[w.model.joint_index("waist_yaw_joint")].p;
  const Vec3 dir_l = (centers[S] - waist).normalized();
  const Vec3 dir_r(0.0, 0.0, 1.0);
  const double ball = 0.25;
  const double pursuit = 0.5;
  w.obstacles.push_back(
      Obstacle::sphere(centers[S] + (0.06 + ball + 0.03) * dir_l, ball));
  w.obstacles.push_back(
      Obstacle::sphere(centers[R] + (0.05 + ball + 0.03) * dir_r, ball));
  w.obstacle_velocity = {-pursuit * dir_l, -pursuit * dir_r};
  w.pairs = enumerate_pairs(w.model, w.obstacles, cfg.d_min_env,
                            cfg.d_min_self, cfg.eta);

  // out-of-reach goals never trip the resampler; the right pull doubles as
  // a sidestep off the descending ball's track
  w.goals = {{"L_ee", centers[w.model.sphere_index("L_ee")] +
                          Vec3(0.9, 0.2, -0.2)},
             {"R_ee", centers[R] + Vec3(0.3, -0.8, -0.2)}};
  return w;
}

}  // namespace

std::vector<std::string> scripted_scenario_names() {
  return {"method_infeasibility", "inherent_infeasibility",
          "kinematics_infeasibility"};
}

World scripted_world(const std::string& name, const std::string& data_dir) {
  const std::string data = resolve_data_dir(data_dir);
  if (name == "method_infeasibility") return build_method_infeasibility();
  if (name == "inherent_infeasibility")
    return build_inherent_infeasibility(data);
  if (name == "kinematics_infeasibility")
    return build_kinematics_infeasibility(data);
  throw ConfigError("unknown scripted scenario '" + name + "'");
}

}  // namespace dexsafe
