#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dexsafe/collision.hpp"
#include "dexsafe/filters.hpp"
#include "dexsafe/kinematics.hpp"
#include "dexsafe/rng.hpp"

namespace dexsafe {

enum class ObstacleMotion { kStatic, kBrownian, kScripted };

struct ScenarioConfig {
  std::string name;
  std::string robot;  // model file path, resolved by the loader
  ObstacleMotion motion = ObstacleMotion::kStatic;
  int obstacle_count = 0;
  double obstacle_radius = 0.05;
  Vec3 task_lower = Vec3::Zero();  // obstacle and goal sampling box
  Vec3 task_upper = Vec3::Zero();
  double d_min_env = 0.05;
  double d_min_self = 0.01;
  double eta = 0.5;
  double dt = 0.01;
  int steps = 2000;
  double goal_threshold = 0.05;
  double brownian_sigma = 0.01;  // per axis, per step
  std::uint64_t seed = 0;
  // sphere names with goals; empty means both wrists plus the base when
  // the model has one
  std::vector<std::string> tracked_points;
  TrackingGains gains;
  double log_cutoff = 0.1;  // pair distances below this get recorded
};

// Throws ConfigError on missing or malformed fields. The loader resolves a
// relative robot path against the scenario file's directory.
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);

struct World {
  ScenarioConfig cfg;
  RobotModel model;
  std::uint64_t model_hash = 0;  // FNV-1a over the model file bytes
  std::vector<Obstacle> obstacles;
  std::vector<Vec3> obstacle_velocity;  // scripted linear motion, else empty
  std::vector<CollisionPair> pairs;
  Dynamics dyn;
  VecX q;
  std::vector<int> tracked;  // sphere indices
  GoalMap goals;             // parallel to tracked
  RngStream goal_rng;
  RngStream motion_rng;
  int step_index = 0;
};

// Deterministic setup keyed by cfg.seed. Obstacles sample uniformly in the
// task box, rejecting any placement that already violates d_min_env at the
// start pose; more than 10000 rejections in a row throws ConfigError.
World init_scenario(const ScenarioConfig& cfg);
// Same contract with a caller-supplied model, for worlds whose robot never
// touches disk (scripted scenes, tests).
World init_scenario(const ScenarioConfig& cfg, RobotModel model,
                    std::uint64_t model_hash = 0);

// Resolution order: explicit argument, DEXSAFE_DATA environment variable,
// compiled-in location of the shipped data tree.
std::string resolve_data_dir(const std::string& explicit_dir = "");

struct PairSample {
  int pair = -1;
  double value = 0.0;
};

// Everything in a record is taken at decision time, before integration.
struct StepRecord {
  int t = 0;
  VecX q;
  VecX u_ref;
  VecX u;
  bool feasible = true;
  std::vector<PairSample> slack;      // positive entries only
  std::vector<PairSample> distance;   // below cfg.log_cutoff only
  std::vector<double> goal_distance;  // per tracked point
};

struct PairInfo {
  PairKind kind = PairKind::kEnv;
  double d_min = 0.0;
};

struct EpisodeLog {
  ScenarioConfig cfg;
  FilterMethod method = FilterMethod::kPssa;
  RelaxationConfig method_cfg;
  std::uint64_t model_hash = 0;
  std::vector<PairInfo> pair_info;  // static pair table for readers
  std::vector<std::string> tracked_names;
  std::vector<StepRecord> steps;
  bool aborted = false;
  std::string abort_reason;  // empty unless aborted
};

// One control cycle: nominal control, constraint assembly, filtering,
// integration under the position limits, obstacle motion, goal respawn.
StepRecord step(World& w, FilterMethod method,
                const RelaxationConfig& mcfg = {});

// A fault mid-episode surfaces as this so the partial log still reaches
// the caller. kind is one of "degenerate_geometry", "solver_fault",
// "phase_consistency".
class EpisodeAbort : public std::runtime_error {
 public:
  EpisodeAbort(std::string k, const std::string& what, EpisodeLog log)
      : std::runtime_error(what), kind(std::move(k)), partial(std::move(log)) {}
  std::string kind;
  EpisodeLog partial;
};

EpisodeLog run_episode(World w, FilterMethod method,
                       const RelaxationConfig& mcfg = {});
EpisodeLog run_episode(const ScenarioConfig& cfg, FilterMethod method,
                       const RelaxationConfig& mcfg = {});

// Hand-built stress worlds keyed by which infeasibility class they exhibit:
//   method_infeasibility      point robot between two planes whose clearance
//                             sits below twice the margin, so no control
//                             satisfies both rows at once
//   inherent_infeasibility    fixed-base humanoid with an obstacle drifting
//                             into the immobile pelvis
//   kinematics_infeasibility  twin pursuers at one speed; one closes on a
//                             torso-mounted sphere along the radial line no
//                             joint can move it on, the other on a wrist
//                             the arm yields to and slips around
std::vector<std::string> scripted_scenario_names();
// ConfigError on an unknown name. data_dir feeds resolve_data_dir for the
// builders that load a shipped robot.
World scripted_world(const std::string& name,
                     const std::string& data_dir = "");

}  // namespace dexsafe
