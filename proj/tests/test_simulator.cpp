#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dexsafe/rng.hpp"
#include "dexsafe/simulator.hpp"
#include "support/models.hpp"

using namespace dexsafe;
namespace ts = dexsafe::testsupport;

namespace {

const std::string kData = DEXSAFE_TEST_DATA_DIR;

ScenarioConfig preset(const std::string& name) {
  return load_scenario(kData + "/scenarios/" + name + ".json");
}

// Point-robot config with no file behind it; obstacles land in [lo, hi]^3.
ScenarioConfig point_cfg(double lo, double hi, int obstacles = 0) {
  ScenarioConfig cfg;
  cfg.name = "point_test";
  cfg.motion = ObstacleMotion::kStatic;
  cfg.obstacle_count = obstacles;
  cfg.task_lower = Vec3::Constant(lo);
  cfg.task_upper = Vec3::Constant(hi);
  cfg.steps = 10;
  cfg.seed = 7;
  return cfg;
}

double surface_distance(const std::vector<Vec3>& centers, const RobotModel& m,
                        const Obstacle& o) {
  double best = kInf;
  for (size_t s = 0; s < m.spheres.size(); ++s) {
    double d = (centers[s] - o.center).norm() - m.spheres[s].radius - o.radius;
    best = std::min(best, d);
  }
  return best;
}

}  // namespace

TEST_CASE("scenario: shipped presets pin the published roster") {
  struct Row {
    const char* name;
    int obstacles;
    bool brownian;
    double xlo, xhi;
  };
  const Row rows[] = {
      {"G1WholeBody_SO_V0", 50, false, -0.15, 0.65},
      {"G1WholeBody_SO_V1", 10, false, -0.15, 0.65},
      {"G1WholeBody_DO_V0", 50, true, -1.0, 1.0},
      {"G1WholeBody_DO_V1", 10, true, -1.0, 1.0},
      {"G1FixedBase_SO_V0", 10, false, -0.15, 0.65},
      {"G1FixedBase_SO_V1", 5, false, -0.15, 0.65},
      {"G1FixedBase_DO_V0", 10, true, -1.0, 1.0},
      {"G1FixedBase_DO_V1", 5, true, -1.0, 1.0},
  };
  for (const Row& r : rows) {
    CAPTURE(r.name);
    ScenarioConfig cfg = preset(r.name);
    CHECK(cfg.name == r.name);
    CHECK(cfg.obstacle_count == r.obstacles);
    CHECK(cfg.motion ==
          (r.brownian ? ObstacleMotion::kBrownian : ObstacleMotion::kStatic));
    CHECK(cfg.task_lower.x() == doctest::Approx(r.xlo));
    CHECK(cfg.task_upper.x() == doctest::Approx(r.xhi));
    CHECK(cfg.obstacle_radius == doctest::Approx(0.05));
    CHECK(cfg.d_min_env == doctest::Approx(0.05));
    CHECK(cfg.d_min_self == doctest::Approx(0.01));
    CHECK(cfg.eta == doctest::Approx(0.5));
    CHECK(cfg.dt == doctest::Approx(0.01));
    CHECK(cfg.steps == 2000);
    CHECK(cfg.goal_threshold == doctest::Approx(0.05));
    // the loader must have produced a loadable robot path
    RobotModel m = load_robot_model(cfg.robot);
    CHECK(m.spheres.size() == 19);
  }
}

TEST_CASE("scenario: parse rejects malformed input") {
  auto base = nlohmann::json::parse(R"({
    "name": "t", "robot": "r.json", "mode": "SO", "obstacle_count": 1,
    "task_space": {"min": [0,0,0], "max": [1,1,1]}
  })");
  CHECK_NOTHROW(parse_scenario(base));
  {
    auto j = base;
    j.erase("robot");
    CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  }
  {
    auto j = base;
    j["mode"] = "teleport";
    CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  }
  {
    auto j = base;
    j["dt"] = 0.0;
    CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  }
  {
    auto j = base;
    j["steps"] = 0;
    CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  }
  {
    auto j = base;
    j["obstacle_radius"] = -0.1;
    CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  }
  {
    auto j = base;
    j["obstacle_count"] = -1;
    CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  }
  {
    auto j = base;
    j["task_space"]["min"] = {2.0, 0.0, 0.0};  // crosses max
    CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  }
}

TEST_CASE("init: obstacle placement respects the start clearance") {
  ScenarioConfig cfg = preset("G1FixedBase_SO_V0");
  World w = init_scenario(cfg);
  CHECK(w.obstacles.size() == 10);
  CHECK(w.pairs.size() == 19 * 10 + 29);
  CHECK(w.model_hash != 0);
  CHECK(w.q.size() == w.model.dofs);
  CHECK((w.q - w.model.home).norm() == 0.0);

  auto centers = forward_kinematics(w.model, w.q);
  for (const Obstacle& o : w.obstacles) {
    CHECK(o.kind == ObstacleKind::kSphere);
    for (int a = 0; a < 3; ++a) {
      CHECK(o.center[a] >= cfg.task_lower[a]);
      CHECK(o.center[a] <= cfg.task_upper[a]);
    }
    CHECK(surface_distance(centers, w.model, o) >= cfg.d_min_env - 1e-12);
  }

  // fixed base tracks the two wrists only
  REQUIRE(w.tracked.size() == 2);
  CHECK(w.goals.size() == 2);
  CHECK(w.goals[0].first == "L_ee");
  CHECK(w.goals[1].first == "R_ee");
  for (const auto& [name, g] : w.goals)
    for (int a = 0; a < 3; ++a) {
      CHECK(g[a] >= cfg.task_lower[a]);
      CHECK(g[a] <= cfg.task_upper[a]);
    }

  // the mobile variant adds the base point
  World wb = init_scenario(preset("G1WholeBody_SO_V1"));
  REQUIRE(wb.goals.size() == 3);
  CHECK(wb.goals[2].first == "pelvis");
}

TEST_CASE("init: zero obstacles still spawns goals") {
  World w = init_scenario(point_cfg(-1.0, 1.0, 0), ts::point_robot());
  CHECK(w.obstacles.empty());
  CHECK(w.pairs.empty());
  REQUIRE(w.goals.size() == 1);
  CHECK(w.goals[0].first == "R_ee");
}

TEST_CASE("init: same seed twice is bit-identical") {
  ScenarioConfig cfg = preset("G1FixedBase_SO_V1");
  World a = init_scenario(cfg);
  World b = init_scenario(cfg);
  REQUIRE(a.obstacles.size() == b.obstacles.size());
  for (size_t i = 0; i < a.obstacles.size(); ++i)
    CHECK((a.obstacles[i].center - b.obstacles[i].center).norm() == 0.0);
  REQUIRE(a.goals.size() == b.goals.size());
  for (size_t i = 0; i < a.goals.size(); ++i)
    CHECK((a.goals[i].second - b.goals[i].second).norm() == 0.0);
}

TEST_CASE("init: goal stream ignores obstacle draws") {
  ScenarioConfig five = preset("G1FixedBase_SO_V1");
  ScenarioConfig ten = preset("G1FixedBase_SO_V0");
  five.seed = ten.seed = 123;
  World a = init_scenario(five);
  World b = init_scenario(ten);
  REQUIRE(a.goals.size() == b.goals.size());
  for (size_t i = 0; i < a.goals.size(); ++i)
    CHECK((a.goals[i].second - b.goals[i].second).norm() == 0.0);
}

TEST_CASE("init: over-dense config errors out") {
  ScenarioConfig cfg = preset("G1FixedBase_SO_V1");
  cfg.obstacle_count = 1;
  // every point of this box sits closer to the pelvis sphere than the
  // required clearance, so placement can never succeed
  cfg.task_lower = Vec3(-0.02, -0.02, 0.0);
  cfg.task_upper = Vec3(0.02, 0.02, 0.04);
  CHECK_THROWS_AS(init_scenario(cfg), ConfigError);
}

TEST_CASE("step: free goal pursuit moves along the reference") {
  World w = init_scenario(point_cfg(-1.0, 1.0), ts::point_robot());
  w.goals[0].second = Vec3(5.0, 0.0, 0.0);  // beyond saturation the whole run
  for (int k = 0; k < 10; ++k) {
    StepRecord r = step(w, FilterMethod::kPssa);
    CHECK(r.t == k);
    CHECK(r.q.x() == doctest::Approx(0.01 * k).epsilon(1e-12));
    CHECK(r.u.x() == doctest::Approx(1.0));
    CHECK(std::abs(r.u.y()) < 1e-9);
    CHECK(r.feasible);
    CHECK(r.slack.empty());
    CHECK(r.distance.empty());
    REQUIRE(r.goal_distance.size() == 1);
    CHECK(r.goal_distance[0] == doctest::Approx(5.0 - 0.01 * k).epsilon(1e-9));
  }
  CHECK(w.q.x() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("step: integration clamps at position limits") {
  World w = init_scenario(point_cfg(-1.0, 1.0), ts::point_robot());
  w.goals[0].second = Vec3(50.0, 0.0, 0.0);
  w.q = VecX::Zero(3);
  w.q[0] = 9.995;  // limit is 10
  step(w, FilterMethod::kSsa);
  CHECK(w.q[0] == doctest::Approx(10.0).epsilon(1e-12));
  step(w, FilterMethod::kSsa);
  CHECK(w.q[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("step: static and zero-sigma obstacles never move") {
  for (auto motion : {ObstacleMotion::kStatic, ObstacleMotion::kBrownian}) {
    ScenarioConfig cfg = point_cfg(-1.0, 1.0, 4);
    cfg.motion = motion;
    cfg.brownian_sigma = motion == ObstacleMotion::kBrownian ? 0.0 : 0.05;
    World w = init_scenario(cfg, ts::point_robot());
    std::vector<Vec3> before;
    for (const auto& o : w.obstacles) before.push_back(o.center);
    for (int k = 0; k < 5; ++k) step(w, FilterMethod::kPssa);
    for (size_t i = 0; i < w.obstacles.size(); ++i)
      CHECK((w.obstacles[i].center - before[i]).norm() == 0.0);
  }
}

TEST_CASE("step: brownian obstacles move and stay inside the box") {
  ScenarioConfig cfg = point_cfg(-0.4, 0.4, 6);
  cfg.motion = ObstacleMotion::kBrownian;
  cfg.brownian_sigma = 0.05;
  cfg.seed = 11;
  World w = init_scenario(cfg, ts::point_robot(1e-3));
  std::vector<Vec3> before;
  for (const auto& o : w.obstacles) before.push_back(o.center);
  double moved = 0.0;
  for (int k = 0; k < 200; ++k) {
    step(w, FilterMethod::kPssa);
    for (const auto& o : w.obstacles)
      for (int a = 0; a < 3; ++a) {
        CHECK(o.center[a] >= cfg.task_lower[a]);
        CHECK(o.center[a] <= cfg.task_upper[a]);
      }
  }
  for (size_t i = 0; i < w.obstacles.size(); ++i)
    moved += (w.obstacles[i].center - before[i]).norm();
  CHECK(moved > 0.1);
}

TEST_CASE("step: reaching a goal respawns it from the goal stream") {
  ScenarioConfig cfg = point_cfg(0.3, 0.5);
  cfg.goal_threshold = 0.05;
  cfg.seed = 42;
  World w = init_scenario(cfg, ts::point_robot());
  Vec3 g0 = w.goals[0].second;

  // replay the stream by hand: three coordinates for the initial goal,
  // three more for the first respawn
  RngStream replay(cfg.seed, "goals");
  Vec3 expect0, expect1;
  for (int a = 0; a < 3; ++a)
    expect0[a] = replay.uniform(cfg.task_lower[a], cfg.task_upper[a]);
  for (int a = 0; a < 3; ++a)
    expect1[a] = replay.uniform(cfg.task_lower[a], cfg.task_upper[a]);
  CHECK((g0 - expect0).norm() == 0.0);

  int respawn_step = -1;
  for (int k = 0; k < 200; ++k) {
    step(w, FilterMethod::kPssa);
    if ((w.goals[0].second - g0).norm() > 0.0) {
      respawn_step = k;
      break;
    }
  }
  REQUIRE(respawn_step >= 0);
  CHECK((w.goals[0].second - expect1).norm() == 0.0);

  // respawn fires only once the tip is actually inside the threshold
  auto centers = forward_kinematics(w.model, w.q);
  CHECK((centers[0] - g0).norm() <= cfg.goal_threshold + 1e-9);
}

TEST_CASE("episode: clean run logs every step with invariants") {
  ScenarioConfig cfg = preset("G1FixedBase_SO_V1");
  cfg.steps = 40;
  EpisodeLog log = run_episode(cfg, FilterMethod::kPssa);
  CHECK(!log.aborted);
  CHECK(log.abort_reason.empty());
  REQUIRE(int(log.steps.size()) == cfg.steps);
  CHECK(log.model_hash != 0);
  CHECK(log.pair_info.size() == 19 * 5 + 29);
  REQUIRE(log.tracked_names.size() == 2);
  CHECK(log.tracked_names[0] == "L_ee");
  CHECK(method_name(log.method) == std::string("pssa"));

  RobotModel m = load_robot_model(cfg.robot);
  for (const StepRecord& r : log.steps) {
    CHECK((r.q.array() >= m.pos_lower.array() - 1e-12).all());
    CHECK((r.q.array() <= m.pos_upper.array() + 1e-12).all());
    CHECK((r.u.array() >= m.vel_lower.array() - 1e-9).all());
    CHECK((r.u.array() <= m.vel_upper.array() + 1e-9).all());
    for (const PairSample& s : r.slack) CHECK(s.value > 0.0);
    for (const PairSample& d : r.distance) CHECK(d.value < cfg.log_cutoff);
    CHECK(r.goal_distance.size() == 2);
  }
}

TEST_CASE("episode: same inputs give bit-identical logs") {
  ScenarioConfig cfg = preset("G1FixedBase_SO_V1");
  cfg.steps = 30;
  cfg.seed = 9;
  EpisodeLog a = run_episode(cfg, FilterMethod::kRssa);
  EpisodeLog b = run_episode(cfg, FilterMethod::kRssa);
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t k = 0; k < a.steps.size(); ++k) {
    const StepRecord &ra = a.steps[k], &rb = b.steps[k];
    CHECK((ra.q - rb.q).norm() == 0.0);
    CHECK((ra.u_ref - rb.u_ref).norm() == 0.0);
    CHECK((ra.u - rb.u).norm() == 0.0);
    CHECK(ra.feasible == rb.feasible);
    REQUIRE(ra.slack.size() == rb.slack.size());
    for (size_t i = 0; i < ra.slack.size(); ++i) {
      CHECK(ra.slack[i].pair == rb.slack[i].pair);
      CHECK(ra.slack[i].value == rb.slack[i].value);
    }
    REQUIRE(ra.distance.size() == rb.distance.size());
    for (size_t i = 0; i < ra.distance.size(); ++i)
      CHECK(ra.distance[i].value == rb.distance[i].value);
    REQUIRE(ra.goal_distance.size() == rb.goal_distance.size());
    for (size_t i = 0; i < ra.goal_distance.size(); ++i)
      CHECK(ra.goal_distance[i] == rb.goal_distance[i]);
  }
}

TEST_CASE("episode: every filter drives the humanoid") {
  ScenarioConfig cfg = preset("G1FixedBase_SO_V1");
  cfg.steps = 25;
  for (auto m : {FilterMethod::kSsa, FilterMethod::kRssa, FilterMethod::kPssa}) {
    CAPTURE(method_name(m));
    EpisodeLog log = run_episode(cfg, m);
    CHECK(int(log.steps.size()) == cfg.steps);
    for (const StepRecord& r : log.steps) CHECK(r.u.allFinite());
  }
}

TEST_CASE("episode: degenerate geometry aborts with the partial log") {
  // the slider runs dead-on into a point obstacle at x = 0.03; the centers
  // coincide on the fourth constraint assembly
  ScenarioConfig cfg = point_cfg(5.0, 6.0);
  cfg.name = "degenerate";
  cfg.steps = 10;
  cfg.d_min_env = 1e-6;
  cfg.tracked_points = {"tip"};
  World w = init_scenario(cfg, ts::slider_1d(1e-9));
  w.obstacles.push_back(Obstacle::sphere(Vec3(0.03, 0.0, 0.0), 1e-9));
  w.pairs = enumerate_pairs(w.model, w.obstacles, cfg.d_min_env,
                            cfg.d_min_self, cfg.eta);
  w.goals = {{"tip", Vec3(5.0, 0.0, 0.0)}};

  try {
    run_episode(w, FilterMethod::kPssa);
    FAIL("expected EpisodeAbort");
  } catch (const EpisodeAbort& e) {
    CHECK(e.kind == "degenerate_geometry");
    CHECK(e.partial.aborted);
    CHECK(!e.partial.abort_reason.empty());
    CHECK(e.partial.steps.size() == 3);
  }
}

TEST_CASE("scripted: roster and unknown-name rejection") {
  auto names = scripted_scenario_names();
  REQUIRE(names.size() == 3);
  CHECK(std::count(names.begin(), names.end(), "method_infeasibility") == 1);
  CHECK(std::count(names.begin(), names.end(), "inherent_infeasibility") == 1);
  CHECK(std::count(names.begin(), names.end(), "kinematics_infeasibility") == 1);
  CHECK_THROWS_AS(scripted_world("nope", kData), ConfigError);
}

TEST_CASE("scripted: method_infeasibility sustains the two-wall conflict") {
  World w = scripted_world("method_infeasibility", kData);
  REQUIRE(w.obstacles.size() == 2);
  CHECK(w.obstacles[0].kind == ObstacleKind::kPlane);
  w.cfg.steps = 60;
  EpisodeLog log = run_episode(w, FilterMethod::kPssa);
  REQUIRE(log.steps.size() == 60);
  for (const StepRecord& r : log.steps) {
    CHECK(!r.feasible);
    REQUIRE(r.slack.size() == 2);
    CHECK(r.slack[0].value == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.slack[1].value == doctest::Approx(0.5).epsilon(1e-6));
    // squeezed direction stays frozen while travel continues
    CHECK(std::abs(r.u.y()) < 1e-6);
    CHECK(r.u.x() > 0.1);
  }
  // the filtered robot never leaves the mid-plane
  CHECK(std::abs(log.steps.back().q[1]) < 1e-6);
}

TEST_CASE("scripted: inherent_infeasibility pins the base pair at full slack") {
  World w = scripted_world("inherent_infeasibility", kData);
  EpisodeLog log = run_episode(w, FilterMethod::kPssa);
  int pelvis = w.model.sphere_index("pelvis");
  REQUIRE(pelvis >= 0);

  // locate the env pair that watches the pelvis
  int target = -1;
  for (size_t i = 0; i < w.pairs.size(); ++i)
    if (w.pairs[i].kind == PairKind::kEnv && w.pairs[i].body == pelvis)
      target = int(i);
  REQUIRE(target >= 0);

  int pinned = 0;
  double min_d = kInf;
  for (const StepRecord& r : log.steps) {
    for (const PairSample& s : r.slack)
      if (s.pair == target && std::abs(s.value - 0.5) < 1e-6) ++pinned;
    for (const PairSample& d : r.distance)
      if (d.pair == target) min_d = std::min(min_d, d.value);
  }
  // once the pair activates, a zero jacobian row leaves the full margin
  // rate as slack, and the sphere eventually penetrates
  CHECK(pinned > 50);
  CHECK(min_d < 0.0);
  // no joint moves the pelvis sphere, which is what makes it inherent
  CHECK(point_jacobian(w.model, w.q, pelvis).norm() == 0.0);
}

TEST_CASE("scripted: kinematics_infeasibility splits by chain mobility") {
  World w = scripted_world("kinematics_infeasibility", kData);
  EpisodeLog log = run_episode(w, FilterMethod::kPssa);

  auto arm_of = [&](int pair) {
    int body = w.pairs[pair].body;
    const std::string& n = w.model.spheres[body].name;
    if (n.find("left") != std::string::npos || n == "L_ee") return 'L';
    if (n.find("right") != std::string::npos || n == "R_ee") return 'R';
    return '?';
  };

  double left_slack = 0.0, right_slack = 0.0;
  for (const StepRecord& r : log.steps)
    for (const PairSample& s : r.slack) {
      if (w.pairs[s.pair].kind != PairKind::kEnv) continue;
      if (arm_of(s.pair) == 'L') left_slack += s.value;
      if (arm_of(s.pair) == 'R') right_slack += s.value;
    }
  // no joint moves the shoulder sphere along its pursuer's approach line,
  // so that side keeps most of the demanded rate as slack every active
  // step; the wrist side retreats and sidesteps within its rate budget
  CHECK(left_slack > 1.0);
  CHECK(right_slack < 0.01 * left_slack);
}
