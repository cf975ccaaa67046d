#pragma once

#include <vector>

#include "dexsafe/kinematics.hpp"
#include "dexsafe/types.hpp"

namespace dexsafe {

enum class ObstacleKind { kSphere, kPlane };

// Sphere: center/radius. Plane: half space, unit normal points toward the
// free side, anchored at 'point'.
struct Obstacle {
  ObstacleKind kind = ObstacleKind::kSphere;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  Vec3 normal = Vec3::UnitZ();
  Vec3 point = Vec3::Zero();

  static Obstacle sphere(const Vec3& c, double r) {
    Obstacle o;
    o.kind = ObstacleKind::kSphere;
    o.center = c;
    o.radius = r;
    return o;
  }
  static Obstacle plane(const Vec3& n, const Vec3& p) {
    Obstacle o;
    o.kind = ObstacleKind::kPlane;
    o.normal = n.normalized();
    o.point = p;
    return o;
  }
};

enum class PairKind { kEnv, kSelf };

// One monitored (body, partner) pair. body indexes the model spheres;
// partner indexes obstacles for kEnv and model spheres for kSelf.
struct CollisionPair {
  PairKind kind = PairKind::kEnv;
  int body = -1;
  int partner = -1;
  double d_min = 0.0;
  double eta = 0.5;     // required margin rate once the pair activates
  double weight = 1.0;  // slack weight assigned to this pair's constraint
};

// Surface distance plus the gradient direction of d with respect to the
// body center (unit vector from partner toward body; plane normal for
// planes). Throws DegenerateGeometry when centers coincide within 1e-9.
struct PairGeometry {
  double d = 0.0;
  Vec3 dir = Vec3::Zero();
};

PairGeometry pair_distance(const std::vector<Vec3>& centers,
                           const RobotModel& m, const CollisionPair& pair,
                           const std::vector<Obstacle>& obstacles);

// Every body-obstacle pair (body-major, obstacle-minor) followed by the
// model's self pairs, preserving model order. Count is
// spheres x obstacles + self pairs.
std::vector<CollisionPair> enumerate_pairs(const RobotModel& m,
                                           const std::vector<Obstacle>& obs,
                                           double d_min_env,
                                           double d_min_self,
                                           double eta = 0.5);

}  // namespace dexsafe
