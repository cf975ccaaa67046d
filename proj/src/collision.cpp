#include "dexsafe/collision.hpp"

namespace dexsafe {

PairGeometry pair_distance(const std::vector<Vec3>& centers,
                           const RobotModel& m, const CollisionPair& pair,
                           const std::vector<Obstacle>& obstacles) {
  PairGeometry g;
  const Vec3& body = centers[pair.body];
  const double body_r = m.spheres[pair.body].radius;

  if (pair.kind == PairKind::kSelf) {
    const Vec3& other = centers[pair.partner];
    Vec3 diff = body - other;
    double n = diff.norm();
    if (n < 1e-9)
      throw DegenerateGeometry("coincident sphere centers for pair " +
                               m.spheres[pair.body].name + "/" +
                               m.spheres[pair.partner].name);
    g.d = n - body_r - m.spheres[pair.partner].radius;
    g.dir = diff / n;
    return g;
  }

  const Obstacle& o = obstacles[pair.partner];
  if (o.kind == ObstacleKind::kSphere) {
    Vec3 diff = body - o.center;
    double n = diff.norm();
    if (n < 1e-9)
      throw DegenerateGeometry("sphere center coincides with obstacle at " +
                               m.spheres[pair.body].name);
    g.d = n - body_r - o.radius;
    g.dir = diff / n;
  } else {
    g.d = o.normal.dot(body - o.point) - body_r;
    g.dir = o.normal;
  }
  return g;
}

std::vector<CollisionPair> enumerate_pairs(const RobotModel& m,
                                           const std::vector<Obstacle>& obs,
                                           double d_min_env,
                                           double d_min_self, double eta) {
  std::vector<CollisionPair> pairs;
  pairs.reserve(m.spheres.size() * obs.size() + m.self_pairs.size());
  for (size_t s = 0; s < m.spheres.size(); ++s)
    for (size_t o = 0; o < obs.size(); ++o)
      pairs.push_back({PairKind::kEnv, int(s), int(o), d_min_env, eta, 1.0});
  for (const auto& sp : m.self_pairs)
    pairs.push_back({PairKind::kSelf, sp[0], sp[1], d_min_self, eta, 1.0});
  return pairs;
}

}  // namespace dexsafe
