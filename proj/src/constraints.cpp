#include "dexsafe/constraints.hpp"

namespace dexsafe {

Dynamics Dynamics::first_order(int n) {
  Dynamics d;
  d.f = [n](const VecX&) { return VecX::Zero(n).eval(); };
  d.g = [n](const VecX&) { return MatX::Identity(n, n).eval(); };
  return d;
}

VecX evaluate_phi(const std::vector<Vec3>& centers, const RobotModel& m,
                  const std::vector<CollisionPair>& pairs,
                  const std::vector<Obstacle>& obstacles) {
  VecX phi(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto g = pair_distance(centers, m, pairs[i], obstacles);
    phi[i] = pairs[i].d_min - g.d;
  }
  return phi;
}

ConstraintSet assemble_constraints(const RobotModel& m, const VecX& q,
                                   const std::vector<CollisionPair>& pairs,
                                   const std::vector<Obstacle>& obstacles,
                                   const Dynamics& dyn) {
  ConstraintSet cs;
  auto tf = frame_transforms(m, q);
  std::vector<Vec3> centers(m.spheres.size());
  for (size_t s = 0; s < m.spheres.size(); ++s)
    centers[s] = tf[m.spheres[s].frame].p +
                 tf[m.spheres[s].frame].R * m.spheres[s].offset;

  cs.phi.resize(pairs.size());
  std::vector<int> active;
  std::vector<PairGeometry> geom(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    geom[i] = pair_distance(centers, m, pairs[i], obstacles);
    cs.phi[i] = pairs[i].d_min - geom[i].d;
    if (cs.phi[i] >= 0.0) active.push_back(int(i));
  }

  const int nu = int(dyn.g(q).cols());
  cs.rows.resize(active.size(), nu);
  cs.offsets.resize(active.size());
  cs.weights.resize(active.size());
  cs.pair_ids = active;
  for (size_t r = 0; r < active.size(); ++r)
    cs.weights[r] = pairs[active[r]].weight;

  if (!active.empty()) {
    VecX f = dyn.f(q);
    MatX g = dyn.g(q);
    // cache jacobians per sphere, several active pairs can share one
    std::vector<MatX> jac(m.spheres.size());
    std::vector<bool> have(m.spheres.size(), false);
    auto jac_of = [&](int s) -> const MatX& {
      if (!have[s]) {
        jac[s] = point_jacobian(m, tf, s);
        have[s] = true;
      }
      return jac[s];
    };

    for (size_t r = 0; r < active.size(); ++r) {
      const CollisionPair& p = pairs[active[r]];
      const Vec3& dir = geom[active[r]].dir;
      // grad_q d; phi = d_min - d flips the sign below
      VecX grad_d;
      if (p.kind == PairKind::kSelf)
        grad_d = (dir.transpose() * (jac_of(p.body) - jac_of(p.partner)))
                     .transpose();
      else
        grad_d = (dir.transpose() * jac_of(p.body)).transpose();
      double lf = -grad_d.dot(f);
      cs.rows.row(r) = -(grad_d.transpose() * g);
      cs.offsets[r] = -p.eta - lf;
    }
  }

  cs.box_lower = m.vel_lower;
  cs.box_upper = m.vel_upper;
  return cs;
}

}  // namespace dexsafe
