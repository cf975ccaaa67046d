#pragma once

#include <functional>
#include <vector>

#include "dexsafe/collision.hpp"
#include "dexsafe/kinematics.hpp"
#include "dexsafe/types.hpp"

namespace dexsafe {

// Control-affine dynamics xdot = f(x) + g(x) u. The benchmark runs the
// first-order integrator (f = 0, g = I) where state equals configuration.
struct Dynamics {
  std::function<VecX(const VecX&)> f;
  std::function<MatX(const VecX&)> g;

  static Dynamics first_order(int n);
};

// Linearized safety constraints at one configuration. Active rows only:
// rows * u <= offsets, plus the control box. phi covers every monitored
// pair so callers can see how close inactive pairs are.
struct ConstraintSet {
  MatX rows;             // M_active x N_u
  VecX offsets;          // M_active
  VecX weights;          // M_active, copied from the pair weights
  std::vector<int> pair_ids;  // row -> index into the pair list
  VecX phi;              // all pairs, phi_i = d_min - d_i
  VecX box_lower, box_upper;  // control bounds, N_u

  int active_count() const { return int(offsets.size()); }
  int total_pairs() const { return int(phi.size()); }
};

// phi for every pair at the given sphere centers.
VecX evaluate_phi(const std::vector<Vec3>& centers, const RobotModel& m,
                  const std::vector<CollisionPair>& pairs,
                  const std::vector<Obstacle>& obstacles);

// Builds the active constraint set at q. A pair is active when phi >= 0.
// Each active row enforces phi_dot <= -eta along the dynamics, with eta
// taken from the pair.
ConstraintSet assemble_constraints(const RobotModel& m, const VecX& q,
                                   const std::vector<CollisionPair>& pairs,
                                   const std::vector<Obstacle>& obstacles,
                                   const Dynamics& dyn);

}  // namespace dexsafe
