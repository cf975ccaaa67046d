#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dexsafe/constraints.hpp"
#include "dexsafe/kinematics.hpp"
#include "dexsafe/qp.hpp"

namespace dexsafe {

// Damped least-squares tracking toward per-point goals. Goals name model
// spheres; errors are stacked in the given order.
using GoalMap = std::vector<std::pair<std::string, Vec3>>;

struct TrackingGains {
  double kp = 5.0;
  double damping = 0.05;
};

VecX nominal_control(const RobotModel& m, const JointState& q,
                     const GoalMap& goals, const TrackingGains& gains = {});

enum class FilterMethod { kSsa, kRssa, kPssa };

FilterMethod parse_method(const std::string& name);
const char* method_name(FilterMethod m);

// Weights for the relaxation machinery. Q scales velocity tracking
// (diagonal, empty means identity). Qs holds one slack weight per
// monitored pair; empty falls back to the pair weights carried by the
// constraint set. p picks the slack penalty norm.
struct RelaxationConfig {
  VecX Q;
  VecX Qs;
  int p = 2;
  QpSettings qp;
};

struct SolverStats {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct FilterResult {
  VecX u;
  VecX s;  // one entry per monitored pair, zero while inactive
  bool feasible = true;
  FilterMethod method = FilterMethod::kSsa;
  SolverStats stats;
};

// Hard-constraint tracking. When the constraints admit no control the
// clamped reference passes through and s reports its violations.
FilterResult ssa_filter(const ConstraintSet& cs, const VecX& u_ref,
                        const RelaxationConfig& cfg = {});

// Joint minimization over control and slack; constraints are soft at a
// price set by Qs.
FilterResult rssa_filter(const ConstraintSet& cs, const VecX& u_ref,
                         const RelaxationConfig& cfg = {});

// Two-phase scheme: project the constraint set to the nearest feasible
// relaxation, then track inside it. Phase II is strictly feasible by
// construction; a non-optimal phase II raises PhaseConsistencyFault.
FilterResult pssa_filter(const ConstraintSet& cs, const VecX& u_ref,
                         const RelaxationConfig& cfg = {});

FilterResult apply_filter(FilterMethod m, const ConstraintSet& cs,
                          const VecX& u_ref, const RelaxationConfig& cfg = {});

}  // namespace dexsafe
