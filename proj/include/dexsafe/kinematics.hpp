#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dexsafe/types.hpp"

namespace dexsafe {

enum class JointKind { kRevolute, kPrismatic, kFixed, kFreeTranslation };

// One node of the kinematic tree. The fixed transform (origin_xyz, origin_rpy)
// maps the joint frame into the parent frame; the joint motion acts after it.
// RPY composes as Rz(yaw) * Ry(pitch) * Rx(roll).
struct JointSpec {
  std::string name;
  int parent = -1;  // joint index, -1 means the world frame
  Vec3 origin_xyz = Vec3::Zero();
  Vec3 origin_rpy = Vec3::Zero();
  JointKind kind = JointKind::kFixed;
  Vec3 axis = Vec3::UnitZ();  // unit, expressed in the joint frame
  // one (lo, hi) row per dof of this joint
  Eigen::Matrix<double, Eigen::Dynamic, 2> position_limits;
  int dof_start = -1;  // global dof index of the first dof, -1 when none
  int dof_count = 0;   // 0 fixed, 1 revolute/prismatic, 3 free translation
};

struct SphereSpec {
  std::string name;
  int frame = -1;  // joint whose frame the sphere is rigid in
  Vec3 offset = Vec3::Zero();
  double radius = 0.0;  // > 0
};

struct RobotModel {
  std::string name;
  // topologically ordered: parent index < own index
  std::vector<JointSpec> joints;
  std::vector<SphereSpec> spheres;
  std::vector<std::array<int, 2>> self_pairs;  // sphere index pairs, i < j
  VecX vel_lower, vel_upper;  // per dof
  VecX pos_lower, pos_upper;  // per dof, flattened from joint limits
  VecX home;  // start configuration, zero for joints the file leaves out
  int dofs = 0;

  int joint_index(std::string_view name) const;   // -1 when absent
  int sphere_index(std::string_view name) const;  // -1 when absent
};

using JointState = VecX;

// Parses and validates a model. Throws ConfigError on any violation:
// duplicate or empty names, unknown parents, non-unit axes, radius <= 0,
// bad limit ordering, self pairs naming unknown spheres or repeating.
RobotModel parse_robot_model(const nlohmann::json& j);
RobotModel load_robot_model(const std::string& path);

// World position of every sphere center at configuration q.
std::vector<Vec3> forward_kinematics(const RobotModel& m, const VecX& q);

// World transform of every joint frame; FK of spheres is a thin wrapper.
struct FrameTransform {
  Eigen::Matrix3d R;
  Vec3 p;
};
std::vector<FrameTransform> frame_transforms(const RobotModel& m,
                                             const VecX& q);

// 3 x dofs Jacobian of one sphere center with respect to q. Columns of
// joints off the root path are zero.
MatX point_jacobian(const RobotModel& m, const VecX& q, int sphere);

// Same but reuses precomputed frame transforms (hot path in the simulator).
MatX point_jacobian(const RobotModel& m, const std::vector<FrameTransform>& tf,
                    int sphere);

}  // namespace dexsafe
