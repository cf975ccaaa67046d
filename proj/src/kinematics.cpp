#include "dexsafe/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dexsafe {

namespace {

using nlohmann::json;

Vec3 read_vec3(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
    throw ConfigError(where + ": '" + key + "' must be a 3-array");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = j[key][i].get<double>();
  return v;
}

Eigen::Matrix3d rpy_matrix(const Vec3& rpy) {
  const double cr = std::cos(rpy.x()), sr = std::sin(rpy.x());
  const double cp = std::cos(rpy.y()), sp = std::sin(rpy.y());
  const double cy = std::cos(rpy.z()), sy = std::sin(rpy.z());
  Eigen::Matrix3d R;
  // Rz(yaw) * Ry(pitch) * Rx(roll)
  R << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp, cp * sr, cp * cr;
  return R;
}

// Rodrigues rotation about a unit axis.
Eigen::Matrix3d axis_angle(const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix3d K;
  K << 0, -axis.z(), axis.y(),
       axis.z(), 0, -axis.x(),
       -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() * c + (1.0 - c) * axis * axis.transpose()
         + s * K;
}

JointKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "revolute") return JointKind::kRevolute;
  if (s == "prismatic") return JointKind::kPrismatic;
  if (s == "fixed") return JointKind::kFixed;
  if (s == "free_translation") return JointKind::kFreeTranslation;
  throw ConfigError(where + ": unknown joint type '" + s + "'");
}

}  // namespace

int RobotModel::joint_index(std::string_view name) const {
  for (size_t i = 0; i < joints.size(); ++i)
    if (joints[i].name == name) return int(i);
  return -1;
}

int RobotModel::sphere_index(std::string_view name) const {
  for (size_t i = 0; i < spheres.size(); ++i)
    if (spheres[i].name == name) return int(i);
  return -1;
}

RobotModel parse_robot_model(const json& j) {
  RobotModel m;
  if (!j.contains("name") || !j["name"].is_string())
    throw ConfigError("model: missing 'name'");
  m.name = j["name"].get<std::string>();

  if (!j.contains("joints") || !j["joints"].is_array() || j["joints"].empty())
    throw ConfigError("model: 'joints' must be a nonempty array");

  std::set<std::string> seen;
  for (const auto& jj : j["joints"]) {
    JointSpec js;
    js.name = jj.value("name", std::string());
    const std::string where = "joint '" + js.name + "'";
    if (js.name.empty()) throw ConfigError("model: joint with empty name");
    if (!seen.insert(js.name).second)
      throw ConfigError(where + ": duplicate name");

    std::string parent = jj.value("parent", std::string());
    if (parent.empty()) {
      js.parent = -1;
    } else {
      js.parent = m.joint_index(parent);
      // parents must already be defined, which also rules out cycles
      if (js.parent < 0)
        throw ConfigError(where + ": parent '" + parent +
                          "' not defined earlier");
    }

    js.origin_xyz = read_vec3(jj, "origin_xyz", where);
    js.origin_rpy = read_vec3(jj, "origin_rpy", where);
    js.kind = parse_kind(jj.value("type", std::string()), where);

    if (js.kind == JointKind::kRevolute || js.kind == JointKind::kPrismatic) {
      js.axis = read_vec3(jj, "axis", where);
      if (std::abs(js.axis.norm() - 1.0) > 1e-9)
        throw ConfigError(where + ": axis must be unit length");
      js.dof_count = 1;
    } else if (js.kind == JointKind::kFreeTranslation) {
      js.dof_count = 3;
    }

    if (js.dof_count > 0) {
      if (!jj.contains("limits"))
        throw ConfigError(where + ": missing 'limits'");
      const auto& lim = jj["limits"];
      js.position_limits.resize(js.dof_count, 2);
      if (js.dof_count == 1) {
        if (!lim.is_array() || lim.size() != 2 || lim[0].is_array())
          throw ConfigError(where + ": 'limits' must be [lo, hi]");
        js.position_limits(0, 0) = lim[0].get<double>();
        js.position_limits(0, 1) = lim[1].get<double>();
      } else {
        if (!lim.is_array() || lim.size() != size_t(js.dof_count))
          throw ConfigError(where + ": 'limits' must list one pair per dof");
        for (int d = 0; d < js.dof_count; ++d) {
          if (!lim[d].is_array() || lim[d].size() != 2)
            throw ConfigError(where + ": 'limits' entries must be [lo, hi]");
          js.position_limits(d, 0) = lim[d][0].get<double>();
          js.position_limits(d, 1) = lim[d][1].get<double>();
        }
      }
      for (int d = 0; d < js.dof_count; ++d)
        if (js.position_limits(d, 0) > js.position_limits(d, 1))
          throw ConfigError(where + ": limit lower > upper");
      js.dof_start = m.dofs;
      m.dofs += js.dof_count;
    }
    m.joints.push_back(std::move(js));
  }

  m.pos_lower.resize(m.dofs);
  m.pos_upper.resize(m.dofs);
  for (const auto& js : m.joints)
    for (int d = 0; d < js.dof_count; ++d) {
      m.pos_lower[js.dof_start + d] = js.position_limits(d, 0);
      m.pos_upper[js.dof_start + d] = js.position_limits(d, 1);
    }

  if (!j.contains("spheres") || !j["spheres"].is_array() ||
      j["spheres"].empty())
    throw ConfigError("model: 'spheres' must be a nonempty array");
  std::set<std::string> sphere_names;
  for (const auto& sj : j["spheres"]) {
    SphereSpec s;
    s.name = sj.value("name", std::string());
    const std::string where = "sphere '" + s.name + "'";
    if (s.name.empty()) throw ConfigError("model: sphere with empty name");
    if (!sphere_names.insert(s.name).second)
      throw ConfigError(where + ": duplicate name");
    std::string frame = sj.value("frame", std::string());
    s.frame = m.joint_index(frame);
    if (s.frame < 0)
      throw ConfigError(where + ": unknown frame '" + frame + "'");
    s.offset = read_vec3(sj, "offset", where);
    s.radius = sj.value("radius", 0.0);
    if (!(s.radius > 0.0)) throw ConfigError(where + ": radius must be > 0");
    m.spheres.push_back(std::move(s));
  }

  if (!j.contains("self_collision_pairs") ||
      !j["self_collision_pairs"].is_array())
    throw ConfigError("model: missing 'self_collision_pairs'");
  std::set<std::pair<int, int>> pair_seen;
  for (const auto& pj : j["self_collision_pairs"]) {
    if (!pj.is_array() || pj.size() != 2)
      throw ConfigError("model: self pair must name two spheres");
    int a = m.sphere_index(pj[0].get<std::string>());
    int b = m.sphere_index(pj[1].get<std::string>());
    if (a < 0 || b < 0)
      throw ConfigError("model: self pair names unknown sphere");
    if (a == b) throw ConfigError("model: self pair repeats a sphere");
    auto key = std::minmax(a, b);
    if (!pair_seen.insert({key.first, key.second}).second)
      throw ConfigError("model: duplicate self pair");
    m.self_pairs.push_back({key.first, key.second});
  }

  m.home = VecX::Zero(m.dofs);
  if (j.contains("home")) {
    if (!j["home"].is_object())
      throw ConfigError("model: 'home' must map joint names to values");
    for (const auto& [name, val] : j["home"].items()) {
      int ji = m.joint_index(name);
      if (ji < 0) throw ConfigError("model: home names unknown joint " + name);
      const JointSpec& js = m.joints[ji];
      if (js.dof_count != 1)
        throw ConfigError("model: home entry '" + name +
                          "' must be a single-dof joint");
      double v = val.get<double>();
      if (v < js.position_limits(0, 0) || v > js.position_limits(0, 1))
        throw ConfigError("model: home value for '" + name +
                          "' outside position limits");
      m.home[js.dof_start] = v;
    }
  }

  if (!j.contains("velocity_limits"))
    throw ConfigError("model: missing 'velocity_limits'");
  const auto& vl = j["velocity_limits"];
  if (!vl.contains("lower") || !vl.contains("upper") ||
      vl["lower"].size() != size_t(m.dofs) ||
      vl["upper"].size() != size_t(m.dofs))
    throw ConfigError("model: velocity_limits must list one bound per dof");
  m.vel_lower.resize(m.dofs);
  m.vel_upper.resize(m.dofs);
  for (int i = 0; i < m.dofs; ++i) {
    m.vel_lower[i] = vl["lower"][i].get<double>();
    m.vel_upper[i] = vl["upper"][i].get<double>();
    if (m.vel_lower[i] > m.vel_upper[i])
      throw ConfigError("model: velocity limit lower > upper");
  }
  return m;
}

RobotModel load_robot_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("model json parse error in " + path + ": " + e.what());
  }
  return parse_robot_model(j);
}

std::vector<FrameTransform> frame_transforms(const RobotModel& m,
                                             const VecX& q) {
  if (q.size() != m.dofs)
    throw ConfigError("configuration size does not match model dofs");
  std::vector<FrameTransform> tf(m.joints.size());
  for (size_t i = 0; i < m.joints.size(); ++i) {
    const JointSpec& js = m.joints[i];
    Eigen::Matrix3d R_parent = Eigen::Matrix3d::Identity();
    Vec3 p_parent = Vec3::Zero();
    if (js.parent >= 0) {
      R_parent = tf[js.parent].R;
      p_parent = tf[js.parent].p;
    }
    Eigen::Matrix3d R = R_parent * rpy_matrix(js.origin_rpy);
    Vec3 p = p_parent + R_parent * js.origin_xyz;
    switch (js.kind) {
      case JointKind::kFixed:
        break;
      case JointKind::kRevolute:
        R = R * axis_angle(js.axis, q[js.dof_start]);
        break;
      case JointKind::kPrismatic:
        p += R * (js.axis * q[js.dof_start]);
        break;
      case JointKind::kFreeTranslation:
        p += R * Vec3(q.segment<3>(js.dof_start));
        break;
    }
    tf[i].R = R;
    tf[i].p = p;
  }
  return tf;
}

std::vector<Vec3> forward_kinematics(const RobotModel& m, const VecX& q) {
  auto tf = frame_transforms(m, q);
  std::vector<Vec3> centers(m.spheres.size());
  for (size_t s = 0; s < m.spheres.size(); ++s) {
    const SphereSpec& sp = m.spheres[s];
    centers[s] = tf[sp.frame].p + tf[sp.frame].R * sp.offset;
  }
  return centers;
}

MatX point_jacobian(const RobotModel& m, const std::vector<FrameTransform>& tf,
                    int sphere) {
  const SphereSpec& sp = m.spheres[sphere];
  Vec3 center = tf[sp.frame].p + tf[sp.frame].R * sp.offset;
  MatX J = MatX::Zero(3, m.dofs);
  for (int ji = sp.frame; ji >= 0; ji = m.joints[ji].parent) {
    const JointSpec& js = m.joints[ji];
    if (js.dof_count == 0) continue;
    switch (js.kind) {
      case JointKind::kRevolute: {
        // frame rotation already includes the joint motion, so the world
        // axis comes from the frame itself; the joint origin is the frame
        // origin because motion does not translate it
        Vec3 axis_w = tf[ji].R * js.axis;
        J.col(js.dof_start) = axis_w.cross(center - tf[ji].p);
        break;
      }
      case JointKind::kPrismatic:
        J.col(js.dof_start) = tf[ji].R * js.axis;
        break;
      case JointKind::kFreeTranslation: {
        // translation happens along the parent-side frame axes; tf[ji].R
        // equals that frame rotation since the joint adds no rotation
        J.block<3, 3>(0, js.dof_start) = tf[ji].R;
        break;
      }
      case JointKind::kFixed:
        break;
    }
  }
  return J;
}

MatX point_jacobian(const RobotModel& m, const VecX& q, int sphere) {
  return point_jacobian(m, frame_transforms(m, q), sphere);
}

}  // namespace dexsafe
