#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace dexsafe {

using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Malformed model/scenario input or bad CLI arguments.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Collision query on geometry with no defined gradient direction.
struct DegenerateGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// QP backend failed to produce a usable solution where one is required.
struct SolverFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Slack-relaxed second stage came back non-optimal; by construction it is
// feasible, so this indicates a solver defect rather than a bad scene.
struct PhaseConsistencyFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dexsafe
