#pragma once

#include <Eigen/Core>

#include "psmplace/world.hpp"

namespace psmplace {

using Mat3 = Eigen::Matrix3d;

// Instrument joints about a fixed remote center of motion.
struct JointConfig {
  double yaw = 0.0;
  double pitch = 0.0;
  double insertion = 0.0;

  bool operator==(const JointConfig&) const = default;
};

struct IkSettings {
  double damping = 0.05;
  int max_iters = 200;
  double pos_tol = 1e-6;
  double backtrack = 0.5;
};

struct IkResult {
  JointConfig q;
  Vec3 achieved = Vec3::Zero();
  double error_norm = 0.0;
  bool converged = false;
  bool within_limits = false;
  int iterations = 0;
};

// Fixed RCM and total heading of one arm for a given base pose.
struct ArmFrame {
  Vec3 rcm = Vec3::Zero();
  double heading = 0.0;
};

ArmFrame arm_frame(const BasePose& base, const WorldLayout& layout, Arm arm);

Vec3 rcm_from_base(const BasePose& base, const WorldLayout& layout, Arm arm);

// Unit shaft direction pointing from the RCM toward the tip.
Vec3 tool_direction(double heading, const JointConfig& q);

Vec3 forward_kinematics(const ArmFrame& frame, const JointConfig& q);
Vec3 forward_kinematics(const BasePose& base, const JointConfig& q, const WorldLayout& layout,
                        Arm arm);

// d(tip)/d(yaw, pitch, insertion), columns in that order.
Mat3 tip_jacobian(const ArmFrame& frame, const JointConfig& q);

bool within_limits(const JointConfig& q, const JointLimits& limits);

// Zero angles at mid insertion.
JointConfig default_ik_seed(const WorldLayout& layout);

// Damped least squares with step halving. Joint limits are only checked on
// the result; insertion is kept within [0, tool_length] while iterating.
IkResult solve_ik_dls(const ArmFrame& frame, const Vec3& target, const WorldLayout& layout,
                      const IkSettings& settings, const JointConfig& q_init);
IkResult solve_ik_dls(const BasePose& base, const Vec3& target, const WorldLayout& layout, Arm arm,
                      const IkSettings& settings, const JointConfig& q_init);

}  // namespace psmplace
