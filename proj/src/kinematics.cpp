#include "psmplace/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace psmplace {

ArmFrame arm_frame(const BasePose& base, const WorldLayout& layout, Arm arm) {
  const double heading = layout.heading(arm) + base.theta;
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const Vec3& o = layout.rcm_offset;
  return {Vec3(base.x + c * o.x() - s * o.y(), base.y + s * o.x() + c * o.y(),
               layout.base_height + o.z()),
          heading};
}

Vec3 rcm_from_base(const BasePose& base, const WorldLayout& layout, Arm arm) {
  return arm_frame(base, layout, arm).rcm;
}

Vec3 tool_direction(double heading, const JointConfig& q) {
  // Rz(heading) * Ry(pitch) * Rx(yaw) * (0, 0, -1)
  const double c1 = std::cos(q.yaw), s1 = std::sin(q.yaw);
  const double c2 = std::cos(q.pitch), s2 = std::sin(q.pitch);
  const double ch = std::cos(heading), sh = std::sin(heading);
  const double lx = -s2 * c1;
  const double ly = s1;
  const double lz = -c2 * c1;
  return {ch * lx - sh * ly, sh * lx + ch * ly, lz};
}

Vec3 forward_kinematics(const ArmFrame& frame, const JointConfig& q) {
  return frame.rcm + q.insertion * tool_direction(frame.heading, q);
}

Vec3 forward_kinematics(const BasePose& base, const JointConfig& q, const WorldLayout& layout,
                        Arm arm) {
  return forward_kinematics(arm_frame(base, layout, arm), q);
}

Mat3 tip_jacobian(const ArmFrame& frame, const JointConfig& q) {
  const double c1 = std::cos(q.yaw), s1 = std::sin(q.yaw);
  const double c2 = std::cos(q.pitch), s2 = std::sin(q.pitch);
  const double ch = std::cos(frame.heading), sh = std::sin(frame.heading);
  Mat3 local;
  local.col(0) = q.insertion * Vec3(s2 * s1, c1, c2 * s1);
  local.col(1) = q.insertion * Vec3(-c2 * c1, 0.0, s2 * c1);
  local.col(2) = Vec3(-s2 * c1, s1, -c2 * c1);
  Mat3 rz;
  rz << ch, -sh, 0.0, sh, ch, 0.0, 0.0, 0.0, 1.0;
  return rz * local;
}

bool within_limits(const JointConfig& q, const JointLimits& limits) {
  return limits.yaw.contains(q.yaw) && limits.pitch.contains(q.pitch) &&
         limits.insertion.contains(q.insertion);
}

JointConfig default_ik_seed(const WorldLayout& layout) {
  return {0.0, 0.0, layout.joint_limits.insertion.mid()};
}

IkResult solve_ik_dls(const ArmFrame& frame, const Vec3& target, const WorldLayout& layout,
                      const IkSettings& settings, const JointConfig& q_init) {
  const double lambda2 = settings.damping * settings.damping;
  const double q3_max = layout.tool_length;

  JointConfig q = q_init;
  q.insertion = std::clamp(q.insertion, 0.0, q3_max);
  Vec3 tip = forward_kinematics(frame, q);
  double err = (target - tip).norm();

  int iter = 0;
  while (err > settings.pos_tol && iter < settings.max_iters) {
    ++iter;
    const Vec3 e = target - tip;
    const Mat3 J = tip_jacobian(frame, q);
    const Mat3 A = J * J.transpose() + lambda2 * Mat3::Identity();
    const Vec3 dq = J.transpose() * A.llt().solve(e);

    double scale = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      JointConfig trial{q.yaw + scale * dq[0], q.pitch + scale * dq[1],
                        std::clamp(q.insertion + scale * dq[2], 0.0, q3_max)};
      const Vec3 trial_tip = forward_kinematics(frame, trial);
      const double trial_err = (target - trial_tip).norm();
      if (trial_err <= err) {
        q = trial;
        tip = trial_tip;
        err = trial_err;
        accepted = true;
        break;
      }
      scale *= settings.backtrack;
    }
    if (!accepted) break;
  }

  IkResult result;
  result.q = q;
  result.achieved = tip;
  result.error_norm = err;
  result.converged = err <= settings.pos_tol;
  result.within_limits = within_limits(q, layout.joint_limits);
  result.iterations = iter;
  return result;
}

IkResult solve_ik_dls(const BasePose& base, const Vec3& target, const WorldLayout& layout, Arm arm,
                      const IkSettings& settings, const JointConfig& q_init) {
  return solve_ik_dls(arm_frame(base, layout, arm), target, layout, settings, q_init);
}

}  // namespace psmplace
