#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psmplace/kinematics.hpp"
#include "psmplace/world.hpp"

namespace psmplace {

inline constexpr double kReachThreshold = 0.003;

struct Trajectory {
  Vec3 center = Vec3::Zero();
  Vec3 normal{0.0, 0.0, 1.0};
  double radius = 0.02;
  int waypoints = 24;

  // Evenly spaced points on the circle, starting on the first in-plane axis.
  std::vector<Vec3> points() const;
};

struct TrajectorySettings {
  double radius = 0.02;
  int waypoints = 24;
  // Distance of the six off-center circles from the RoI center.
  double offset = 0.009;
};

// Nine circles: normal-z at the RoI center and at the six axis offsets, then
// normal-x and normal-y at the center. Throws ConfigError if any waypoint
// leaves the RoI.
std::vector<Trajectory> canonical_trajectories(const WorldLayout& layout,
                                               const TrajectorySettings& settings = {});

struct WaypointResult {
  bool reachable = false;
  bool self_free = false;
  bool env_free = false;
  JointConfig q_used;
};

// Configuration of an arm whose tip is aimed at the RoI center.
JointConfig nominal_posture(const BasePose& base, const WorldLayout& layout, Arm arm);

// Evaluates one arm at one target with the other arm held at other_q.
// Collision flags come from the geometric checker on extracorporeal bodies.
WaypointResult evaluate_waypoint(const SetupPose& setup, Arm arm, const Vec3& target,
                                 const JointConfig& q_prev, const JointConfig& other_q,
                                 const WorldLayout& layout);
WaypointResult evaluate_waypoint(const SetupPose& setup, Arm arm, const Vec3& target,
                                 const JointConfig& q_prev, const WorldLayout& layout);

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;
};

struct TrajectoryMetrics {
  double reachability = 0.0;
  double self_free = 0.0;
  double env_free = 0.0;
};

struct TrajectoryReport {
  std::vector<TrajectoryMetrics> per_trajectory;
  MetricStats reachability;
  MetricStats self_free;
  MetricStats env_free;
  double combined = 0.0;
};

TrajectoryReport evaluate_setup(const SetupPose& setup, const WorldLayout& layout,
                                const TrajectorySettings& settings = {});

// Fixed-width table, one row per metric, mean +- std.
std::string report_table(const TrajectoryReport& report);
nlohmann::json report_to_json(const TrajectoryReport& report);

}  // namespace psmplace
