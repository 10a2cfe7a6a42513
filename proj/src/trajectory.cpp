#include "psmplace/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Geometry>

#include "psmplace/geometry.hpp"

namespace psmplace {

std::vector<Vec3> Trajectory::points() const {
  const Vec3 n = normal.normalized();
  const Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = (a - a.dot(n) * n).normalized();
  const Vec3 e2 = n.cross(e1);
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(waypoints));
  for (int k = 0; k < waypoints; ++k) {
    const double t = 2.0 * std::numbers::pi * k / waypoints;
    pts.push_back(center + radius * (std::cos(t) * e1 + std::sin(t) * e2));
  }
  return pts;
}

std::vector<Trajectory> canonical_trajectories(const WorldLayout& layout,
                                               const TrajectorySettings& settings) {
  if (settings.waypoints < 3) throw ConfigError("trajectory: need at least 3 waypoints");
  if (!(settings.radius > 0.0)) throw ConfigError("trajectory: radius must be positive");
  const Vec3 c = layout.roi_center;
  const double d = settings.offset;
  std::vector<Trajectory> out;
  const auto add = [&](const Vec3& center, const Vec3& normal) {
    out.push_back({center, normal, settings.radius, settings.waypoints});
  };
  add(c, Vec3::UnitZ());
  for (int axis = 0; axis < 3; ++axis) {
    for (double s : {1.0, -1.0}) add(c + s * d * Vec3::Unit(axis), Vec3::UnitZ());
  }
  add(c, Vec3::UnitX());
  add(c, Vec3::UnitY());
  for (const Trajectory& t : out) {
    for (const Vec3& p : t.points()) {
      if (!layout.in_roi(p, 1e-12)) {
        throw ConfigError("trajectory: waypoint outside the region of interest (roi_side too small)");
      }
    }
  }
  return out;
}

JointConfig nominal_posture(const BasePose& base, const WorldLayout& layout, Arm arm) {
  return solve_ik_dls(base, layout.roi_center, layout, arm, {}, default_ik_seed(layout)).q;
}

WaypointResult evaluate_waypoint(const SetupPose& setup, Arm arm, const Vec3& target,
                                 const JointConfig& q_prev, const JointConfig& other_q,
                                 const WorldLayout& layout) {
  const ArmFrame frame = arm_frame(setup.arm(arm), layout, arm);
  IkResult ik = solve_ik_dls(frame, target, layout, {}, q_prev);
  if (ik.error_norm >= kReachThreshold || !ik.within_limits) {
    const IkResult retry = solve_ik_dls(frame, target, layout, {}, default_ik_seed(layout));
    const bool retry_ok = retry.error_norm < kReachThreshold && retry.within_limits;
    if (retry_ok || retry.error_norm < ik.error_norm) ik = retry;
  }

  WaypointResult r;
  r.q_used = ik.q;
  r.reachable = ik.error_norm < kReachThreshold && layout.in_roi(ik.achieved) && ik.within_limits;
  const JointConfig& q1 = arm == Arm::kOne ? ik.q : other_q;
  const JointConfig& q2 = arm == Arm::kOne ? other_q : ik.q;
  const CollisionReport rep = check_setup(setup, q1, q2, layout, CollisionScope::kExtracorporeal);
  r.self_free = !rep.self_collision;
  r.env_free = !rep.env_collision(arm);
  return r;
}

WaypointResult evaluate_waypoint(const SetupPose& setup, Arm arm, const Vec3& target,
                                 const JointConfig& q_prev, const WorldLayout& layout) {
  const Arm other = arm == Arm::kOne ? Arm::kTwo : Arm::kOne;
  return evaluate_waypoint(setup, arm, target, q_prev,
                           nominal_posture(setup.arm(other), layout, other), layout);
}

namespace {

MetricStats stats(const std::vector<double>& v) {
  MetricStats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(v.size()));
  return s;
}

}  // namespace

TrajectoryReport evaluate_setup(const SetupPose& setup, const WorldLayout& layout,
                                const TrajectorySettings& settings) {
  const std::vector<Trajectory> trajs = canonical_trajectories(layout, settings);
  const std::array<JointConfig, 2> nominal{nominal_posture(setup.arm1, layout, Arm::kOne),
                                           nominal_posture(setup.arm2, layout, Arm::kTwo)};
  TrajectoryReport report;
  report.per_trajectory.resize(trajs.size());

#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t t = 0; t < trajs.size(); ++t) {
    const std::vector<Vec3> pts = trajs[t].points();
    std::array<JointConfig, 2> q_prev = nominal;
    int reach = 0, self = 0, env = 0;
    for (const Vec3& p : pts) {
      bool ok_reach = true, ok_self = true, ok_env = true;
      for (Arm arm : kArms) {
        const int i = arm_index(arm);
        const WaypointResult w =
            evaluate_waypoint(setup, arm, p, q_prev[i], nominal[1 - i], layout);
        q_prev[i] = w.q_used;
        ok_reach = ok_reach && w.reachable;
        ok_self = ok_self && w.self_free;
        ok_env = ok_env && w.env_free;
      }
      reach += ok_reach;
      self += ok_self;
      env += ok_env;
    }
    const double n = static_cast<double>(pts.size());
    report.per_trajectory[t] = {reach / n, self / n, env / n};
  }

  std::vector<double> r, s, e;
  for (const TrajectoryMetrics& m : report.per_trajectory) {
    r.push_back(m.reachability);
    s.push_back(m.self_free);
    e.push_back(m.env_free);
  }
  report.reachability = stats(r);
  report.self_free = stats(s);
  report.env_free = stats(e);
  report.combined = report.reachability.mean + report.self_free.mean + report.env_free.mean;
  return report;
}

std::string report_table(const TrajectoryReport& report) {
  std::string out;
  char line[96];
  std::snprintf(line, sizeof line, "%-14s %s\n", "metric", "mean +- std");
  out += line;
  const auto row = [&](const char* name, const MetricStats& m) {
    std::snprintf(line, sizeof line, "%-14s %.2f +- %.2f\n", name, m.mean, m.std);
    out += line;
  };
  row("reachability", report.reachability);
  row("self_free", report.self_free);
  row("env_free", report.env_free);
  std::snprintf(line, sizeof line, "%-14s %.2f\n", "combined", report.combined);
  out += line;
  return out;
}

nlohmann::json report_to_json(const TrajectoryReport& report) {
  const auto ms = [](const MetricStats& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
  nlohmann::json per = nlohmann::json::array();
  for (const TrajectoryMetrics& m : report.per_trajectory) {
    per.push_back({{"reachability", m.reachability}, {"self_free", m.self_free}, {"env_free", m.env_free}});
  }
  return {{"reachability", ms(report.reachability)},
          {"self_free", ms(report.self_free)},
          {"env_free", ms(report.env_free)},
          {"combined", report.combined},
          {"per_trajectory", std::move(per)}};
}

}  // namespace psmplace
