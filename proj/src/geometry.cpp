#include "psmplace/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace psmplace {

std::vector<Primitive> BodySet::all() const {
  std::vector<Primitive> out;
  out.reserve(10);
  for (const ArmBodies& arm : arms) {
    out.emplace_back(arm.spar);
    out.emplace_back(arm.shaft_out);
    out.emplace_back(arm.shaft_in);
  }
  out.emplace_back(endoscope);
  out.emplace_back(ecm_cone);
  for (const HalfSpace& w : walls) out.emplace_back(w);
  return out;
}

ArmBodies build_arm_bodies(const ArmFrame& frame, const JointConfig& q, const WorldLayout& layout) {
  const Vec3 d = tool_direction(frame.heading, q);
  const Vec3& rcm = frame.rcm;
  const BodyRadii& r = layout.body_radii;
  ArmBodies bodies;
  bodies.spar = {rcm - layout.spar_span.front * d, rcm - layout.spar_span.back * d, r.spar};
  bodies.shaft_out = {rcm, rcm - (layout.tool_length - q.insertion) * d, r.shaft_out};
  bodies.shaft_in = {rcm, rcm + q.insertion * d, r.shaft_in};
  return bodies;
}

Capsule ecm_endoscope(const WorldLayout& layout) {
  const EcmLayout& e = layout.ecm;
  return {e.rcm, e.rcm + e.length * e.direction, e.radius};
}

Cone ecm_cone(const WorldLayout& layout) {
  const EcmLayout& e = layout.ecm;
  return {e.rcm, -e.direction, e.cone_half_angle, e.cone_height};
}

std::array<HalfSpace, 2> wall_half_spaces(const WorldLayout& layout) {
  std::array<HalfSpace, 2> out;
  for (std::size_t i = 0; i < 2; ++i) {
    out[i] = {layout.walls[i].normal, layout.walls[i].offset, layout.wall_margin};
  }
  return out;
}

BodySet build_bodies(const SetupPose& setup, const JointConfig& q1, const JointConfig& q2,
                     const WorldLayout& layout) {
  BodySet set;
  set.arms[0] = build_arm_bodies(arm_frame(setup.arm1, layout, Arm::kOne), q1, layout);
  set.arms[1] = build_arm_bodies(arm_frame(setup.arm2, layout, Arm::kTwo), q2, layout);
  set.endoscope = ecm_endoscope(layout);
  set.ecm_cone = ecm_cone(layout);
  set.walls = wall_half_spaces(layout);
  return set;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

// Closest points between two segments, after Ericson, Real-Time Collision
// Detection, 5.1.9.
double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  constexpr double kEps = 1e-18;
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);

  double s = 0.0;
  double t = 0.0;
  if (a <= kEps && e <= kEps) return r.norm();
  if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > kEps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (p0 + s * d1 - (q0 + t * d2)).norm();
}

namespace {

// Distance from (t, rho) to the 2D segment a-b in the cone's meridian plane.
double dist2d(double t, double rho, double at, double arho, double bt, double brho) {
  const double dt = bt - at;
  const double dr = brho - arho;
  const double len2 = dt * dt + dr * dr;
  double s = len2 > 0.0 ? ((t - at) * dt + (rho - arho) * dr) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::hypot(at + s * dt - t, arho + s * dr - rho);
}

}  // namespace

double point_cone_distance(const Vec3& p, const Cone& cone) {
  const Vec3 v = p - cone.apex;
  const double t = v.dot(cone.axis);
  const double rho = std::sqrt(std::max(0.0, v.squaredNorm() - t * t));
  const double tan_a = std::tan(cone.half_angle);
  const double h = cone.height;
  if (t >= 0.0 && t <= h && rho <= t * tan_a) return 0.0;
  const double rim = h * tan_a;
  return std::min(dist2d(t, rho, 0.0, 0.0, h, rim), dist2d(t, rho, h, 0.0, h, rim));
}

double point_half_space_distance(const Vec3& p, const HalfSpace& h) {
  return h.offset - h.normal.dot(p);
}

bool collide(const Capsule& a, const Capsule& b) {
  return segment_segment_distance(a.a, a.b, b.a, b.b) <= a.radius + b.radius;
}

bool collide(const Capsule& c, const Cone& cone) {
  // Cheap rejection against the cone's bounding sphere.
  const double rim = cone.height * std::tan(cone.half_angle);
  const Vec3 mid = cone.apex + 0.5 * cone.height * cone.axis;
  const double bound = std::hypot(0.5 * cone.height, rim);
  if (point_segment_distance(mid, c.a, c.b) > bound + c.radius) return false;

  const Vec3 step = (c.b - c.a) / static_cast<double>(kConeSpheres - 1);
  for (int k = 0; k < kConeSpheres; ++k) {
    if (point_cone_distance(c.a + static_cast<double>(k) * step, cone) <= c.radius) return true;
  }
  return false;
}

bool collide(const Capsule& c, const HalfSpace& h) {
  const double d = std::min(point_half_space_distance(c.a, h), point_half_space_distance(c.b, h));
  return d <= c.radius + h.margin;
}

bool collide(const Primitive& a, const Primitive& b) {
  const auto* capsule = std::get_if<Capsule>(&a);
  const Primitive* other = &b;
  if (capsule == nullptr) {
    capsule = std::get_if<Capsule>(&b);
    other = &a;
  }
  if (capsule == nullptr) throw UnsupportedPair();
  return std::visit([&](const auto& o) { return collide(*capsule, o); }, *other);
}

StaticScene::StaticScene(const WorldLayout& layout)
    : endoscope(ecm_endoscope(layout)), cone(ecm_cone(layout)), walls(wall_half_spaces(layout)) {}

bool arms_collide(const ArmBodies& a, const ArmBodies& b, CollisionScope scope) {
  const bool all = scope == CollisionScope::kAll;
  const std::array<const Capsule*, 3> la{&a.spar, &a.shaft_out, &a.shaft_in};
  const std::array<const Capsule*, 3> lb{&b.spar, &b.shaft_out, &b.shaft_in};
  const std::size_t n = all ? 3 : 2;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (collide(*la[i], *lb[j])) return true;
    }
  }
  return false;
}

bool arm_hits_ecm(const ArmBodies& arm, const StaticScene& scene, CollisionScope scope) {
  if (collide(arm.spar, scene.cone) || collide(arm.shaft_out, scene.cone)) return true;
  if (scope == CollisionScope::kExtracorporeal) return false;
  return collide(arm.shaft_in, scene.cone) || collide(arm.spar, scene.endoscope) ||
         collide(arm.shaft_out, scene.endoscope) || collide(arm.shaft_in, scene.endoscope);
}

bool arm_hits_walls(const ArmBodies& arm, const StaticScene& scene) {
  for (const HalfSpace& w : scene.walls) {
    if (collide(arm.spar, w) || collide(arm.shaft_out, w) || collide(arm.shaft_in, w)) return true;
  }
  return false;
}

CollisionReport check_bodies(const ArmBodies& arm1, const ArmBodies& arm2, const StaticScene& scene,
                             CollisionScope scope) {
  CollisionReport report;
  report.self_collision = arms_collide(arm1, arm2, scope) || arm_hits_ecm(arm1, scene, scope) ||
                          arm_hits_ecm(arm2, scene, scope);
  report.env_collision_arm1 = arm_hits_walls(arm1, scene);
  report.env_collision_arm2 = arm_hits_walls(arm2, scene);
  return report;
}

CollisionReport check_setup(const SetupPose& setup, const JointConfig& q1, const JointConfig& q2,
                            const WorldLayout& layout, CollisionScope scope) {
  const StaticScene scene(layout);
  const ArmBodies a1 = build_arm_bodies(arm_frame(setup.arm1, layout, Arm::kOne), q1, layout);
  const ArmBodies a2 = build_arm_bodies(arm_frame(setup.arm2, layout, Arm::kTwo), q2, layout);
  return check_bodies(a1, a2, scene, scope);
}

}  // namespace psmplace
