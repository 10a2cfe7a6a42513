#pragma once

#include <array>
#include <stdexcept>
#include <variant>
#include <vector>

#include "psmplace/kinematics.hpp"
#include "psmplace/world.hpp"

namespace psmplace {

struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

// Solid finite cone: apex, unit axis toward the base disc.
struct Cone {
  Vec3 apex = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double half_angle = 0.0;
  double height = 0.0;
};

// Obstacle occupying { p : normal . p >= offset }. margin is added to the
// contact distance.
struct HalfSpace {
  Vec3 normal = Vec3::UnitX();
  double offset = 0.0;
  double margin = 0.0;
};

using Primitive = std::variant<Capsule, Cone, HalfSpace>;

class UnsupportedPair : public std::invalid_argument {
 public:
  UnsupportedPair() : std::invalid_argument("unsupported primitive pair") {}
};

struct ArmBodies {
  Capsule spar;
  Capsule shaft_out;
  Capsule shaft_in;
};

struct BodySet {
  std::array<ArmBodies, 2> arms;
  Capsule endoscope;
  Cone ecm_cone;
  std::array<HalfSpace, 2> walls;

  // Arm 1 bodies, arm 2 bodies, endoscope, cone, walls.
  std::vector<Primitive> all() const;
};

ArmBodies build_arm_bodies(const ArmFrame& frame, const JointConfig& q, const WorldLayout& layout);
Capsule ecm_endoscope(const WorldLayout& layout);
Cone ecm_cone(const WorldLayout& layout);
std::array<HalfSpace, 2> wall_half_spaces(const WorldLayout& layout);

BodySet build_bodies(const SetupPose& setup, const JointConfig& q1, const JointConfig& q2,
                     const WorldLayout& layout);

double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);
double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);
// Zero inside the solid cone.
double point_cone_distance(const Vec3& p, const Cone& cone);
// Signed: negative inside the obstacle.
double point_half_space_distance(const Vec3& p, const HalfSpace& h);

inline constexpr int kConeSpheres = 16;

bool collide(const Capsule& a, const Capsule& b);
bool collide(const Capsule& c, const Cone& cone);
bool collide(const Capsule& c, const HalfSpace& h);
// Throws UnsupportedPair for anything other than capsule vs {capsule, cone, half-space}.
bool collide(const Primitive& a, const Primitive& b);

struct CollisionReport {
  bool self_collision = false;
  bool env_collision_arm1 = false;
  bool env_collision_arm2 = false;

  bool env_collision(Arm arm) const {
    return arm == Arm::kOne ? env_collision_arm1 : env_collision_arm2;
  }
};

// kExtracorporeal ignores the bodies inside the patient: the intracorporeal
// shafts and the endoscope.
enum class CollisionScope { kAll, kExtracorporeal };

// Static parts of the scene, built once per layout.
struct StaticScene {
  Capsule endoscope;
  Cone cone;
  std::array<HalfSpace, 2> walls;

  explicit StaticScene(const WorldLayout& layout);
};

bool arms_collide(const ArmBodies& a, const ArmBodies& b, CollisionScope scope);
bool arm_hits_ecm(const ArmBodies& arm, const StaticScene& scene, CollisionScope scope);
bool arm_hits_walls(const ArmBodies& arm, const StaticScene& scene);

CollisionReport check_bodies(const ArmBodies& arm1, const ArmBodies& arm2, const StaticScene& scene,
                             CollisionScope scope = CollisionScope::kAll);

CollisionReport check_setup(const SetupPose& setup, const JointConfig& q1, const JointConfig& q2,
                            const WorldLayout& layout, CollisionScope scope = CollisionScope::kAll);

}  // namespace psmplace
