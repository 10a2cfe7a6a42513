#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace psmplace {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

enum class Arm : int { kOne = 0, kTwo = 1 };

inline constexpr std::array<Arm, 2> kArms{Arm::kOne, Arm::kTwo};

constexpr int arm_index(Arm arm) { return static_cast<int>(arm); }

// Placement of one arm base on the floor plane. theta is measured relative
// to the arm's nominal heading.
struct BasePose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  bool operator==(const BasePose&) const = default;
};

struct SetupPose {
  BasePose arm1;
  BasePose arm2;

  const BasePose& arm(Arm a) const { return a == Arm::kOne ? arm1 : arm2; }
  BasePose& arm(Arm a) { return a == Arm::kOne ? arm1 : arm2; }

  bool operator==(const SetupPose&) const = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double mid() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct JointLimits {
  Interval yaw{-1.5, 1.5};
  Interval pitch{-0.9, 0.9};
  Interval insertion{0.05, 0.24};
};

struct EcmLayout {
  Vec3 rcm{0.0, -0.12, 0.52};
  // Unit vector pointing from the ECM remote center along the endoscope.
  Vec3 direction{0.0, 0.0, -1.0};
  double length = 0.15;
  double radius = 0.006;
  double cone_half_angle = 0.5235987755982988;  // 30 deg
  double cone_height = 0.30;
};

// Obstacle occupying { p : normal . p >= offset }.
struct Wall {
  Vec3 normal{1.0, 0.0, 0.0};
  double offset = 0.85;
};

struct SearchGrid {
  Vec2 center{0.0, 0.0};
  double half_extent = 0.35;
};

struct BodyRadii {
  double spar = 0.06;
  double shaft_out = 0.025;
  double shaft_in = 0.005;
};

// Where the spar sits along the extracorporeal tool axis, as distances
// from the RCM measured backwards along the shaft.
struct SparSpan {
  double front = 0.06;
  double back = 0.50;
};

struct WorldLayout {
  double base_height = 0.66;
  Vec3 rcm_offset{0.40, 0.0, -0.16};
  std::array<double, 2> nominal_heading{};
  JointLimits joint_limits;
  Vec3 roi_center{0.0, 0.0, 0.35};
  double roi_side = 0.06;
  int voxel_count_per_axis = 5;
  EcmLayout ecm;
  std::array<Wall, 2> walls;
  std::array<SearchGrid, 2> grids;
  double theta_bound = 0.3;
  BodyRadii body_radii;
  SparSpan spar_span;
  double tool_length = 0.28;
  double wall_margin = 0.0;

  static WorldLayout defaults();

  double heading(Arm arm) const { return nominal_heading[arm_index(arm)]; }
  const SearchGrid& grid(Arm arm) const { return grids[arm_index(arm)]; }

  bool in_roi(const Vec3& p, double tol = 0.0) const;
  bool in_grid(const BasePose& pose, Arm arm, double tol = 1e-12) const;
  bool in_grid(const SetupPose& setup, double tol = 1e-12) const;

  // Throws ConfigError naming the first violated constraint.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Empty documents and missing keys take the defaults of WorldLayout::defaults().
WorldLayout parse_config(const nlohmann::json& doc);
WorldLayout load_config(const std::filesystem::path& path);
nlohmann::json to_json(const WorldLayout& layout);

// FNV-1a digest of the canonical JSON form, as 16 hex digits.
std::string config_digest(const WorldLayout& layout);

Vec3 normalize_base(const BasePose& pose, const WorldLayout& layout, Arm arm);
BasePose denormalize_base(const Vec3& u, const WorldLayout& layout, Arm arm);
Vec6 normalize_setup(const SetupPose& setup, const WorldLayout& layout);
SetupPose denormalize_setup(const Vec6& u, const WorldLayout& layout);

}  // namespace psmplace
