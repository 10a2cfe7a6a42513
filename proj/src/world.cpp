#include "psmplace/world.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace psmplace {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& constraint) {
  if (!ok) throw ConfigError("invalid layout: " + constraint);
}

// Reads doc[key] into out if present. Errors carry the full key path.
template <typename T>
void read_scalar(const json& doc, const char* key, const std::string& path, T& out) {
  if (!doc.contains(key)) return;
  const json& v = doc.at(key);
  if (!v.is_number()) throw ConfigError("config key '" + path + key + "': expected a number");
  out = v.get<T>();
}

template <int N>
void read_vec(const json& doc, const char* key, const std::string& path,
              Eigen::Matrix<double, N, 1>& out) {
  if (!doc.contains(key)) return;
  const json& v = doc.at(key);
  if (!v.is_array() || v.size() != N) {
    throw ConfigError("config key '" + path + key + "': expected an array of " +
                      std::to_string(N) + " numbers");
  }
  for (int i = 0; i < N; ++i) {
    if (!v[i].is_number()) {
      throw ConfigError("config key '" + path + key + "[" + std::to_string(i) +
                        "]': expected a number");
    }
    out[i] = v[i].get<double>();
  }
}

void read_interval(const json& doc, const char* key, const std::string& path, Interval& out) {
  if (!doc.contains(key)) return;
  Vec2 v(out.lo, out.hi);
  read_vec<2>(doc, key, path, v);
  out = {v[0], v[1]};
}

const json& object_at(const json& doc, const char* key, const std::string& path) {
  const json& v = doc.at(key);
  if (!v.is_object()) throw ConfigError("config key '" + path + key + "': expected an object");
  return v;
}

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

void check_bound(double v, double lo, double hi, const char* what) {
  constexpr double kTol = 1e-12;
  if (!(v >= lo - kTol && v <= hi + kTol)) {
    std::ostringstream os;
    os << what << " = " << v << " outside [" << lo << ", " << hi << "]";
    throw std::out_of_range(os.str());
  }
}

}  // namespace

WorldLayout WorldLayout::defaults() {
  WorldLayout layout;
  constexpr double kPi = std::numbers::pi;
  layout.nominal_heading = {kPi / 6.0, kPi - kPi / 6.0};
  layout.grids[0].center = {-0.45, -0.25};
  layout.grids[1].center = {0.45, -0.25};
  layout.walls[0] = {Vec3(1.0, 0.0, 0.0), 0.85};
  layout.walls[1] = {Vec3(-1.0, 0.0, 0.0), 0.85};
  layout.ecm.direction = (layout.roi_center - layout.ecm.rcm).normalized();
  return layout;
}

bool WorldLayout::in_roi(const Vec3& p, double tol) const {
  const double half = 0.5 * roi_side + tol;
  return ((p - roi_center).array().abs() <= half).all();
}

bool WorldLayout::in_grid(const BasePose& pose, Arm arm, double tol) const {
  const SearchGrid& g = grid(arm);
  return std::abs(pose.x - g.center.x()) <= g.half_extent + tol &&
         std::abs(pose.y - g.center.y()) <= g.half_extent + tol &&
         std::abs(pose.theta) <= theta_bound + tol;
}

bool WorldLayout::in_grid(const SetupPose& setup, double tol) const {
  return in_grid(setup.arm1, Arm::kOne, tol) && in_grid(setup.arm2, Arm::kTwo, tol);
}

void WorldLayout::validate() const {
  constexpr double kPi = std::numbers::pi;
  require(base_height > 0.0, "base_height must be positive");
  require(roi_side > 0.0, "roi_side must be positive");
  require(voxel_count_per_axis >= 2, "voxel_count_per_axis must be at least 2");
  require(ecm.cone_half_angle > 0.0 && ecm.cone_half_angle < kPi / 2.0,
          "ecm cone half-angle out of range (0, pi/2)");
  require(ecm.cone_height > 0.0, "ecm cone_height must be positive");
  require(ecm.length > 0.0, "ecm length must be positive");
  require(ecm.radius > 0.0, "ecm radius must be positive");
  require(std::abs(ecm.direction.norm() - 1.0) < 1e-9, "ecm direction must be a unit vector");
  require(body_radii.spar > 0.0 && body_radii.shaft_out > 0.0 && body_radii.shaft_in > 0.0,
          "body radii must be positive");
  require(spar_span.front >= 0.0 && spar_span.back > spar_span.front,
          "spar_span must satisfy 0 <= front < back");
  require(tool_length > 0.0, "tool_length must be positive");
  require(joint_limits.insertion.lo > 0.0 && joint_limits.insertion.lo < joint_limits.insertion.hi &&
              joint_limits.insertion.hi <= tool_length,
          "insertion limits must satisfy 0 < lo < hi <= tool_length");
  require(joint_limits.yaw.lo < joint_limits.yaw.hi, "yaw limits must satisfy lo < hi");
  require(joint_limits.pitch.lo < joint_limits.pitch.hi, "pitch limits must satisfy lo < hi");
  require(theta_bound > 0.0, "theta_bound must be positive");
  require(wall_margin >= 0.0, "wall_margin must be non-negative");
  for (const Wall& w : walls) {
    require(std::abs(w.normal.norm() - 1.0) < 1e-9, "wall normal must be a unit vector");
  }
  for (const SearchGrid& g : grids) {
    require(g.half_extent > 0.0, "grid half_extent must be positive");
  }
  const double gap = (grids[1].center.x() - grids[1].half_extent) -
                     (grids[0].center.x() + grids[0].half_extent);
  require(gap > 0.0, "arm grids must be disjoint in x (arm1 left of arm2)");
}

WorldLayout parse_config(const json& doc) {
  WorldLayout layout = WorldLayout::defaults();
  if (doc.is_null()) return layout;
  if (!doc.is_object()) throw ConfigError("config root: expected an object");

  read_scalar(doc, "base_height", "", layout.base_height);
  read_vec<3>(doc, "rcm_offset", "", layout.rcm_offset);
  if (doc.contains("nominal_heading")) {
    Vec2 h(layout.nominal_heading[0], layout.nominal_heading[1]);
    read_vec<2>(doc, "nominal_heading", "", h);
    layout.nominal_heading = {h[0], h[1]};
  }
  if (doc.contains("joint_limits")) {
    const json& jl = object_at(doc, "joint_limits", "");
    read_interval(jl, "yaw", "joint_limits.", layout.joint_limits.yaw);
    read_interval(jl, "pitch", "joint_limits.", layout.joint_limits.pitch);
    read_interval(jl, "insertion", "joint_limits.", layout.joint_limits.insertion);
  }
  const bool roi_moved = doc.contains("roi_center");
  read_vec<3>(doc, "roi_center", "", layout.roi_center);
  read_scalar(doc, "roi_side", "", layout.roi_side);
  read_scalar(doc, "voxel_count_per_axis", "", layout.voxel_count_per_axis);
  read_scalar(doc, "theta_bound", "", layout.theta_bound);
  read_scalar(doc, "tool_length", "", layout.tool_length);
  read_scalar(doc, "wall_margin", "", layout.wall_margin);

  bool ecm_direction_given = false;
  if (doc.contains("ecm")) {
    const json& e = object_at(doc, "ecm", "");
    read_vec<3>(e, "rcm", "ecm.", layout.ecm.rcm);
    ecm_direction_given = e.contains("direction");
    read_vec<3>(e, "direction", "ecm.", layout.ecm.direction);
    read_scalar(e, "length", "ecm.", layout.ecm.length);
    read_scalar(e, "radius", "ecm.", layout.ecm.radius);
    read_scalar(e, "cone_half_angle", "ecm.", layout.ecm.cone_half_angle);
    read_scalar(e, "cone_height", "ecm.", layout.ecm.cone_height);
  }
  // The endoscope is aimed at the RoI center unless told otherwise.
  if (!ecm_direction_given && (roi_moved || doc.contains("ecm"))) {
    const Vec3 aim = layout.roi_center - layout.ecm.rcm;
    if (aim.norm() > 0.0) layout.ecm.direction = aim.normalized();
  }

  if (doc.contains("walls")) {
    const json& w = doc.at("walls");
    if (!w.is_array() || w.size() != 2) throw ConfigError("config key 'walls': expected 2 entries");
    for (std::size_t i = 0; i < 2; ++i) {
      const std::string path = "walls[" + std::to_string(i) + "].";
      if (!w[i].is_object()) throw ConfigError("config key '" + path + "': expected an object");
      read_vec<3>(w[i], "normal", path, layout.walls[i].normal);
      read_scalar(w[i], "offset", path, layout.walls[i].offset);
    }
  }
  if (doc.contains("grids")) {
    const json& g = doc.at("grids");
    if (!g.is_array() || g.size() != 2) throw ConfigError("config key 'grids': expected 2 entries");
    for (std::size_t i = 0; i < 2; ++i) {
      const std::string path = "grids[" + std::to_string(i) + "].";
      if (!g[i].is_object()) throw ConfigError("config key '" + path + "': expected an object");
      read_vec<2>(g[i], "center", path, layout.grids[i].center);
      read_scalar(g[i], "half_extent", path, layout.grids[i].half_extent);
    }
  }
  if (doc.contains("body_radii")) {
    const json& r = object_at(doc, "body_radii", "");
    read_scalar(r, "spar", "body_radii.", layout.body_radii.spar);
    read_scalar(r, "shaft_out", "body_radii.", layout.body_radii.shaft_out);
    read_scalar(r, "shaft_in", "body_radii.", layout.body_radii.shaft_in);
  }
  if (doc.contains("spar_span")) {
    const json& s = object_at(doc, "spar_span", "");
    read_scalar(s, "front", "spar_span.", layout.spar_span.front);
    read_scalar(s, "back", "spar_span.", layout.spar_span.back);
  }

  layout.validate();
  return layout;
}

WorldLayout load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return WorldLayout::defaults();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in '" + path.string() + "': " + e.what());
  }
  return parse_config(doc);
}

json to_json(const WorldLayout& l) {
  json doc;
  doc["base_height"] = l.base_height;
  doc["rcm_offset"] = vec_json(l.rcm_offset);
  doc["nominal_heading"] = {l.nominal_heading[0], l.nominal_heading[1]};
  doc["joint_limits"] = {
      {"yaw", {l.joint_limits.yaw.lo, l.joint_limits.yaw.hi}},
      {"pitch", {l.joint_limits.pitch.lo, l.joint_limits.pitch.hi}},
      {"insertion", {l.joint_limits.insertion.lo, l.joint_limits.insertion.hi}},
  };
  doc["roi_center"] = vec_json(l.roi_center);
  doc["roi_side"] = l.roi_side;
  doc["voxel_count_per_axis"] = l.voxel_count_per_axis;
  doc["theta_bound"] = l.theta_bound;
  doc["tool_length"] = l.tool_length;
  doc["wall_margin"] = l.wall_margin;
  doc["ecm"] = {
      {"rcm", vec_json(l.ecm.rcm)},
      {"direction", vec_json(l.ecm.direction)},
      {"length", l.ecm.length},
      {"radius", l.ecm.radius},
      {"cone_half_angle", l.ecm.cone_half_angle},
      {"cone_height", l.ecm.cone_height},
  };
  doc["walls"] = json::array();
  for (const Wall& w : l.walls) doc["walls"].push_back({{"normal", vec_json(w.normal)}, {"offset", w.offset}});
  doc["grids"] = json::array();
  for (const SearchGrid& g : l.grids) {
    doc["grids"].push_back({{"center", vec_json(g.center)}, {"half_extent", g.half_extent}});
  }
  doc["body_radii"] = {{"spar", l.body_radii.spar},
                       {"shaft_out", l.body_radii.shaft_out},
                       {"shaft_in", l.body_radii.shaft_in}};
  doc["spar_span"] = {{"front", l.spar_span.front}, {"back", l.spar_span.back}};
  return doc;
}

std::string config_digest(const WorldLayout& layout) {
  const std::string text = to_json(layout).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Vec3 normalize_base(const BasePose& pose, const WorldLayout& layout, Arm arm) {
  const SearchGrid& g = layout.grid(arm);
  check_bound(pose.x, g.center.x() - g.half_extent, g.center.x() + g.half_extent, "base x");
  check_bound(pose.y, g.center.y() - g.half_extent, g.center.y() + g.half_extent, "base y");
  check_bound(pose.theta, -layout.theta_bound, layout.theta_bound, "base theta");
  return {(pose.x - g.center.x()) / g.half_extent, (pose.y - g.center.y()) / g.half_extent,
          pose.theta / layout.theta_bound};
}

BasePose denormalize_base(const Vec3& u, const WorldLayout& layout, Arm arm) {
  for (int i = 0; i < 3; ++i) check_bound(u[i], -1.0, 1.0, "normalized coordinate");
  const SearchGrid& g = layout.grid(arm);
  return {g.center.x() + u[0] * g.half_extent, g.center.y() + u[1] * g.half_extent,
          u[2] * layout.theta_bound};
}

Vec6 normalize_setup(const SetupPose& setup, const WorldLayout& layout) {
  Vec6 u;
  u.head<3>() = normalize_base(setup.arm1, layout, Arm::kOne);
  u.tail<3>() = normalize_base(setup.arm2, layout, Arm::kTwo);
  return u;
}

SetupPose denormalize_setup(const Vec6& u, const WorldLayout& layout) {
  return {denormalize_base(u.head<3>(), layout, Arm::kOne),
          denormalize_base(u.tail<3>(), layout, Arm::kTwo)};
}

}  // namespace psmplace
