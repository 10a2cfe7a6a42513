#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "psmplace/rng.hpp"
#include "psmplace/scoring.hpp"
#include "psmplace/world.hpp"

using namespace psmplace;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("default layout is valid") {
  const WorldLayout l = WorldLayout::defaults();
  CHECK_NOTHROW(l.validate());
  CHECK(l.roi_side == doctest::Approx(0.06));
  CHECK(l.base_height == doctest::Approx(0.66));
  CHECK(l.voxel_count_per_axis == 5);
  CHECK(l.grid(Arm::kOne).half_extent == doctest::Approx(0.35));
  CHECK(l.theta_bound == doctest::Approx(0.3));
  // Grids are disjoint in x.
  CHECK(l.grid(Arm::kOne).center.x() + l.grid(Arm::kOne).half_extent <
        l.grid(Arm::kTwo).center.x() - l.grid(Arm::kTwo).half_extent);
  // Endoscope aimed at the RoI center.
  const Vec3 to_roi = (l.roi_center - l.ecm.rcm).normalized();
  CHECK((to_roi - l.ecm.direction).norm() < 1e-12);
}

TEST_CASE("load_config: empty file gives defaults") {
  const auto p = temp_file("psmplace_empty.json", "");
  const WorldLayout l = load_config(p);
  CHECK(config_digest(l) == config_digest(WorldLayout::defaults()));
}

TEST_CASE("load_config: roi_side is read") {
  const auto p = temp_file("psmplace_roi.json", R"({"roi_side": 0.06})");
  CHECK(load_config(p).roi_side == doctest::Approx(0.06));
  const auto q = temp_file("psmplace_roi2.json", R"({"roi_side": 0.08})");
  CHECK(load_config(q).roi_side == doctest::Approx(0.08));
}

TEST_CASE("load_config: half-angle out of range") {
  const auto p = temp_file("psmplace_cone.json", R"({"ecm": {"cone_half_angle": 2.0}})");
  CHECK_THROWS_WITH_AS(load_config(p), doctest::Contains("half-angle out of range"), ConfigError);
}

TEST_CASE("load_config: errors name the key path") {
  const auto p = temp_file("psmplace_bad.json", R"({"joint_limits": {"yaw": [1, "x"]}})");
  CHECK_THROWS_WITH_AS(load_config(p), doctest::Contains("joint_limits.yaw"), ConfigError);
  const auto q = temp_file("psmplace_syntax.json", "{ not json");
  CHECK_THROWS_AS(load_config(q), ConfigError);
}

TEST_CASE("load_config: invariant violations are named") {
  CHECK_THROWS_WITH(parse_config(nlohmann::json::parse(R"({"roi_side": 0})")),
                    doctest::Contains("roi_side"));
  CHECK_THROWS_WITH(parse_config(nlohmann::json::parse(R"({"voxel_count_per_axis": 1})")),
                    doctest::Contains("voxel_count_per_axis"));
  CHECK_THROWS_WITH(
      parse_config(nlohmann::json::parse(R"({"joint_limits": {"insertion": [0.05, 0.5]}})")),
      doctest::Contains("insertion"));
}

TEST_CASE("config JSON round trip preserves the digest") {
  WorldLayout l = WorldLayout::defaults();
  l.walls[0].offset = 0.7;
  l.tool_length = 0.3;
  const WorldLayout back = parse_config(to_json(l));
  CHECK(config_digest(back) == config_digest(l));
  CHECK(config_digest(l) != config_digest(WorldLayout::defaults()));
  CHECK(config_digest(l).size() == 16);
}

TEST_CASE("normalize_base: center and corner") {
  const WorldLayout l = WorldLayout::defaults();
  for (Arm arm : kArms) {
    const SearchGrid& g = l.grid(arm);
    CHECK(normalize_base({g.center.x(), g.center.y(), 0.0}, l, arm).norm() < 1e-15);
    const Vec3 lo = normalize_base(
        {g.center.x() - g.half_extent, g.center.y() - g.half_extent, -l.theta_bound}, l, arm);
    CHECK((lo - Vec3(-1, -1, -1)).norm() < 1e-12);
  }
}

TEST_CASE("normalize_base: round trip and monotone") {
  const WorldLayout l = WorldLayout::defaults();
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const SetupPose s = sample_setup(rng, l);
    const SetupPose back = denormalize_setup(normalize_setup(s, l), l);
    CHECK(std::abs(back.arm1.x - s.arm1.x) < 1e-12);
    CHECK(std::abs(back.arm1.y - s.arm1.y) < 1e-12);
    CHECK(std::abs(back.arm1.theta - s.arm1.theta) < 1e-12);
    CHECK(std::abs(back.arm2.x - s.arm2.x) < 1e-12);
    CHECK(std::abs(back.arm2.theta - s.arm2.theta) < 1e-12);
    const Vec6 u = normalize_setup(s, l);
    CHECK((u.array().abs() <= 1.0).all());
  }
  BasePose a{-0.5, -0.3, 0.1};
  BasePose b = a;
  b.x += 0.01;
  CHECK(normalize_base(b, l, Arm::kOne)[0] > normalize_base(a, l, Arm::kOne)[0]);
}

TEST_CASE("normalize_base: out of bounds is a range error") {
  const WorldLayout l = WorldLayout::defaults();
  CHECK_THROWS_AS(normalize_base({0.5, -0.25, 0.0}, l, Arm::kOne), std::out_of_range);
  CHECK_THROWS_AS(normalize_base({-0.45, -0.25, 0.31}, l, Arm::kOne), std::out_of_range);
  CHECK_THROWS_AS(denormalize_base(Vec3(1.1, 0, 0), l, Arm::kTwo), std::out_of_range);
}

TEST_CASE("feasibility: each arm has a grid pose with reachability >= 0.9") {
  const WorldLayout l = WorldLayout::defaults();
  for (Arm arm : kArms) {
    const SearchGrid& g = l.grid(arm);
    double best = 0.0;
    for (int ix = 0; ix <= 6 && best < 0.9; ++ix) {
      for (int iy = 0; iy <= 6 && best < 0.9; ++iy) {
        for (double th : {0.0, -0.15, 0.15}) {
          const BasePose p{g.center.x() - g.half_extent + ix * g.half_extent / 3.0,
                           g.center.y() - g.half_extent + iy * g.half_extent / 3.0, th};
          best = std::max(best, reachability_score(p, l, arm));
          if (best >= 0.9) break;
        }
      }
    }
    CHECK(best >= 0.9);
  }
}
