#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "psmplace/io.hpp"
#include "psmplace/rng.hpp"
#include "psmplace/scoring.hpp"

using namespace psmplace;

TEST_CASE("score_mse: examples and errors") {
  const std::vector<double> a{0.0, 0.5, 1.0}, b{0.0, 0.5, 1.0}, c{1.0, 0.5, 0.0};
  CHECK(score_mse(a, b) == 0.0);
  CHECK(score_mse(a, c) == doctest::Approx(2.0 / 3.0));
  const std::vector<double> d{0.1};
  CHECK_THROWS_AS(score_mse(a, d), std::invalid_argument);
  CHECK_THROWS_AS(score_mse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("roi voxel centers") {
  const WorldLayout l = WorldLayout::defaults();
  const std::vector<Vec3> v = roi_voxel_centers(l);
  REQUIRE(v.size() == 125);
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : v) {
    CHECK(l.in_roi(p));
    mean += p;
  }
  CHECK((mean / 125.0 - l.roi_center).norm() < 1e-12);
  CHECK((v[1] - v[0]).norm() == doctest::Approx(l.roi_side / 5.0));
}

TEST_CASE("reachability_score: far away is zero, values are voxel fractions") {
  const WorldLayout l = WorldLayout::defaults();
  CHECK(reachability_score({-5.0, -5.0, 0.0}, l, Arm::kOne) == 0.0);
  Rng rng(51);
  for (int i = 0; i < 20; ++i) {
    const SetupPose s = sample_setup(rng, l);
    const double r = reachability_score(s.arm2, l, Arm::kTwo);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(std::abs(r * 125.0 - std::round(r * 125.0)) < 1e-9);
  }
}

TEST_CASE("collision_scores: distant walls give env = 1") {
  WorldLayout l = WorldLayout::defaults();
  l.walls[0].offset = 1e6;
  l.walls[1].offset = 1e6;
  const GeometricBackend g(l);
  Rng rng(52);
  for (int i = 0; i < 10; ++i) {
    const CollisionScores c = collision_scores(sample_setup(rng, l), g, l.joint_limits, 200, i);
    CHECK(c.env1 == 1.0);
    CHECK(c.env2 == 1.0);
  }
}

TEST_CASE("collision_scores: separated arms without an endoscope are self-free") {
  WorldLayout l = WorldLayout::defaults();
  l.ecm.rcm = Vec3(0.0, 50.0, 50.0);
  const GeometricBackend g(l);
  const SetupPose s{{-0.8, -0.6, 0.0}, {3.0, -0.6, 0.0}};
  CHECK(collision_scores(s, g, l.joint_limits, 500, 53).self_free == 1.0);
}

TEST_CASE("collision_scores: monotone in the obstacles") {
  const WorldLayout base = WorldLayout::defaults();
  WorldLayout closer = base;
  closer.walls[0].offset = 0.75;
  closer.walls[1].offset = 0.75;
  WorldLayout no_ecm = base;
  no_ecm.ecm.rcm = Vec3(0.0, 50.0, 50.0);
  const GeometricBackend gb(base), gc(closer), gn(no_ecm);
  Rng rng(54);
  for (int i = 0; i < 30; ++i) {
    const SetupPose s = sample_setup(rng, base);
    const CollisionScores a = collision_scores(s, gb, base.joint_limits, 300, 100 + i);
    const CollisionScores c = collision_scores(s, gc, base.joint_limits, 300, 100 + i);
    const CollisionScores n = collision_scores(s, gn, base.joint_limits, 300, 100 + i);
    CHECK(c.env1 <= a.env1);
    CHECK(c.env2 <= a.env2);
    CHECK(n.self_free >= a.self_free);
  }
}

TEST_CASE("generate_dataset: deterministic and row-independent") {
  const WorldLayout l = WorldLayout::defaults();
  const GeometricBackend g(l);
  DatasetOptions opt;
  opt.joint_samples = 40;
  const ScoreDataset a = generate_dataset(l, 6, g, 77, opt);
  const ScoreDataset b = generate_dataset(l, 6, g, 77, opt);
  const ScoreDataset c = generate_dataset(l, 3, g, 77, opt);
  CHECK(dataset_to_csv(a) == dataset_to_csv(b));
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    CHECK(c.rows[i].setup.arm1.x == a.rows[i].setup.arm1.x);
    CHECK(c.rows[i].self_free == a.rows[i].self_free);
    CHECK(c.rows[i].reach2 == a.rows[i].reach2);
  }
  CHECK(dataset_to_csv(generate_dataset(l, 6, g, 78, opt)) != dataset_to_csv(a));
  for (const ScoreSample& r : a.rows) {
    CHECK(l.in_grid(r.setup));
    for (double v : {r.reach1, r.reach2, r.self_free, r.env1, r.env2}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK_THROWS_AS(generate_dataset(l, 0, g, 1, opt), std::invalid_argument);
}

TEST_CASE("dataset CSV round trip") {
  const WorldLayout l = WorldLayout::defaults();
  DatasetOptions opt;
  opt.joint_samples = 20;
  const ScoreDataset a = generate_dataset(l, 4, GeometricBackend(l), 5, opt);
  const std::string text = dataset_to_csv(a);
  CHECK(text.rfind(std::string(kDatasetHeader) + "\n", 0) == 0);
  const auto path = std::filesystem::temp_directory_path() / "psmplace_ds.csv";
  write_dataset_csv(a, path);
  const ScoreDataset b = read_dataset_csv(path);
  REQUIRE(b.rows.size() == a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(b.rows[i].setup.arm2.theta == doctest::Approx(a.rows[i].setup.arm2.theta).epsilon(1e-8));
    CHECK(b.rows[i].env1 == doctest::Approx(a.rows[i].env1).epsilon(1e-8));
  }
  CHECK(dataset_to_csv(b) == text);
}

TEST_CASE("dataset CSV parse errors name the line") {
  const std::string h = std::string(kDatasetHeader) + "\n";
  CHECK_THROWS_WITH_AS(parse_dataset_csv(""), doctest::Contains("empty"), DataError);
  CHECK_THROWS_WITH_AS(parse_dataset_csv("a,b\n1,2\n"), doctest::Contains("header"), DataError);
  CHECK_THROWS_WITH_AS(parse_dataset_csv(h + "1,2,3\n"), doctest::Contains("line 2"), DataError);
  CHECK_THROWS_WITH_AS(parse_dataset_csv(h + "0,0,0,0,0,0,1,1,1,1,1\n0,0,0,0,0,x,1,1,1,1,1\n"),
                       doctest::Contains("line 3"), DataError);
  CHECK_THROWS_WITH_AS(parse_dataset_csv(h), doctest::Contains("no rows"), DataError);
}

TEST_CASE("FastronBackend rejects empty or mis-shaped models") {
  const WorldLayout l = WorldLayout::defaults();
  FastronModels m;
  CHECK_THROWS_AS(FastronBackend(l, m), std::invalid_argument);
  const std::vector<double> e(kEnvFeatureDim, 0.0), s(kSelfFeatureDim, 0.0);
  m.env1 = FastronModel(kEnvFeatureDim, 1.0, 1.5, 0);
  m.env1.add_support(e, -1.0);
  m.env2 = m.env1;
  m.self = FastronModel(kEnvFeatureDim, 1.0, 1.5, 0);
  m.self.add_support(e, -1.0);
  CHECK_THROWS_AS(FastronBackend(l, m), std::invalid_argument);
  m.self = FastronModel(kSelfFeatureDim, 1.0, 1.5, 0);
  m.self.add_support(s, -1.0);
  CHECK_NOTHROW(FastronBackend(l, m));
}
