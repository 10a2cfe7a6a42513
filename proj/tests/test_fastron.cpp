#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "psmplace/fastron.hpp"
#include "psmplace/io.hpp"
#include "psmplace/rng.hpp"
#include "psmplace/scoring.hpp"

using namespace psmplace;

namespace {

// Two well-separated 2-D clusters: collision around (+0.5, 0), free around (-0.5, 0).
LabeledConfigSet separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledConfigSet s;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 2 ? kCollision : kFree;
    const double x[2] = {0.5 * y + rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    s.push_back(x, y);
  }
  return s;
}

// Collision inside the disc of radius 0.5.
LabeledConfigSet disc(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledConfigSet s;
  for (std::size_t i = 0; i < n; ++i) {
    const double x[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    s.push_back(x, std::hypot(x[0], x[1]) < 0.5 ? kCollision : kFree);
  }
  return s;
}

}  // namespace

TEST_CASE("train_fastron: separable data converges with positive margins") {
  const LabeledConfigSet data = separable(200, 31);
  FastronTrainingInfo info;
  const FastronModel m = train_fastron(data, {10.0, 1.5, 5000, 3000}, &info);
  CHECK(info.converged);
  CHECK(m.size() < data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(data.labels[i] * m.score(data.row(i)) > 0.0);
  }
}

TEST_CASE("train_fastron: zero update budget gives an empty model that predicts collision") {
  const LabeledConfigSet data = separable(20, 32);
  FastronTrainingInfo info;
  const FastronModel m = train_fastron(data, {10.0, 1.5, 0, 3000}, &info);
  CHECK(m.empty());
  CHECK_FALSE(info.converged);
  const double x[2] = {-0.5, 0.0};
  CHECK(m.score(x) == 0.0);
  CHECK(m.predict(x) == kCollision);
}

TEST_CASE("FastronModel: single support and the decision tie") {
  FastronModel m(2, 3.0, 1.5, 10);
  const double s[2] = {0.1, 0.2};
  m.add_support(s, 1.0);
  CHECK(m.score(s) == doctest::Approx(1.0));
  CHECK(m.predict(s) == kCollision);

  FastronModel tie(2, 3.0, 1.5, 10);
  const double a[2] = {0.0, 0.0}, b[2] = {1.0, 0.0}, mid[2] = {0.5, 0.0};
  tie.add_support(a, 1.0);
  tie.add_support(b, -1.0);
  CHECK(tie.score(mid) == 0.0);
  CHECK(tie.predict(mid) == kCollision);
}

TEST_CASE("FastronModel: score equals the explicit kernel sum") {
  Rng rng(33);
  FastronModel m(4, 2.5, 1.5, 0);
  std::vector<std::array<double, 4>> sup;
  std::vector<double> alpha;
  for (int i = 0; i < 30; ++i) {
    std::array<double, 4> x{};
    for (double& v : x) v = rng.uniform(-1, 1);
    const double a = rng.uniform(-2, 2);
    m.add_support(x, a);
    sup.push_back(x);
    alpha.push_back(a);
  }
  for (int t = 0; t < 50; ++t) {
    std::array<double, 4> q{};
    for (double& v : q) v = rng.uniform(-1, 1);
    double expect = 0.0;
    for (std::size_t i = 0; i < sup.size(); ++i) {
      double d2 = 0.0;
      for (int k = 0; k < 4; ++k) d2 += (sup[i][k] - q[k]) * (sup[i][k] - q[k]);
      expect += alpha[i] * std::exp(-2.5 * d2);
    }
    CHECK(m.score(q) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("FastronModel: support limit and argument checks") {
  FastronModel m(2, 1.0, 1.5, 1);
  const double x[2] = {0, 0};
  m.add_support(x, 1.0);
  CHECK_THROWS_AS(m.add_support(x, 1.0), std::length_error);
  const double y[3] = {0, 0, 0};
  CHECK_THROWS_AS((void)m.score(y), std::invalid_argument);
  CHECK_THROWS_AS(FastronModel(2, 0.0, 1.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(FastronModel(2, 1.0, 0.5, 1), std::invalid_argument);
}

TEST_CASE("evaluate_fastron: perfect and inverted models") {
  const LabeledConfigSet data = separable(100, 34);
  FastronModel good(2, 5.0, 1.5, 0), bad(2, 5.0, 1.5, 0);
  const double pos[2] = {0.5, 0.0}, neg[2] = {-0.5, 0.0};
  good.add_support(pos, 1.0);
  good.add_support(neg, -1.0);
  bad.add_support(pos, -1.0);
  bad.add_support(neg, 1.0);
  const FastronEvaluation eg = evaluate_fastron(good, data, 100);
  CHECK(eg.accuracy == 1.0);
  CHECK(eg.tpr == 1.0);
  CHECK(eg.tnr == 1.0);
  CHECK(eg.mean_query_seconds > 0.0);
  const FastronEvaluation eb = evaluate_fastron(bad, data, 100);
  CHECK(eb.accuracy == 0.0);
  CHECK(eb.tpr == 0.0);
  CHECK(eb.tnr == 0.0);
}

TEST_CASE("train_fastron: single-class data is rejected") {
  LabeledConfigSet data;
  const double x[2] = {0.1, 0.2}, y[2] = {0.3, 0.4};
  data.push_back(x, kFree);
  data.push_back(y, kFree);
  CHECK_THROWS_WITH_AS(train_fastron(data, {}), doctest::Contains("degenerate labels"),
                       std::invalid_argument);
  LabeledConfigSet bad = data;
  bad.labels[0] = 0;
  CHECK_THROWS_AS(train_fastron(bad, {}), std::invalid_argument);
}

TEST_CASE("train_fastron: support count respects every bound") {
  const LabeledConfigSet data = disc(400, 35);
  for (std::size_t cap : {5u, 50u, 3000u}) {
    for (std::size_t budget : {10u, 100u, 5000u}) {
      FastronTrainingInfo info;
      const FastronModel m = train_fastron(data, {10.0, 1.5, budget, cap}, &info);
      CHECK(m.size() <= cap);
      CHECK(m.size() <= data.size());
      CHECK(info.updates <= budget);
      CHECK(m.size() <= info.updates);
    }
  }
}

TEST_CASE("train_fastron: disc boundary is learned") {
  const LabeledConfigSet train = disc(2000, 36), test = disc(2000, 37);
  const FastronModel m = train_fastron(train, {10.0, 1.5, 5000, 3000});
  CHECK(evaluate_fastron(m, test, 100).accuracy >= 0.95);
}

TEST_CASE("Fastron JSON round trip is exact") {
  const FastronModel m = train_fastron(disc(300, 38), {10.0, 1.5, 5000, 3000});
  const auto path = std::filesystem::temp_directory_path() / "psmplace_fastron_rt.json";
  save_fastron(m, path, {{"seed", 7}});
  const FastronModel back = load_fastron(path);
  REQUIRE(back.size() == m.size());
  CHECK(back.gamma() == m.gamma());
  CHECK(back.beta() == m.beta());
  CHECK(back.max_supports() == m.max_supports());
  CHECK(back.alphas() == m.alphas());
  Rng rng(39);
  for (int i = 0; i < 100; ++i) {
    const double q[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    CHECK(back.score(q) == m.score(q));
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_fastron(path), DataError);
}

TEST_CASE("Fastron env model reaches 0.95 holdout accuracy") {
  const WorldLayout l = WorldLayout::defaults();
  const LabeledConfigSet train = sample_env_training_set(l, Arm::kTwo, 10000, 40);
  const LabeledConfigSet test = sample_env_training_set(l, Arm::kTwo, 5000, 41);
  const FastronModel m = train_fastron(train, {10.0, 1.5, 5000, 3000});
  const FastronEvaluation e = evaluate_fastron(m, test, 1000);
  CHECK(e.accuracy >= 0.95);
}

TEST_CASE("feature encodings stay in the unit box") {
  const WorldLayout l = WorldLayout::defaults();
  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    const SetupPose s = sample_setup(rng, l);
    const JointConfig q1 = sample_joints(rng, l.joint_limits), q2 = sample_joints(rng, l.joint_limits);
    for (double v : env_features(s.arm1, q1, l, Arm::kOne)) CHECK(std::abs(v) <= 1.0 + 1e-12);
    for (double v : self_features(s, q1, q2, l)) CHECK(std::abs(v) <= 1.0 + 1e-12);
  }
}

TEST_CASE("prediction latency does not depend on the training-set size") {
  // Random labels force both models to the same support cap.
  const auto noise = [](std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    LabeledConfigSet s;
    for (std::size_t i = 0; i < n; ++i) {
      std::array<double, 6> x{};
      for (double& v : x) v = rng.uniform(-1, 1);
      s.push_back(x, rng.uniform() < 0.5 ? kCollision : kFree);
    }
    return s;
  };
  const FastronParams p{10.0, 1.5, 2000, 300};
  const FastronModel small = train_fastron(noise(1000, 43), p);
  const FastronModel large = train_fastron(noise(100000, 44), p);
  REQUIRE(small.size() == 300);
  REQUIRE(large.size() == 300);
  const LabeledConfigSet queries = noise(2000, 45);
  const double ts = evaluate_fastron(small, queries, 20000).mean_query_seconds;
  const double tl = evaluate_fastron(large, queries, 20000).mean_query_seconds;
  CHECK(std::max(ts, tl) <= 2.0 * std::min(ts, tl));
}
