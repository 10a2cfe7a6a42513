#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "psmplace/optimizer.hpp"
#include "psmplace/rng.hpp"

using namespace psmplace;

namespace {

SvrModel constant(std::size_t dim, double value) { return SvrModel(dim, 1.0, 1.0, 0.01, value); }

SvrModel random_model(Rng& rng, std::size_t dim) {
  SvrModel m(dim, rng.uniform(1.0, 4.0), 10.0, 0.01, rng.uniform(0.2, 0.6));
  for (int i = 0; i < 8; ++i) {
    std::vector<double> x(dim);
    for (double& v : x) v = rng.uniform(-1, 1);
    m.add_support(x, rng.uniform(-0.6, 0.6));
  }
  return m;
}

ScoreModels random_models(std::uint64_t seed) {
  Rng rng(seed);
  return {random_model(rng, 3), random_model(rng, 3), random_model(rng, 3), random_model(rng, 3),
          random_model(rng, 6)};
}

Vec6 random_u(Rng& rng) {
  Vec6 u;
  for (int k = 0; k < 6; ++k) u[k] = rng.uniform(-1, 1);
  return u;
}

double clip_predict(const SvrModel& m, const double* x) {
  return std::clamp(m.predict({x, m.dim()}), 0.0, 1.0);
}

}  // namespace

TEST_CASE("objective: all scores one gives the upper bound") {
  const ScoreModels ones{constant(3, 1.0), constant(3, 1.0), constant(3, 1.0), constant(3, 1.0),
                         constant(6, 1.0)};
  const ObjectiveSpec spec({1, 1, 1}, ones);
  CHECK(spec.evaluate(Vec6::Zero()) == 5.0);
  CHECK(spec.max_value() == 5.0);
  const ObjectiveSpec over({1, 1, 1}, {constant(3, 3.0), constant(3, 3.0), constant(3, -2.0),
                                       constant(3, 1.2), constant(6, 0.5)});
  CHECK(over.evaluate(Vec6::Constant(0.3)) == doctest::Approx(2.0 + 0.0 + 1.0 + 0.5));
}

TEST_CASE("objective: weight and model checks") {
  const ScoreModels m = random_models(71);
  CHECK_THROWS_AS(ObjectiveSpec({0, 0, 0}, m), std::invalid_argument);
  CHECK_THROWS_AS(ObjectiveSpec({-1, 1, 1}, m), std::invalid_argument);
  ScoreModels wrong = m;
  wrong.self = constant(3, 1.0);
  CHECK_THROWS_AS(ObjectiveSpec({1, 1, 1}, wrong), std::invalid_argument);
  const ObjectiveSpec spec({1, 1, 1}, m);
  Vec6 u = Vec6::Zero();
  u[4] = 1.5;
  CHECK_THROWS_AS(spec.evaluate(u), std::out_of_range);
}

TEST_CASE("objective: weighted sum of clipped per-arm and joint scores") {
  const ScoreModels m = random_models(72);
  Rng rng(73);
  for (int t = 0; t < 200; ++t) {
    const Weights w{rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0.1, 5)};
    const ObjectiveSpec spec(w, m);
    const Vec6 u = random_u(rng);
    const double expect = w.reach * (clip_predict(m.reach1, u.data()) + clip_predict(m.reach2, u.data() + 3)) +
                          w.env * (clip_predict(m.env1, u.data()) + clip_predict(m.env2, u.data() + 3)) +
                          w.self * clip_predict(m.self, u.data());
    CHECK(std::abs(spec.evaluate(u) - expect) <= 1e-12);
  }
}

TEST_CASE("objective: gradient matches central differences away from the clip kinks") {
  const ObjectiveSpec spec({1, 2, 0.5}, random_models(74));
  Rng rng(75);
  const double h = 1e-6;
  for (int t = 0; t < 100; ++t) {
    const Vec6 u = random_u(rng) * 0.9;
    Vec6 g;
    spec.evaluate(u, &g);
    for (int k = 0; k < 6; ++k) {
      Vec6 up = u, um = u;
      up[k] += h;
      um[k] -= h;
      ScoreBreakdown sp, sm;
      const double fd = (spec.evaluate(up, nullptr, &sp) - spec.evaluate(um, nullptr, &sm)) / (2 * h);
      // Skip coordinates where a term crosses a clip boundary inside the stencil.
      const auto crossed = [](double a, double b) {
        return (a == 0.0) != (b == 0.0) || (a == 1.0) != (b == 1.0);
      };
      if (crossed(sp.reach1, sm.reach1) || crossed(sp.reach2, sm.reach2) || crossed(sp.env1, sm.env1) ||
          crossed(sp.env2, sm.env2) || crossed(sp.self, sm.self)) {
        continue;
      }
      CHECK(std::abs(fd - g[k]) <= 1e-5 * std::max(1.0, std::abs(g[k])));
    }
  }
}

TEST_CASE("local_ascent: constant objective stays put") {
  const Objective6 flat = [](const Vec6&, Vec6* g) {
    if (g) g->setZero();
    return 2.0;
  };
  const Vec6 start = Vec6::Constant(0.25);
  const LocalResult r = local_ascent(flat, start, 1, {});
  CHECK(r.f == 2.0);
  CHECK((r.u - start).norm() == 0.0);
}

TEST_CASE("multi_start_maximize: concave quadratic reaches its argmax") {
  Vec6 u0;
  u0 << 0.3, -0.5, 0.1, 0.8, -0.2, 0.0;
  const Objective6 bowl = [&](const Vec6& u, Vec6* g) {
    if (g) *g = -2.0 * (u - u0);
    return -(u - u0).squaredNorm();
  };
  const LocalResult r = multi_start_maximize(bowl, 5, 9, {});
  CHECK((r.u - u0).norm() < 1e-3);
  // With the peak outside the box the answer is its projection.
  Vec6 out = u0;
  out[0] = 1.7;
  const Objective6 clipped = [&](const Vec6& u, Vec6* g) {
    if (g) *g = -2.0 * (u - out);
    return -(u - out).squaredNorm();
  };
  Vec6 proj = out;
  proj[0] = 1.0;
  CHECK((multi_start_maximize(clipped, 5, 9, {}).u - proj).norm() < 1e-3);
}

TEST_CASE("multi_start_optimize: deterministic, feasible, bounded") {
  const WorldLayout l = WorldLayout::defaults();
  const ObjectiveSpec spec({1, 1, 1}, random_models(76));
  const Solution a = multi_start_optimize(spec, l, 12, 42);
  const Solution b = multi_start_optimize(spec, l, 12, 42);
  CHECK(a.u == b.u);
  CHECK(a.f == b.f);
  CHECK(a.best_start == b.best_start);
  CHECK(solution_to_json(a, spec.weights(), 42).dump() == solution_to_json(b, spec.weights(), 42).dump());
  CHECK((a.u.array().abs() <= 1.0).all());
  CHECK(l.in_grid(a.setup, 1e-12));
  CHECK(a.f <= spec.max_value() + 1e-12);
  CHECK(a.f == doctest::Approx(spec.evaluate(a.u)));
  CHECK(a.starts_used == 12);

  // Never below the objective at any of its own starts.
  for (int k = 0; k < 12; ++k) {
    Rng rng = Rng::stream(42, static_cast<std::uint64_t>(k));
    Vec6 s;
    for (int d = 0; d < 6; ++d) s[d] = rng.uniform(-1.0, 1.0);
    CHECK(a.f >= spec.evaluate(s));
  }
}

TEST_CASE("multi_start_optimize: more starts never do worse") {
  const WorldLayout l = WorldLayout::defaults();
  const ObjectiveSpec spec({1, 1, 1}, random_models(77));
  double prev = -1.0;
  for (int n : {1, 3, 8, 20}) {
    const double f = multi_start_optimize(spec, l, n, 5).f;
    CHECK(f >= prev);
    prev = f;
  }
  CHECK_THROWS_AS(multi_start_optimize(spec, l, 0, 5), std::invalid_argument);
}

TEST_CASE("solution JSON round trip") {
  const WorldLayout l = WorldLayout::defaults();
  const ObjectiveSpec spec({2, 1, 1}, random_models(78));
  const Solution s = multi_start_optimize(spec, l, 4, 3);
  const SetupPose back = setup_from_json(solution_to_json(s, spec.weights(), 3));
  CHECK(back.arm1.x == doctest::Approx(s.setup.arm1.x).epsilon(1e-12));
  CHECK(back.arm2.theta == doctest::Approx(s.setup.arm2.theta).epsilon(1e-12));
  CHECK_THROWS(setup_from_json(nlohmann::json::object()));
}

TEST_CASE("arm_heatmap: shape and cell values") {
  const WorldLayout l = WorldLayout::defaults();
  const ScoreModels m = random_models(79);
  const Weights w{1, 1, 1};
  const auto cells = arm_heatmap(m, l, Arm::kTwo, 7, w);
  REQUIRE(cells.size() == 49);
  const SearchGrid& g = l.grid(Arm::kTwo);
  CHECK(cells.front().x == doctest::Approx(g.center.x() - g.half_extent));
  CHECK(cells[1].x > cells[0].x);
  CHECK(cells[1].y == cells[0].y);
  CHECK(cells.back().y == doctest::Approx(g.center.y() + g.half_extent));
  for (const HeatmapCell& c : cells) {
    CHECK(c.score >= 0.0);
    CHECK(c.score <= 2.0);
    // At least as good as theta = 0, which is one of the samples.
    const Vec3 u = normalize_base({c.x, c.y, 0.0}, l, Arm::kTwo);
    CHECK(c.score >= clip_predict(m.reach2, u.data()) + clip_predict(m.env2, u.data()) - 1e-12);
  }
  CHECK_THROWS_AS(arm_heatmap(m, l, Arm::kOne, 1, w), std::invalid_argument);
}
