#include "psmplace/proxy.hpp"

#include <chrono>

#include "psmplace/io.hpp"

namespace psmplace {

namespace {

constexpr std::array<const char*, 3> kProxyFiles{"fastron_env1.json", "fastron_env2.json",
                                                 "fastron_self.json"};

}  // namespace

ProxyTrainingResult train_proxy_models(const WorldLayout& layout,
                                       const ProxyTrainingSettings& settings, std::uint64_t seed) {
  ProxyTrainingResult out;
  std::array<FastronModel*, 3> slots{&out.models.env1, &out.models.env2, &out.models.self};
  for (std::size_t k = 0; k < 3; ++k) {
    const bool self = k == 2;
    const std::uint64_t train_seed = derive_seed(seed, k + 1);
    const std::uint64_t test_seed = derive_seed(seed, k + 101);
    LabeledConfigSet train, test;
    if (self) {
      train = sample_self_training_set(layout, settings.self_samples, train_seed);
      test = sample_self_training_set(layout, settings.holdout_samples, test_seed);
    } else {
      const Arm arm = k == 0 ? Arm::kOne : Arm::kTwo;
      train = sample_env_training_set(layout, arm, settings.env_samples, train_seed);
      test = sample_env_training_set(layout, arm, settings.holdout_samples, test_seed);
    }
    *slots[k] = train_fastron(train, self ? settings.self : settings.env, &out.info[k]);
    out.holdout[k] = evaluate_fastron(*slots[k], test);
  }
  return out;
}

void save_proxy_models(const FastronModels& models, const std::filesystem::path& dir,
                       const nlohmann::json& metadata) {
  save_fastron(models.env1, dir / kProxyFiles[0], metadata);
  save_fastron(models.env2, dir / kProxyFiles[1], metadata);
  save_fastron(models.self, dir / kProxyFiles[2], metadata);
}

FastronModels load_proxy_models(const std::filesystem::path& dir) {
  FastronModels m;
  std::array<FastronModel*, 3> slots{&m.env1, &m.env2, &m.self};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto path = dir / kProxyFiles[k];
    if (!std::filesystem::exists(path)) {
      throw DataError("missing proxy model '" + path.string() + "' (run train-fastron first)");
    }
    *slots[k] = load_fastron(path);
  }
  return m;
}

BenchResult bench_collision(const WorldLayout& layout, const FastronModels& models,
                            std::size_t queries, std::uint64_t seed) {
  struct Query {
    SetupPose setup;
    JointConfig q1, q2;
  };
  std::vector<Query> qs(queries);
  Rng rng(seed);
  for (Query& q : qs) {
    q.setup = sample_setup(rng, layout);
    q.q1 = sample_joints(rng, layout.joint_limits);
    q.q2 = sample_joints(rng, layout.joint_limits);
  }
  const GeometricBackend geo(layout);
  const FastronBackend proxy(layout, models);

  // The sink keeps the calls from being optimized away.
  const auto time_backend = [&](const CollisionBackend& backend) {
    std::size_t sink = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (const Query& q : qs) {
      const CollisionReport r = backend.check(q.setup, q.q1, q.q2);
      sink += r.self_collision + r.env_collision_arm1 + r.env_collision_arm2;
    }
    const auto t1 = std::chrono::steady_clock::now();
    volatile std::size_t keep = sink;
    (void)keep;
    return std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(queries);
  };

  BenchResult b;
  b.queries = queries;
  if (queries == 0) return b;
  b.geometric_seconds = time_backend(geo);
  b.proxy_seconds = time_backend(proxy);
  return b;
}

}  // namespace psmplace
