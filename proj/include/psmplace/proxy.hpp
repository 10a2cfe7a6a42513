#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "psmplace/fastron.hpp"
#include "psmplace/scoring.hpp"

namespace psmplace {

inline constexpr std::array<const char*, 3> kProxyNames{"env1", "env2", "self"};

struct ProxyTrainingSettings {
  std::size_t env_samples = 50000;
  std::size_t self_samples = 100000;
  std::size_t holdout_samples = 10000;
  FastronParams env{.gamma = 10.0, .beta = 1.5, .max_updates = 5000, .max_supports = 3000};
  FastronParams self{.gamma = 2.0, .beta = 1.5, .max_updates = 20000, .max_supports = 3000};
};

struct ProxyTrainingResult {
  FastronModels models;
  // Indexed like kProxyNames.
  std::array<FastronTrainingInfo, 3> info{};
  std::array<FastronEvaluation, 3> holdout{};
};

// Seed for sub-run `tag` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

// Trains the env1, env2 and self models on fresh geometric labels and scores
// each on an independent holdout set.
ProxyTrainingResult train_proxy_models(const WorldLayout& layout,
                                       const ProxyTrainingSettings& settings, std::uint64_t seed);

void save_proxy_models(const FastronModels& models, const std::filesystem::path& dir,
                       const nlohmann::json& metadata = {});
// Throws DataError naming the first missing file.
FastronModels load_proxy_models(const std::filesystem::path& dir);

struct BenchResult {
  std::size_t queries = 0;
  double geometric_seconds = 0.0;  // mean per query
  double proxy_seconds = 0.0;      // mean per query
  double ratio() const { return proxy_seconds / geometric_seconds; }
};

// Times the geometric checker and the proxy on the same seeded query stream.
BenchResult bench_collision(const WorldLayout& layout, const FastronModels& models,
                            std::size_t queries, std::uint64_t seed);

}  // namespace psmplace
